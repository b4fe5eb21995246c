//! Eigenmodes of the finite hybrid line: superlattice on `[0, d_sl]`,
//! right-handed line on `[d_sl, d]`, current nodes at both open ends.
//!
//! A mode is a zero of the self-consistency residual
//!
//! ```text
//! R(ω) = 2 Z_r α cos(k_r d_r) − Z_sl (e^{i k_sl d_sl} + β e^{−i k_sl d_sl})
//! α    = −sin(k_sl d_sl) / sin(k_r d_r)
//! β    = −(e^{−i k_sl Δz} − b22) / (e^{i k_sl Δz} − b22)
//! Z_sl = (e^{i k_sl Δz} − b22) / b21
//! ```
//!
//! with k_sl from the inverse superlattice dispersion and k_r from the
//! continuum right-handed dispersion.
//!
//! Roots are searched along the Bloch phase θ = k_sl·Δz rather than ω: modes
//! are close to equally spaced in k, while in ω they pile up at the band
//! edges. `R` itself has poles where `sin(k_r d_r) = 0`, so brackets are
//! located on the pole-free product `sin(k_r d_r)·R`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{supercell_abcd, RightHandedSpec, SuperlatticeSpec};
use crate::dispersion::{
    band_edges, bloch_phase, rh_wavenumber, sl_dispersion_phase, BandEdges, Branch,
};
use crate::error::{Error, Result};

/// Superlattice on the left, right-handed line on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridLineSpec {
    pub sl: SuperlatticeSpec,
    pub rh: RightHandedSpec,
}

impl HybridLineSpec {
    pub fn new(sl: SuperlatticeSpec, rh: RightHandedSpec) -> Self {
        Self { sl, rh }
    }

    /// Total length d = d_sl + d_r.
    pub fn length(&self) -> f64 {
        self.sl.length() + self.rh.length()
    }

    /// Position of the junction, d_sl.
    pub fn junction(&self) -> f64 {
        self.sl.length()
    }

    pub fn edges(&self) -> BandEdges {
        band_edges(&self.sl)
    }

    /// Line built from the default element values with the given ε and n_sl.
    pub fn with_defaults(epsilon: f64, supercells: usize) -> Result<Self> {
        use crate::circuit::defaults::*;
        Ok(Self::new(
            SuperlatticeSpec::new(
                SL_INDUCTANCE,
                SL_CAPACITANCE,
                epsilon,
                supercells,
                SUPERCELL_LENGTH,
            )?,
            RightHandedSpec::new(RH_CELL_INDUCTANCE, RH_CELL_CAPACITANCE, RH_CELLS, RH_LENGTH)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Band1,
    Band2,
}

impl Band {
    pub fn as_str(&self) -> &'static str {
        match self {
            Band::Band1 => "band1",
            Band::Band2 => "band2",
        }
    }

    pub fn branch(&self) -> Branch {
        match self {
            Band::Band1 => Branch::Lower,
            Band::Band2 => Branch::Upper,
        }
    }
}

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "band1" | "1" => Ok(Band::Band1),
            "band2" | "2" => Ok(Band::Band2),
            other => Err(format!("unknown band `{other}` (expected band1 or band2)")),
        }
    }
}

/// One eigenmode of the hybrid line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    /// Position within its band, ascending in ω, starting at 0.
    pub index: usize,
    pub omega: f64,
    pub k_sl: f64,
    pub k_r: f64,
    pub alpha: f64,
    #[serde(skip)]
    pub beta: Complex64,
    #[serde(skip)]
    pub z_sl: Complex64,
    pub band: Band,
}

/// Terms of the wave solution at one (θ, ω) point.
#[derive(Debug, Clone, Copy)]
struct WaveTerms {
    k_sl: f64,
    k_r: f64,
    z_sl: Complex64,
    beta: Complex64,
    sin_sl: f64,
    sin_r: f64,
    cos_r: f64,
    /// Z_sl (e^{i k d_sl} + β e^{−i k d_sl})
    v_sl_junction: Complex64,
}

impl WaveTerms {
    fn at(spec: &HybridLineSpec, phase: f64, omega: f64) -> Result<Self> {
        let b = supercell_abcd(&spec.sl, omega)?;
        let k_sl = phase / spec.sl.supercell_length();
        let k_r = rh_wavenumber(&spec.rh, omega);
        let forward = Complex64::from_polar(1.0, phase) - b.b22;
        let backward = Complex64::from_polar(1.0, -phase) - b.b22;
        let z_sl = forward / b.b21;
        let beta = -backward / forward;
        let sl_phase = k_sl * spec.sl.length();
        let r_phase = k_r * spec.rh.length();
        let v_sl_junction =
            z_sl * (Complex64::from_polar(1.0, sl_phase) + beta * Complex64::from_polar(1.0, -sl_phase));
        Ok(Self {
            k_sl,
            k_r,
            z_sl,
            beta,
            sin_sl: sl_phase.sin(),
            sin_r: r_phase.sin(),
            cos_r: r_phase.cos(),
            v_sl_junction,
        })
    }

    fn alpha(&self) -> f64 {
        -self.sin_sl / self.sin_r
    }

    fn residual(&self, z_r: f64) -> f64 {
        2.0 * z_r * self.alpha() * self.cos_r - self.v_sl_junction.re
    }

    /// Magnitude bound of the two residual terms.
    fn scale(&self, z_r: f64) -> f64 {
        2.0 * z_r * self.alpha().abs() + 2.0 * self.z_sl.norm()
    }

    /// sin(k_r d_r)·R, continuous across the poles of α.
    fn cleared(&self, z_r: f64) -> f64 {
        -2.0 * z_r * self.sin_sl * self.cos_r - self.sin_r * self.v_sl_junction.re
    }
}

/// Residual value together with the magnitude of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

fn propagating_phase(spec: &HybridLineSpec, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega < spec.rh.cutoff()) {
        return Err(Error::Domain {
            quantity: "omega",
            value: omega,
            domain: format!("(0, {:e}) rad/s below the right-handed cutoff", spec.rh.cutoff()),
        });
    }
    bloch_phase(&spec.sl, omega)?.ok_or(Error::NotPropagating { omega })
}

/// Real-valued self-consistency residual at ω; eigenfrequencies are its zeros.
pub fn self_consistency_residual(spec: &HybridLineSpec, omega: f64) -> Result<f64> {
    Ok(self_consistency_residual_scaled(spec, omega)?.value)
}

/// As [`self_consistency_residual`], also returning the size of its terms.
pub fn self_consistency_residual_scaled(spec: &HybridLineSpec, omega: f64) -> Result<Residual> {
    let phase = propagating_phase(spec, omega)?;
    let t = WaveTerms::at(spec, phase, omega)?;
    let z_r = spec.rh.impedance();
    Ok(Residual {
        value: t.residual(z_r),
        scale: t.scale(z_r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Scan points per expected mode.
    pub points_per_mode: usize,
    /// Upper end of the Band2 scan; defaults to just below the right-handed cutoff.
    pub band2_max: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            points_per_mode: 20,
            band2_max: None,
        }
    }
}

/// Modes found in one band plus anything worth telling the caller.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ModeScan {
    pub modes: Vec<ModeSolution>,
    pub warnings: Vec<String>,
}

/// A scan path: a parameter s mapped onto (θ, branch) so that ω rises with s.
#[derive(Debug, Clone, Copy)]
struct Path {
    /// Smallest θ reached on the upper branch.
    upper_min_phase: f64,
}

impl Path {
    fn point(&self, s: f64) -> (f64, Branch) {
        if s <= PI {
            (s, Branch::Lower)
        } else {
            ((2.0 * PI - s).max(self.upper_min_phase), Branch::Upper)
        }
    }
}

struct Scanner<'a> {
    spec: &'a HybridLineSpec,
    path: Path,
    z_r: f64,
}

impl Scanner<'_> {
    fn eval(&self, s: f64) -> Result<(f64, f64, WaveTerms)> {
        let (phase, branch) = self.path.point(s);
        let omega = sl_dispersion_phase(&self.spec.sl, phase, branch)?
            .finite()
            .ok_or(Error::Domain {
                quantity: "kΔz",
                value: phase,
                domain: "(0, π] on the upper branch".into(),
            })?;
        let t = WaveTerms::at(self.spec, phase, omega)?;
        Ok((omega, t.cleared(self.z_r), t))
    }

    fn rh_phase(&self, s: f64) -> Result<f64> {
        let (_, _, t) = self.eval(s)?;
        Ok(t.k_r * self.spec.rh.length())
    }

    /// Bisection on s down to adjacent floating-point values.
    fn refine(&self, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (_, f_mid, _) = self.eval(mid)?;
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Finds all simple zeros of the self-consistency residual in one band.
pub fn find_modes(spec: &HybridLineSpec, band: Band, options: &ScanOptions) -> Result<ModeScan> {
    if options.points_per_mode < 10 {
        return Err(Error::InvalidParameter {
            name: "solver.scan_points_per_mode",
            reason: format!(
                "need at least 10 scan points per expected mode, got {}",
                options.points_per_mode
            ),
        });
    }
    let edges = spec.edges();
    let mut warnings = Vec::new();
    let band2_max = options
        .band2_max
        .unwrap_or(spec.rh.cutoff() * (1.0 - 1e-9))
        .min(spec.rh.cutoff() * (1.0 - 1e-9));

    // upper end of the upper branch, as a Bloch phase
    let upper_min_phase = if band2_max > edges.omega_2 {
        bloch_phase(&spec.sl, band2_max)?.unwrap_or(PI)
    } else {
        PI
    };
    let has_band2 = upper_min_phase < PI;
    if band == Band::Band2 && !has_band2 {
        warnings.push(format!(
            "band2 starts at {:e} rad/s, above the scan limit {:e} rad/s; no modes",
            edges.omega_2, band2_max
        ));
        return Ok(ModeScan {
            modes: Vec::new(),
            warnings,
        });
    }
    let path_end = 2.0 * PI - upper_min_phase;
    let merged = edges.gap_width() <= 1e-12 * spec.sl.omega_sl() && has_band2;
    let (start, end) = match (band, merged) {
        (_, true) => (0.0, path_end),
        (Band::Band1, false) => (0.0, PI),
        (Band::Band2, false) => (PI, path_end),
    };
    let path = Path { upper_min_phase };
    let scanner = Scanner {
        spec,
        path,
        z_r: spec.rh.impedance(),
    };

    // coarse grid: points_per_mode per π of superlattice phase n_sl·θ
    let n_sl = spec.sl.supercells() as f64;
    let span = end - start;
    let coarse = ((options.points_per_mode as f64) * n_sl * span / PI).ceil().max(16.0) as usize;
    let step = span / coarse as f64;
    // half-step margin at each end keeps the trivial zeros at the band edges out
    let mut grid: Vec<f64> = Vec::with_capacity(coarse);
    let rh_step = PI / options.points_per_mode as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..coarse {
        let s = start + (i as f64 + 0.5) * step;
        let rh_phase = scanner.rh_phase(s)?;
        if let Some((ps, pr)) = prev {
            let pieces = ((rh_phase - pr).abs() / rh_step).ceil() as usize;
            for j in 1..pieces {
                grid.push(ps + (s - ps) * j as f64 / pieces as f64);
            }
        }
        grid.push(s);
        prev = Some((s, rh_phase));
    }

    let values: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| scanner.eval(s).map(|(w, f, _)| (w, f)))
        .collect::<Result<_>>()?;

    let brackets: Vec<(f64, f64, f64)> = (0..grid.len() - 1)
        .filter_map(|i| {
            let (f0, f1) = (values[i].1, values[i + 1].1);
            ((f0 > 0.0) != (f1 > 0.0) || f0 == 0.0).then_some((grid[i], grid[i + 1], f0))
        })
        .collect();

    let roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(lo, hi, f_lo)| {
            if f_lo == 0.0 {
                Ok(lo)
            } else {
                scanner.refine(lo, hi, f_lo)
            }
        })
        .collect::<Result<_>>()?;

    let z_r = spec.rh.impedance();
    let mut modes = Vec::with_capacity(roots.len());
    let mut rejected = 0usize;
    for s in roots {
        let (_, branch) = path.point(s);
        let (omega, _, t) = scanner.eval(s)?;
        let mode_band = match branch {
            Branch::Lower => Band::Band1,
            Branch::Upper => Band::Band2,
        };
        if mode_band != band {
            continue;
        }
        let residual = Residual {
            value: t.residual(z_r),
            scale: t.scale(z_r),
        };
        if !(residual.relative() < 1e-6) {
            rejected += 1;
            continue;
        }
        modes.push(ModeSolution {
            index: 0,
            omega,
            k_sl: t.k_sl,
            k_r: t.k_r,
            alpha: t.alpha(),
            beta: t.beta,
            z_sl: t.z_sl,
            band: mode_band,
        });
    }
    modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    for (i, m) in modes.iter_mut().enumerate() {
        m.index = i;
    }
    if rejected > 0 {
        warnings.push(format!(
            "{rejected} sign changes in {} were poles, not zeros, and were dropped",
            band.as_str()
        ));
    }

    // mode count expected from the accumulated phase of both segments
    let (band_lo, band_hi) = match band {
        Band::Band1 => (0.0, PI),
        Band::Band2 => (PI, path_end),
    };
    let sl_phase = n_sl * (band_hi - band_lo).min(PI);
    let rh_phase = (scanner.rh_phase(band_hi - 1e-12)? - scanner.rh_phase(band_lo + 1e-12)?).abs();
    let expected = (sl_phase + rh_phase) / PI;
    if (modes.len() as f64) < expected - 2.0 {
        warnings.push(format!(
            "{}: found {} modes, expected about {:.1}; zeros closer than one scan cell may be missed \
             (scan density {} points per mode, {} points)",
            band.as_str(),
            modes.len(),
            expected,
            options.points_per_mode,
            grid.len()
        ));
    }
    Ok(ModeScan { modes, warnings })
}

/// Modes of both bands, Band1 first.
pub fn find_all_modes(spec: &HybridLineSpec, options: &ScanOptions) -> Result<ModeScan> {
    let mut b1 = find_modes(spec, Band::Band1, options)?;
    let b2 = find_modes(spec, Band::Band2, options)?;
    b1.modes.extend(b2.modes);
    b1.warnings.extend(b2.warnings);
    Ok(b1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Sl,
    Rh,
}

impl Segment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Segment::Sl => "sl",
            Segment::Rh => "rh",
        }
    }
}

/// Complex voltage and current amplitudes along the line, for I_0 = 1 A.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub positions: Vec<f64>,
    pub voltage: Vec<Complex64>,
    pub current: Vec<Complex64>,
    pub segment: Vec<Segment>,
}

impl ModeProfile {
    /// Indices of samples belonging to `segment`.
    pub fn segment_indices(&self, segment: Segment) -> impl Iterator<Item = usize> + '_ {
        self.segment
            .iter()
            .enumerate()
            .filter(move |(_, s)| **s == segment)
            .map(|(i, _)| i)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_m,re_v_volt,im_v_volt,re_i_amp,im_i_amp,segment\n");
        for i in 0..self.positions.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.positions[i],
                self.voltage[i].re,
                self.voltage[i].im,
                self.current[i].re,
                self.current[i].im,
                self.segment[i].as_str()
            ));
        }
        out
    }
}

/// Samples a mode: superlattice values at its circuit nodes (every Δz/2),
/// right-handed values on `rh_samples` evenly spaced points.
pub fn mode_profile(spec: &HybridLineSpec, mode: &ModeSolution, rh_samples: usize) -> Result<ModeProfile> {
    let phase = mode.k_sl * spec.sl.supercell_length();
    let omega = sl_dispersion_phase(&spec.sl, phase.min(PI), mode.band.branch())
        .ok()
        .and_then(|w| w.finite())
        .ok_or_else(|| Error::MismatchedMode(format!("k_sl = {} is not on {}", mode.k_sl, mode.band.as_str())))?;
    if (omega - mode.omega).abs() > 1e-9 * mode.omega {
        return Err(Error::MismatchedMode(format!(
            "k_sl maps to {omega:e} rad/s but the mode is at {:e} rad/s",
            mode.omega
        )));
    }
    let k_r = rh_wavenumber(&spec.rh, mode.omega);
    if (k_r - mode.k_r).abs() > 1e-9 * k_r {
        return Err(Error::MismatchedMode(format!(
            "k_r = {} does not match the right-handed line ({k_r})",
            mode.k_r
        )));
    }
    let t = WaveTerms::at(spec, phase, mode.omega)?;
    if t.residual(spec.rh.impedance()).abs() > 1e-6 * t.scale(spec.rh.impedance()) {
        return Err(Error::MismatchedMode(format!(
            "ω = {:e} rad/s is not an eigenfrequency of this line",
            mode.omega
        )));
    }
    if rh_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "rh_samples",
            reason: "need at least 2 samples".into(),
        });
    }

    let n_nodes = 2 * spec.sl.supercells() + 1;
    let total = n_nodes + rh_samples;
    let mut profile = ModeProfile {
        positions: Vec::with_capacity(total),
        voltage: Vec::with_capacity(total),
        current: Vec::with_capacity(total),
        segment: Vec::with_capacity(total),
    };
    let half_cell = 0.5 * spec.sl.supercell_length();
    let k = t.k_sl;
    for m in 0..n_nodes {
        let z = m as f64 * half_cell;
        let fwd = Complex64::from_polar(1.0, k * z);
        let bwd = fwd.conj();
        profile.positions.push(z);
        profile.current.push(fwd - bwd);
        profile.voltage.push(t.z_sl * (fwd + t.beta * bwd));
        profile.segment.push(Segment::Sl);
    }
    let d = spec.length();
    let d_sl = spec.junction();
    let alpha = t.alpha();
    let z_r = spec.rh.impedance();
    let shift = Complex64::from_polar(1.0, -t.k_r * d);
    for j in 0..rh_samples {
        let z = d_sl + (d - d_sl) * j as f64 / (rh_samples - 1) as f64;
        let fwd = shift * Complex64::from_polar(1.0, t.k_r * z);
        let bwd = fwd.conj();
        profile.positions.push(z);
        profile.current.push(alpha * (fwd - bwd));
        profile.voltage.push(z_r * alpha * (fwd + bwd));
        profile.segment.push(Segment::Rh);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(e: f64, n: usize) -> HybridLineSpec {
        HybridLineSpec::with_defaults(e, n).unwrap()
    }

    #[test]
    fn residual_rejects_gap_and_cutoff() {
        let s = line(2.0, 20);
        let e = s.edges();
        let gap = 0.5 * (e.omega_1plus + e.omega_2);
        assert!(matches!(
            self_consistency_residual(&s, gap),
            Err(Error::NotPropagating { .. })
        ));
        assert!(self_consistency_residual(&s, 0.5 * e.omega_1minus).is_err());
        assert!(matches!(
            self_consistency_residual(&s, 1.1 * s.rh.cutoff()),
            Err(Error::Domain { .. })
        ));
        assert!(self_consistency_residual(&s, 0.5 * (e.omega_1minus + e.omega_1plus)).is_ok());
    }

    #[test]
    fn modes_are_zeros_and_alternate_sign() {
        let s = line(2.0, 20);
        let scan = find_modes(&s, Band::Band1, &ScanOptions::default()).unwrap();
        assert!(scan.modes.len() >= 18 && scan.modes.len() <= 22, "{}", scan.modes.len());
        for m in &scan.modes {
            let r = self_consistency_residual_scaled(&s, m.omega).unwrap();
            assert!(r.relative() < 1e-9, "mode {} residual {}", m.index, r.relative());
        }
        for w in scan.modes.windows(2) {
            assert!(w[1].omega > w[0].omega);
            assert_eq!(w[1].index, w[0].index + 1);
        }
    }

    #[test]
    fn beta_is_unimodular_and_wavenumbers_consistent() {
        let s = line(2.0, 20);
        let scan = find_all_modes(&s, &ScanOptions::default()).unwrap();
        for m in &scan.modes {
            assert!((m.beta.norm() - 1.0).abs() < 1e-10);
            let w = sl_dispersion_phase(&s.sl, m.k_sl * s.sl.supercell_length(), m.band.branch())
                .unwrap()
                .finite()
                .unwrap();
            assert!((w - m.omega).abs() / m.omega < 1e-10);
            let wr = crate::dispersion::rh_dispersion_continuum(&s.rh, m.k_r).unwrap();
            assert!((wr - m.omega).abs() / m.omega < 1e-10);
        }
    }

    #[test]
    fn single_supercell_has_at_most_two_band1_modes() {
        let s = line(2.0, 1);
        let scan = find_modes(&s, Band::Band1, &ScanOptions::default()).unwrap();
        assert!(scan.modes.len() <= 2, "{}", scan.modes.len());
        let e = s.edges();
        for m in &scan.modes {
            assert!(e.in_band1(m.omega));
        }
    }

    #[test]
    fn rejects_sparse_scan() {
        let s = line(2.0, 20);
        let opts = ScanOptions {
            points_per_mode: 5,
            band2_max: None,
        };
        assert!(matches!(
            find_modes(&s, Band::Band1, &opts),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn band2_above_scan_limit_is_empty_with_warning() {
        let s = line(2.0, 20);
        let opts = ScanOptions {
            points_per_mode: 20,
            band2_max: Some(0.5 * s.edges().omega_2),
        };
        let scan = find_modes(&s, Band::Band2, &opts).unwrap();
        assert!(scan.modes.is_empty());
        assert_eq!(scan.warnings.len(), 1);
    }

    #[test]
    fn identical_cells_merge_the_touching_bands() {
        let s = line(1.0, 20);
        let opts = ScanOptions::default();
        let b1 = find_modes(&s, Band::Band1, &opts).unwrap();
        let b2 = find_modes(&s, Band::Band2, &opts).unwrap();
        let e = s.edges();
        assert!(b1.modes.iter().all(|m| m.omega <= e.omega_1plus));
        assert!(b2.modes.iter().all(|m| m.omega >= e.omega_2));
        assert!(b1.modes.len() >= 18, "{}", b1.modes.len());
    }

    #[test]
    fn profile_boundary_conditions() {
        let s = line(2.0, 20);
        let scan = find_modes(&s, Band::Band1, &ScanOptions::default()).unwrap();
        let m = scan.modes[7];
        let p = mode_profile(&s, &m, 50).unwrap();
        let vmax = p.voltage.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let imax = p.current.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert_eq!(p.current[0].norm(), 0.0);
        assert!(p.current.last().unwrap().norm() < 1e-12 * imax);
        let n = 2 * s.sl.supercells();
        assert_eq!(p.positions[n], p.positions[n + 1]);
        assert!((p.voltage[n] - p.voltage[n + 1]).norm() / vmax < 1e-8);
        assert!((p.current[n] - p.current[n + 1]).norm() / imax < 1e-8);
        let csv = p.to_csv();
        assert!(csv.starts_with("z_m,re_v_volt,im_v_volt,re_i_amp,im_i_amp,segment\n"));
        assert_eq!(csv.lines().count(), p.positions.len() + 1);
    }

    #[test]
    fn profile_rejects_foreign_mode() {
        let s = line(2.0, 20);
        let other = line(2.0, 30);
        let scan = find_modes(&other, Band::Band1, &ScanOptions::default()).unwrap();
        let m = scan.modes[5];
        assert!(matches!(mode_profile(&s, &m, 10), Err(Error::MismatchedMode(_))));
    }
}
