//! Dispersion relations of the two line segments and the superlattice band
//! structure.
//!
//! The superlattice dispersion follows from the Bloch condition on the
//! supercell matrix, `b11 + b22 = 2 cos(kΔz)`. With `u = ω_sl²/ω²` this is a
//! quadratic in `u`:
//!
//! ```text
//! u² − (1+ε)² u + 4 ε² sin²(kΔz/2) = 0
//! ```
//!
//! whose larger root gives the lower (right-handed looking) band and whose
//! smaller root gives the upper, left-handed band.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{supercell_abcd, RightHandedSpec, SuperlatticeSpec};
use crate::error::{Error, Result};

/// Selects the root of the superlattice dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Band 1, `ω ∈ [ω_1−, ω_1+]`, rising with k.
    Lower,
    /// Band 2, `ω ∈ [ω_2, ∞)`, falling with k.
    Upper,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }
}

/// Result of evaluating a dispersion branch: the upper branch has a pole at k = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchFrequency {
    Finite(f64),
    Unbounded,
}

impl BranchFrequency {
    pub fn finite(self) -> Option<f64> {
        match self {
            BranchFrequency::Finite(w) => Some(w),
            BranchFrequency::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, BranchFrequency::Unbounded)
    }
}

/// Band limits of the infinite superlattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub omega_1minus: f64,
    pub omega_1plus: f64,
    pub omega_2: f64,
}

impl BandEdges {
    /// Width of the gap between the two bands, `ω_2 − ω_1+`.
    pub fn gap_width(&self) -> f64 {
        self.omega_2 - self.omega_1plus
    }

    /// Width of the lower band, `ω_1+ − ω_1−`.
    pub fn band1_width(&self) -> f64 {
        self.omega_1plus - self.omega_1minus
    }

    pub fn in_band1(&self, omega: f64) -> bool {
        omega >= self.omega_1minus && omega <= self.omega_1plus
    }

    pub fn in_gap(&self, omega: f64) -> bool {
        omega > self.omega_1plus && omega < self.omega_2
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.omega_1minus, self.omega_1plus, self.omega_2]
    }

    /// All edges divided by `omega_ref`.
    pub fn scaled(&self, omega_ref: f64) -> BandEdges {
        BandEdges {
            omega_1minus: self.omega_1minus / omega_ref,
            omega_1plus: self.omega_1plus / omega_ref,
            omega_2: self.omega_2 / omega_ref,
        }
    }
}

/// ω(k) of the discrete right-handed ladder.
pub fn rh_dispersion_discrete(spec: &RightHandedSpec, k: f64) -> Result<f64> {
    let k_max = spec.k_max();
    if !(0.0..=k_max * (1.0 + 1e-12)).contains(&k) {
        return Err(Error::Domain {
            quantity: "k_r",
            value: k,
            domain: format!("[0, {k_max:e}] rad/m"),
        });
    }
    let cell = spec.length() / spec.cells() as f64;
    Ok(2.0 * spec.omega_r() * (0.5 * k * cell).sin())
}

/// Linear continuum-limit dispersion ω = k/√(c_r·l_r).
pub fn rh_dispersion_continuum(spec: &RightHandedSpec, k: f64) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Domain {
            quantity: "k_r",
            value: k,
            domain: "[0, ∞) rad/m".into(),
        });
    }
    Ok(k / rh_slowness(spec))
}

/// √(c_r·l_r), i.e. dk_r/dω of the continuum line.
pub fn rh_slowness(spec: &RightHandedSpec) -> f64 {
    (spec.capacitance_per_length() * spec.inductance_per_length()).sqrt()
}

/// Continuum wave number k_r(ω).
pub fn rh_wavenumber(spec: &RightHandedSpec, omega: f64) -> f64 {
    omega * rh_slowness(spec)
}

fn check_phase(phase: f64) -> Result<()> {
    if (0.0..=PI * (1.0 + 1e-14)).contains(&phase) {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity: "kΔz",
            value: phase,
            domain: "[0, π]".into(),
        })
    }
}

/// Superlattice dispersion in terms of the Bloch phase θ = kΔz ∈ [0, π].
pub fn sl_dispersion_phase(spec: &SuperlatticeSpec, phase: f64, branch: Branch) -> Result<BranchFrequency> {
    check_phase(phase)?;
    let e = spec.epsilon();
    let half_sum = 0.5 * (1.0 + e).powi(2);
    let s = (0.5 * phase).sin();
    let product = 4.0 * e * e * s * s;
    // ε²(2cos θ − 2) + (1+ε)⁴/4, written to avoid cancellation at small θ
    let inner = (half_sum * half_sum - product).max(0.0).sqrt();
    let u_plus = half_sum + inner;
    let w = spec.omega_sl();
    Ok(match branch {
        Branch::Lower => BranchFrequency::Finite(w / u_plus.sqrt()),
        Branch::Upper => {
            // smaller root from the product of roots
            let u_minus = product / u_plus;
            if u_minus > 0.0 {
                BranchFrequency::Finite(w / u_minus.sqrt())
            } else {
                BranchFrequency::Unbounded
            }
        }
    })
}

/// Superlattice dispersion ω(k) for one branch.
pub fn sl_dispersion(spec: &SuperlatticeSpec, k: f64, branch: Branch) -> Result<BranchFrequency> {
    let phase = k * spec.supercell_length();
    if !(0.0..=PI * (1.0 + 1e-14)).contains(&phase) {
        return Err(Error::Domain {
            quantity: "kΔz",
            value: phase,
            domain: "[0, π]".into(),
        });
    }
    sl_dispersion_phase(spec, phase.min(PI), branch)
}

/// Closed-form limits of both superlattice bands.
pub fn band_edges(spec: &SuperlatticeSpec) -> BandEdges {
    let e = spec.epsilon();
    let w = spec.omega_sl();
    let half_sum = 0.5 * (1.0 + e).powi(2);
    let root = (0.25 * (1.0 + e).powi(4) - 4.0 * e * e).max(0.0).sqrt();
    BandEdges {
        omega_1minus: w / (1.0 + e),
        omega_1plus: w / (half_sum + root).sqrt(),
        omega_2: w / (half_sum - root).sqrt(),
    }
}

/// Lower-band width Δω for each ε, at a fixed ω_sl.
pub fn bandwidth_curve(omega_sl: f64, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&e| {
            let spec = SuperlatticeSpec::new(1.0 / omega_sl, 1.0 / omega_sl, e, 1, 1.0)?;
            Ok((e, band_edges(&spec).band1_width()))
        })
        .collect()
}

/// Half-trace (b11 + b22)/2 of the supercell matrix at ω.
pub fn half_trace(spec: &SuperlatticeSpec, omega: f64) -> Result<f64> {
    Ok(0.5 * supercell_abcd(spec, omega)?.trace().re)
}

/// Inverse dispersion: Bloch phase θ = kΔz ∈ [0, π] at ω, or `None` when ω is
/// not in a propagating band.
pub fn bloch_phase(spec: &SuperlatticeSpec, omega: f64) -> Result<Option<f64>> {
    let h = half_trace(spec, omega)?;
    const SLACK: f64 = 1e-12;
    if h.abs() > 1.0 + SLACK {
        return Ok(None);
    }
    Ok(Some(h.clamp(-1.0, 1.0).acos()))
}

/// Which branch a propagating frequency belongs to.
pub fn branch_of(spec: &SuperlatticeSpec, omega: f64) -> Branch {
    let edges = band_edges(spec);
    if omega <= edges.omega_1plus {
        Branch::Lower
    } else {
        Branch::Upper
    }
}

/// dk_sl/dω from the implicit derivative of the Bloch condition. Negative on
/// the lower band, positive on the upper band; `None` outside the bands and at
/// the band edges where it diverges.
pub fn sl_dk_domega(spec: &SuperlatticeSpec, omega: f64) -> Option<f64> {
    let e = spec.epsilon();
    let u = (spec.omega_sl() / omega).powi(2);
    let a = (1.0 + 1.0 / e).powi(2);
    let numerator = u / omega * a - u * u / omega * 2.0 / (e * e);
    let h = 0.5 * (2.0 + u * u / (e * e) - u * a);
    let sin2 = 1.0 - h * h;
    if sin2 <= 0.0 {
        return None;
    }
    Some(numerator / (spec.supercell_length() * sin2.sqrt()))
}

/// Dispersion obtained independently from the flux Lagrangian of the
/// superlattice: the even-site equation of motion with a plane-wave ansatz
/// `Φ_2j = e^{i k j Δz}`.
///
/// The equation is quadratic in `x = 1/(ω² L)`; its coefficients are
/// recovered by evaluating the equation at three values of `x` and the roots
/// are taken with a cancellation-free quadratic formula.
pub fn el_oracle_dispersion(spec: &SuperlatticeSpec, k: f64, branch: Branch) -> Result<f64> {
    let phase = k * spec.supercell_length();
    if !(phase > 0.0 && phase <= PI * (1.0 + 1e-14)) {
        return Err(Error::Domain {
            quantity: "kΔz",
            value: phase,
            domain: "(0, π]".into(),
        });
    }
    let c = spec.capacitance();
    let l = spec.inductance();
    let e = spec.epsilon();
    let plane = Complex64::from_polar(1.0, phase);
    let even_site = |x: f64| -> f64 {
        let first = c + e * c - x;
        let second = c + e * c - x / e;
        // C²(Φ_2j + εΦ_2j−2) + εC²(Φ_2j+2 + εΦ_2j) − first·second·Φ_2j, divided by Φ_2j
        let lhs = c * c * (1.0 + e * plane.conj()) + e * c * c * (plane + e) - first * second;
        lhs.re
    };
    let f0 = even_site(0.0);
    let f1 = even_site(c);
    let f2 = even_site(2.0 * c);
    let a2 = (f2 - 2.0 * f1 + f0) / (2.0 * c * c);
    let a1 = (f1 - f0) / c - a2 * c;
    let a0 = f0;
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc < -1e-10 * a1 * a1 {
        return Err(Error::OracleInconsistent { phase });
    }
    let q = -0.5 * (a1 + a1.signum() * disc.max(0.0).sqrt());
    let (r1, r2) = (q / a2, a0 / q);
    let (x_big, x_small) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    let x = match branch {
        Branch::Lower => x_big,
        Branch::Upper => x_small,
    };
    if !(x > 0.0) {
        return Err(Error::OracleInconsistent { phase });
    }
    Ok(1.0 / (x * l).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(e: f64) -> SuperlatticeSpec {
        SuperlatticeSpec::new(6e-10, 2e-13, e, 200, 5e-5).unwrap()
    }

    fn rh() -> RightHandedSpec {
        RightHandedSpec::new(7.5e-10, 2.5e-13, 10, 0.01).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rh_discrete_values() {
        let r = rh();
        assert_eq!(rh_dispersion_discrete(&r, 0.0).unwrap(), 0.0);
        let top = rh_dispersion_discrete(&r, r.k_max()).unwrap();
        assert!(rel(top, 2.0 * r.omega_r()) < 1e-15);
        let third = rh_dispersion_discrete(&r, r.k_max() / 3.0).unwrap();
        assert!(rel(third, r.omega_r()) < 1e-14);
        assert!((r.omega_r() - 7.303e10).abs() < 1e7);
        assert!(rh_dispersion_discrete(&r, -1.0).is_err());
        assert!(rh_dispersion_discrete(&r, 1.01 * r.k_max()).is_err());
    }

    #[test]
    fn rh_continuum_is_linear_and_matches_small_k() {
        let r = rh();
        assert_eq!(rh_dispersion_continuum(&r, 0.0).unwrap(), 0.0);
        let k = 0.05 * r.k_max();
        let w1 = rh_dispersion_continuum(&r, k).unwrap();
        assert_eq!(rh_dispersion_continuum(&r, 2.0 * k).unwrap(), 2.0 * w1);
        for i in 1..=100 {
            let k = 0.1 * r.k_max() * i as f64 / 100.0;
            let d = rh_dispersion_discrete(&r, k).unwrap();
            let c = rh_dispersion_continuum(&r, k).unwrap();
            assert!(rel(d, c) < 5e-3, "k={k}");
        }
        assert!(rh_dispersion_continuum(&r, -1.0).is_err());
    }

    #[test]
    fn lower_branch_at_zero_is_lower_edge() {
        for e in [0.5, 1.0, 1.1, 2.0, 5.0] {
            let s = spec(e);
            let w = sl_dispersion(&s, 0.0, Branch::Lower).unwrap().finite().unwrap();
            assert!(rel(w, s.omega_sl() / (1.0 + e)) < 1e-15);
            assert!(sl_dispersion(&s, 0.0, Branch::Upper).unwrap().is_unbounded());
        }
    }

    #[test]
    fn lower_branch_at_zone_edge_epsilon_two() {
        let s = spec(2.0);
        let k = PI / s.supercell_length();
        let w = sl_dispersion(&s, k, Branch::Lower).unwrap().finite().unwrap();
        assert!(rel(w / s.omega_sl(), 0.39040) < 1e-4);
        assert!(rel(w, band_edges(&s).omega_1plus) < 1e-14);
    }

    #[test]
    fn upper_branch_at_two_thirds_pi_identical_cells() {
        let s = spec(1.0);
        let k = 2.0 * PI / 3.0 / s.supercell_length();
        let w = sl_dispersion(&s, k, Branch::Upper).unwrap().finite().unwrap();
        assert!(rel(w, s.omega_sl()) < 1e-14);
        assert!((half_trace(&s, w).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn phase_domain_errors() {
        let s = spec(2.0);
        assert!(sl_dispersion(&s, -1.0, Branch::Lower).is_err());
        assert!(sl_dispersion(&s, 1.001 * PI / s.supercell_length(), Branch::Lower).is_err());
        assert!(el_oracle_dispersion(&s, 0.0, Branch::Lower).is_err());
    }

    #[test]
    fn band_edge_values() {
        let e1 = band_edges(&spec(1.0));
        assert_eq!(e1.gap_width(), 0.0);
        assert!(rel(e1.omega_1plus, spec(1.0).omega_sl() / 2f64.sqrt()) < 1e-15);
        let s = spec(2.0);
        let e2 = band_edges(&s).scaled(s.omega_sl());
        assert!(rel(e2.omega_1minus, 0.33333) < 1e-4);
        assert!(rel(e2.omega_1plus, 0.39040) < 1e-4);
        assert!(rel(e2.omega_2, 0.64045) < 1e-4);
        assert!(rel(e2.band1_width(), 0.05707) < 5e-4);
    }

    #[test]
    fn bandwidth_peaks_at_identical_cells() {
        let w = 1.0;
        let curve = bandwidth_curve(w, &[0.5, 0.8, 1.0, 1.25, 2.0, 5.0]).unwrap();
        let at_one = curve[2].1;
        assert!(rel(at_one, 1.0 / 2f64.sqrt() - 0.5) < 1e-14);
        assert!(curve.iter().all(|&(_, d)| d <= at_one));
        let at_five = curve[5].1;
        assert!(rel(at_five, 0.00750) < 2e-3);
        assert!(at_five / at_one < 0.05);
    }

    #[test]
    fn oracle_spot_checks() {
        let s = spec(2.0);
        let k = 0.5 * PI / s.supercell_length();
        let a = el_oracle_dispersion(&s, k, Branch::Lower).unwrap();
        let b = sl_dispersion(&s, k, Branch::Lower).unwrap().finite().unwrap();
        assert!(rel(a, b) < 1e-9);
        let small = 1e-4 / s.supercell_length();
        let w = el_oracle_dispersion(&s, small, Branch::Lower).unwrap();
        assert!(rel(w, band_edges(&s).omega_1minus) < 1e-6);
        let s = spec(1.1);
        let w = el_oracle_dispersion(&s, PI / s.supercell_length(), Branch::Upper).unwrap();
        assert!(rel(w, band_edges(&s).omega_2) < 1e-9);
    }

    #[test]
    fn inverse_dispersion_round_trip() {
        let s = spec(2.0);
        for i in 1..50 {
            let theta = PI * i as f64 / 50.0;
            for br in [Branch::Lower, Branch::Upper] {
                let w = sl_dispersion_phase(&s, theta, br).unwrap().finite().unwrap();
                let back = bloch_phase(&s, w).unwrap().unwrap();
                assert!((back - theta).abs() < 1e-7, "{theta} {back}");
                assert_eq!(branch_of(&s, w), br);
            }
        }
        let edges = band_edges(&s);
        assert!(bloch_phase(&s, 0.5 * (edges.omega_1plus + edges.omega_2)).unwrap().is_none());
        assert!(bloch_phase(&s, 0.9 * edges.omega_1minus).unwrap().is_none());
    }

    #[test]
    fn dk_domega_matches_finite_difference() {
        let s = spec(2.0);
        let edges = band_edges(&s);
        for w in [
            edges.omega_1minus + 0.3 * edges.band1_width(),
            edges.omega_1minus + 0.7 * edges.band1_width(),
            1.2 * edges.omega_2,
        ] {
            let h = 1e-6 * w;
            let tp = bloch_phase(&s, w + h).unwrap().unwrap();
            let tm = bloch_phase(&s, w - h).unwrap().unwrap();
            let fd = (tp - tm) / (2.0 * h) / s.supercell_length();
            let an = sl_dk_domega(&s, w).unwrap();
            // closed form carries the opposite sign convention
            assert!(rel(-an, fd) < 1e-5, "{w}: {an} vs {fd}");
        }
    }
}
