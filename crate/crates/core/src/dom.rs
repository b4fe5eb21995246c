//! Density of modes of the hybrid line.
//!
//! Three estimates are provided: a numerical one from neighbouring solved
//! eigenfrequencies, an analytical one summing the decoupled lines' `dk/dω`,
//! and a two-parameter piecewise model with square-root band-edge
//! singularities that admits closed-form renormalization integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dispersion::{rh_slowness, sl_dk_domega, BandEdges};
use crate::error::{Error, Result};
use crate::modes::{Band, HybridLineSpec, ModeSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomMethod {
    Numerical,
    Analytical,
    PiecewiseFit,
}

impl DomMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomMethod::Numerical => "numerical",
            DomMethod::Analytical => "analytical",
            DomMethod::PiecewiseFit => "piecewise_fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomSample {
    pub omega: f64,
    /// Modes per rad/s.
    pub density: f64,
    pub band: Band,
}

/// D(ω) = α₁ / (√(ω − ω_1−)·(ω_1+ − ω)^{1/4}) on Band1, α₂ / √(ω − ω_2) on
/// Band2, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDom {
    pub alpha1: f64,
    pub alpha2: f64,
    pub edges: BandEdges,
    /// Relative L2 residual ‖fit − D‖/‖D‖ over the fitted Band1 samples.
    pub residual_band1: f64,
    /// Same, for Band2.
    pub residual_band2: f64,
}

impl PiecewiseDom {
    pub fn new(alpha1: f64, alpha2: f64, edges: BandEdges) -> Self {
        Self {
            alpha1,
            alpha2,
            edges,
            residual_band1: 0.0,
            residual_band2: 0.0,
        }
    }

    pub fn density(&self, omega: f64) -> f64 {
        let e = &self.edges;
        if omega > e.omega_1minus && omega < e.omega_1plus {
            self.alpha1 * band1_shape(omega, e)
        } else if omega > e.omega_2 {
            self.alpha2 / (omega - e.omega_2).sqrt()
        } else {
            0.0
        }
    }

    /// ∫_{lower}^{∞} D(ω)/ω² dω.
    pub fn inverse_square_moment(&self, lower: f64) -> f64 {
        self.band1_moment(lower) + self.band2_moment(lower)
    }

    /// Band2 part, in closed form.
    pub fn band2_moment(&self, lower: f64) -> f64 {
        let w2 = self.edges.omega_2;
        let prefactor = self.alpha2 / w2.powf(1.5);
        if lower <= w2 {
            return prefactor * FRAC_PI_2;
        }
        let s = (lower / w2 - 1.0).sqrt();
        // π/2 − arctan s = arctan(1/s)
        prefactor * ((1.0 / s).atan() - s / (1.0 + s * s))
    }

    /// Band1 part. Substituting ω = ω_1− + W sin²φ removes both endpoint
    /// singularities before tanh-sinh quadrature.
    pub fn band1_moment(&self, lower: f64) -> f64 {
        let e = &self.edges;
        let width = e.band1_width();
        if lower >= e.omega_1plus || width <= 0.0 || self.alpha1 == 0.0 {
            return 0.0;
        }
        let from = lower.max(e.omega_1minus);
        let phi_lo = ((from - e.omega_1minus) / width).clamp(0.0, 1.0).sqrt().asin();
        let w1 = e.omega_1minus;
        let integrand = |phi: f64| {
            let s = phi.sin();
            let omega = w1 + width * s * s;
            phi.cos().max(0.0).sqrt() * (w1 / omega).powi(2)
        };
        let value = quadrature::double_exponential::integrate(integrand, phi_lo, FRAC_PI_2, 1e-14).integral;
        2.0 * self.alpha1 * width.powf(0.25) / (w1 * w1) * value
    }
}

fn band1_shape(omega: f64, e: &BandEdges) -> f64 {
    1.0 / ((omega - e.omega_1minus).sqrt() * (e.omega_1plus - omega).powf(0.25))
}

fn band2_shape(omega: f64, e: &BandEdges) -> f64 {
    1.0 / (omega - e.omega_2).sqrt()
}

/// A tabulated density of modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomCurve {
    pub method: DomMethod,
    pub samples: Vec<DomSample>,
    pub fit: Option<PiecewiseDom>,
    pub warnings: Vec<String>,
}

impl DomCurve {
    /// A curve with no modes at all.
    pub fn empty(method: DomMethod) -> Self {
        Self {
            method,
            samples: Vec::new(),
            fit: None,
            warnings: Vec::new(),
        }
    }

    pub fn from_fit(fit: PiecewiseDom, omegas: &[f64]) -> Self {
        let samples = omegas
            .iter()
            .filter_map(|&w| {
                let band = if fit.edges.in_band1(w) {
                    Band::Band1
                } else if w >= fit.edges.omega_2 {
                    Band::Band2
                } else {
                    return None;
                };
                Some(DomSample {
                    omega: w,
                    density: fit.density(w),
                    band,
                })
            })
            .collect();
        Self {
            method: DomMethod::PiecewiseFit,
            samples,
            fit: Some(fit),
            warnings: Vec::new(),
        }
    }

    pub fn band_samples(&self, band: Band) -> impl Iterator<Item = &DomSample> + '_ {
        self.samples.iter().filter(move |s| s.band == band)
    }

    /// D(ω): the fitted model when present, otherwise linear interpolation
    /// within each band's samples and zero outside them.
    pub fn density(&self, omega: f64) -> f64 {
        if let Some(fit) = &self.fit {
            return fit.density(omega);
        }
        for band in [Band::Band1, Band::Band2] {
            let pts: Vec<&DomSample> = self.band_samples(band).collect();
            if let Some(i) = pts.windows(2).position(|w| omega >= w[0].omega && omega <= w[1].omega) {
                let (a, b) = (pts[i], pts[i + 1]);
                let t = (omega - a.omega) / (b.omega - a.omega);
                return a.density + t * (b.density - a.density);
            }
        }
        0.0
    }

    /// ∫_{lower}^{∞} D(ω)/ω² dω. Exact for the fitted model; trapezoidal over
    /// the samples of each band otherwise.
    pub fn inverse_square_moment(&self, lower: f64) -> f64 {
        if let Some(fit) = &self.fit {
            return fit.inverse_square_moment(lower);
        }
        let mut total = 0.0;
        for band in [Band::Band1, Band::Band2] {
            let pts: Vec<(f64, f64)> = self
                .band_samples(band)
                .map(|s| (s.omega, s.density / (s.omega * s.omega)))
                .collect();
            for w in pts.windows(2) {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                if x1 <= lower {
                    continue;
                }
                if x0 >= lower {
                    total += 0.5 * (x1 - x0) * (y0 + y1);
                } else {
                    let ym = y0 + (y1 - y0) * (lower - x0) / (x1 - x0);
                    total += 0.5 * (x1 - lower) * (ym + y1);
                }
            }
        }
        total
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_rad_s,dom_s_per_rad,method\n");
        self.append_csv_rows(&mut out);
        out
    }

    pub fn append_csv_rows(&self, out: &mut String) {
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.omega, s.density, self.method.as_str()));
        }
    }
}

/// D_num(ω_i) = 2/(ω_{i+1} − ω_{i−1}) for the interior modes of one band.
pub fn dom_numerical(frequencies: &[f64], band: Band) -> Result<DomCurve> {
    if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "frequencies",
            reason: "must be strictly ascending".into(),
        });
    }
    let mut curve = DomCurve::empty(DomMethod::Numerical);
    if frequencies.len() < 3 {
        curve.warnings.push(format!(
            "{}: {} modes, need at least 3 for a numerical density",
            band.as_str(),
            frequencies.len()
        ));
        return Ok(curve);
    }
    curve.samples = frequencies
        .windows(3)
        .map(|w| DomSample {
            omega: w[1],
            density: 2.0 / (w[2] - w[0]),
            band,
        })
        .collect();
    Ok(curve)
}

/// Numerical density for a mixed mode list, band by band.
pub fn dom_numerical_modes(modes: &[ModeSolution]) -> Result<DomCurve> {
    let mut curve = DomCurve::empty(DomMethod::Numerical);
    for band in [Band::Band1, Band::Band2] {
        let freqs: Vec<f64> = modes.iter().filter(|m| m.band == band).map(|m| m.omega).collect();
        let part = dom_numerical(&freqs, band)?;
        curve.samples.extend(part.samples);
        curve.warnings.extend(part.warnings);
    }
    Ok(curve)
}

/// Right-handed contribution (d_r/π)·dk_r/dω, constant in ω.
pub fn dom_rh_term(spec: &HybridLineSpec) -> f64 {
    spec.rh.length() / PI * rh_slowness(&spec.rh)
}

/// Superlattice contribution (n_sl Δz/π)·|dk_sl/dω|; zero outside the bands.
pub fn dom_sl_term(spec: &HybridLineSpec, omega: f64) -> f64 {
    match sl_dk_domega(&spec.sl, omega) {
        Some(dk) => spec.sl.length() / PI * dk.abs(),
        None => 0.0,
    }
}

/// Approximate density of the coupled line as the sum of the decoupled lines'.
pub fn dom_analytical(spec: &HybridLineSpec, omega: f64) -> f64 {
    dom_rh_term(spec) + dom_sl_term(spec, omega)
}

/// Analytical density tabulated at `omegas`; samples in the gap are skipped.
pub fn dom_analytical_curve(spec: &HybridLineSpec, omegas: &[f64]) -> DomCurve {
    let edges = spec.edges();
    let samples = omegas
        .iter()
        .filter_map(|&w| {
            let band = if edges.in_band1(w) {
                Band::Band1
            } else if w >= edges.omega_2 {
                Band::Band2
            } else {
                return None;
            };
            Some(DomSample {
                omega: w,
                density: dom_analytical(spec, w),
                band,
            })
        })
        .collect();
    DomCurve {
        method: DomMethod::Analytical,
        samples,
        fit: None,
        warnings: Vec::new(),
    }
}

/// Least-squares amplitude α minimizing Σ (D_i − α f_i)²; returns (α, relative residual).
fn scalar_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let (mut df, mut ff, mut dd) = (0.0, 0.0, 0.0);
    for &(d, f) in points {
        df += d * f;
        ff += f * f;
        dd += d * d;
    }
    let alpha = df / ff;
    let res: f64 = points.iter().map(|&(d, f)| (d - alpha * f).powi(2)).sum();
    (alpha, (res / dd).sqrt())
}

/// Fits the two amplitudes of [`PiecewiseDom`] to a numerical curve,
/// dropping `edge_margin` samples at each end of each band.
pub fn fit_piecewise_dom(numerical: &DomCurve, edges: &BandEdges, edge_margin: usize) -> Result<PiecewiseDom> {
    let mut alphas = [0.0; 2];
    let mut residuals = [0.0; 2];
    for (slot, band) in [Band::Band1, Band::Band2].into_iter().enumerate() {
        let all: Vec<&DomSample> = numerical.band_samples(band).collect();
        let kept: Vec<(f64, f64)> = all
            .iter()
            .skip(edge_margin)
            .take(all.len().saturating_sub(2 * edge_margin))
            .filter_map(|s| {
                let f = match band {
                    Band::Band1 if s.omega > edges.omega_1minus && s.omega < edges.omega_1plus => {
                        band1_shape(s.omega, edges)
                    }
                    Band::Band2 if s.omega > edges.omega_2 => band2_shape(s.omega, edges),
                    _ => return None,
                };
                Some((s.density, f))
            })
            .collect();
        if kept.len() < 5 {
            return Err(Error::InsufficientData(format!(
                "{} has {} usable samples after dropping {edge_margin} at each edge; need 5",
                band.as_str(),
                kept.len()
            )));
        }
        let (alpha, res) = scalar_fit(&kept);
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveFit {
                name: if slot == 0 { "alpha1" } else { "alpha2" },
                value: alpha,
            });
        }
        alphas[slot] = alpha;
        residuals[slot] = res;
    }
    Ok(PiecewiseDom {
        alpha1: alphas[0],
        alpha2: alphas[1],
        edges: *edges,
        residual_band1: residuals[0],
        residual_band2: residuals[1],
    })
}

/// J(ω) = g²·D(ω).
pub fn spectral_density(g: f64, dom: &DomCurve, omega: f64) -> f64 {
    g * g * dom.density(omega)
}
