//! Adiabatic renormalization of a qubit coupled to the line's modes.
//!
//! Modes faster than the current effective tunneling are eliminated, each
//! contributing `g²/ω²` to the exponent, until Δ stops changing.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::BandEdges;
use crate::dom::{DomCurve, PiecewiseDom};
use crate::error::{positive, Error, Result};
use crate::modes::{find_all_modes, HybridLineSpec, ScanOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    bare_tunneling: f64,
    coupling: f64,
}

impl QubitSpec {
    pub fn new(bare_tunneling: f64, coupling: f64) -> Result<Self> {
        positive("bare_tunneling", bare_tunneling)?;
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "coupling",
                reason: format!("must be finite and >= 0, got {coupling}"),
            });
        }
        Ok(Self {
            bare_tunneling,
            coupling,
        })
    }

    pub fn bare_tunneling(&self) -> f64 {
        self.bare_tunneling
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Delocalized,
    PartiallyLocalizedGap,
    PartiallyLocalizedBand1,
    QuasiLocalized,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 4] = [
        PhaseLabel::Delocalized,
        PhaseLabel::PartiallyLocalizedGap,
        PhaseLabel::PartiallyLocalizedBand1,
        PhaseLabel::QuasiLocalized,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Delocalized => "delocalized",
            PhaseLabel::PartiallyLocalizedGap => "partially_localized_gap",
            PhaseLabel::PartiallyLocalizedBand1 => "partially_localized_band1",
            PhaseLabel::QuasiLocalized => "quasi_localized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormOptions {
    /// Convergence when |Δ_n − Δ_{n−1}| ≤ tol·Δ₀.
    pub tol: f64,
    pub max_iter: usize,
    /// Δ_eff below floor_ratio·Δ₀ is labelled quasi-localized.
    pub floor_ratio: f64,
}

impl Default for RenormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            floor_ratio: 1e-8,
        }
    }
}

impl RenormOptions {
    fn validate(&self) -> Result<()> {
        positive("tol", self.tol)?;
        positive("floor_ratio", self.floor_ratio)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormalizationResult {
    pub delta_eff: f64,
    /// ln(Δ_eff/Δ₀); finite even when Δ_eff underflows.
    pub ln_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Δ₀, Δ₁, …, Δ_eff.
    pub trace: Vec<f64>,
    pub eliminated_mode_count: usize,
    pub phase: PhaseLabel,
}

pub fn classify_phase(delta_eff: f64, edges: &BandEdges, floor: f64) -> PhaseLabel {
    if delta_eff < floor {
        PhaseLabel::QuasiLocalized
    } else if delta_eff >= edges.omega_2 {
        PhaseLabel::Delocalized
    } else if delta_eff > edges.omega_1plus {
        PhaseLabel::PartiallyLocalizedGap
    } else if delta_eff >= edges.omega_1minus {
        PhaseLabel::PartiallyLocalizedBand1
    } else {
        PhaseLabel::QuasiLocalized
    }
}

/// Shared fixed-point loop. `exponent(Δ_prev)` returns (Σ, eliminated count)
/// with Δ_n = Δ₀·exp(−2Σ).
fn iterate<F>(qubit: &QubitSpec, edges: &BandEdges, options: &RenormOptions, mut exponent: F) -> Result<RenormalizationResult>
where
    F: FnMut(f64) -> (f64, usize),
{
    options.validate()?;
    let delta0 = qubit.bare_tunneling;
    let floor = options.floor_ratio * delta0;
    let mut trace = vec![delta0];
    let mut prev = delta0;
    let mut ln_ratio = 0.0;
    let mut eliminated = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        let (sum, count) = exponent(prev);
        ln_ratio = -2.0 * sum;
        eliminated = count;
        let next = delta0 * ln_ratio.exp();
        trace.push(next);
        let done = (next - prev).abs() <= options.tol * delta0;
        prev = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(RenormalizationResult {
        delta_eff: prev,
        ln_ratio,
        iterations,
        converged,
        trace,
        eliminated_mode_count: eliminated,
        phase: classify_phase(prev, edges, floor),
    })
}

/// Discrete recursion Δ_n = Δ₀·exp(−2 Σ_{ω_k > Δ_{n−1}} g²/ω_k²).
///
/// `mode_freqs` must be ascending. The sum runs from the highest mode down
/// and is extended as Δ falls, so each step costs only the newly eliminated
/// modes.
pub fn renormalize_discrete(
    mode_freqs: &[f64],
    qubit: &QubitSpec,
    edges: &BandEdges,
    options: &RenormOptions,
) -> Result<RenormalizationResult> {
    if mode_freqs.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mode_freqs",
            reason: "all frequencies must be finite and > 0".into(),
        });
    }
    if mode_freqs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            name: "mode_freqs",
            reason: "must be sorted ascending".into(),
        });
    }
    let g2 = qubit.coupling * qubit.coupling;
    // modes[next..] are already in the sum
    let mut next = mode_freqs.len();
    let mut sum = 0.0;
    iterate(qubit, edges, options, |prev| {
        while next > 0 && mode_freqs[next - 1] > prev {
            next -= 1;
            let w = mode_freqs[next];
            sum += g2 / (w * w);
        }
        (sum, mode_freqs.len() - next)
    })
}

/// Continuum recursion Δ_n = Δ₀·exp(−2g² ∫_{Δ_{n−1}}^∞ D(ω)/ω² dω).
pub fn renormalize_continuum(
    dom: &DomCurve,
    qubit: &QubitSpec,
    edges: &BandEdges,
    options: &RenormOptions,
) -> Result<RenormalizationResult> {
    let g2 = qubit.coupling * qubit.coupling;
    iterate(qubit, edges, options, |prev| {
        let eliminated = dom.samples.iter().filter(|s| s.omega > prev).count();
        (g2 * dom.inverse_square_moment(prev), eliminated)
    })
}

fn check_log_ratio(delta_eff: f64, delta0: f64) -> Result<f64> {
    positive("delta0", delta0)?;
    positive("delta_eff", delta_eff)?;
    if delta_eff > delta0 {
        return Err(Error::Domain {
            quantity: "delta_eff",
            value: delta_eff,
            domain: format!("<= delta0 = {delta0}"),
        });
    }
    Ok((delta_eff / delta0).ln())
}

/// g = √(ω₂^{3/2} ln(Δ_eff/Δ₀) / (−π α₂)), for Δ_eff at or below ω₂ and above Band1.
pub fn invert_g_gap(delta_eff: f64, delta0: f64, alpha2: f64, omega_2: f64) -> Result<f64> {
    let ln = check_log_ratio(delta_eff, delta0)?;
    positive("alpha2", alpha2)?;
    positive("omega_2", omega_2)?;
    if delta_eff > omega_2 {
        return Err(Error::Domain {
            quantity: "delta_eff",
            value: delta_eff,
            domain: format!("<= omega_2 = {omega_2}"),
        });
    }
    Ok((omega_2.powf(1.5) * ln / (-PI * alpha2)).sqrt().abs())
}

/// g = √(ω₂^{3/2} ln(Δ_eff/Δ₀) / (2α₂ (ω₂s/Δ_eff + arctan s − π/2))),
/// s = √(Δ_eff/ω₂ − 1), for Δ_eff ≥ ω₂.
pub fn invert_g_band2(delta_eff: f64, delta0: f64, alpha2: f64, omega_2: f64) -> Result<f64> {
    let ln = check_log_ratio(delta_eff, delta0)?;
    positive("alpha2", alpha2)?;
    positive("omega_2", omega_2)?;
    if delta_eff < omega_2 {
        return Err(Error::Domain {
            quantity: "delta_eff",
            value: delta_eff,
            domain: format!(">= omega_2 = {omega_2}"),
        });
    }
    let s = (delta_eff / omega_2 - 1.0).sqrt();
    // arctan s − π/2 = −arctan(1/s)
    let tail = if s > 0.0 { -(1.0 / s).atan() } else { -PI / 2.0 };
    let bracket = omega_2 / delta_eff * s + tail;
    Ok((omega_2.powf(1.5) * ln / (2.0 * alpha2 * bracket)).sqrt().abs())
}

/// g = √(ln(Δ₀/Δ_eff) / (2 ∫_{Δ_eff}^∞ D/ω²)), valid for any Δ_eff including Band1.
pub fn invert_g_numeric(delta_eff: f64, delta0: f64, dom: &PiecewiseDom) -> Result<f64> {
    let ln = check_log_ratio(delta_eff, delta0)?;
    let moment = dom.inverse_square_moment(delta_eff);
    if !(moment > 0.0) {
        return Err(Error::Domain {
            quantity: "delta_eff",
            value: delta_eff,
            domain: "no modes above it to eliminate".into(),
        });
    }
    Ok((-ln / (2.0 * moment)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramOptions {
    pub renorm: RenormOptions,
    /// Jump when |ΔΔ_eff| > jump_threshold·Δ₀ between neighbouring g.
    pub jump_threshold: f64,
}

impl Default for PhaseDiagramOptions {
    fn default() -> Self {
        Self {
            renorm: RenormOptions::default(),
            jump_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCell {
    pub delta0: f64,
    pub g: f64,
    pub delta_eff: f64,
    pub ln_ratio: f64,
    pub phase: PhaseLabel,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub row: usize,
    /// Jump lies between columns `col` and `col + 1`.
    pub col: usize,
    pub delta0: f64,
    pub g_before: f64,
    pub g_after: f64,
    pub delta_eff_before: f64,
    pub delta_eff_after: f64,
}

impl Jump {
    pub fn size(&self) -> f64 {
        (self.delta_eff_before - self.delta_eff_after).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub omega_sl: f64,
    pub edges: BandEdges,
    pub mode_count: usize,
    pub delta0_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
    /// `cells[i][j]` at (Δ₀_i, g_j).
    pub cells: Vec<Vec<PhaseCell>>,
    pub jumps: Vec<Jump>,
    pub jump_threshold: f64,
    pub warnings: Vec<String>,
}

impl PhaseDiagram {
    pub fn phases_present(&self) -> Vec<PhaseLabel> {
        PhaseLabel::ALL
            .into_iter()
            .filter(|p| self.cells.iter().flatten().any(|c| c.phase == *p))
            .collect()
    }

    /// True when some band edge lies between Δ_eff at neighbouring g within
    /// one grid step of the jump.
    pub fn jump_near_edge_crossing(&self, jump: &Jump) -> bool {
        let row = &self.cells[jump.row];
        let lo = jump.col.saturating_sub(1);
        let hi = (jump.col + 1).min(row.len().saturating_sub(2));
        (lo..=hi).any(|c| {
            let (a, b) = (row[c].delta_eff, row[c + 1].delta_eff);
            let (top, bottom) = if a >= b { (a, b) } else { (b, a) };
            self.edges.as_array().iter().any(|&e| e <= top && e >= bottom)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta0_over_wsl,g_over_wsl,delta_eff_over_wsl,phase,converged\n");
        for c in self.cells.iter().flatten() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.delta0 / self.omega_sl,
                c.g / self.omega_sl,
                c.delta_eff / self.omega_sl,
                c.phase.as_str(),
                c.converged
            ));
        }
        out
    }
}

fn check_grid(name: &'static str, grid: &[f64], allow_zero: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name,
            reason: "grid is empty".into(),
        });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name,
            reason: "grid must be strictly ascending".into(),
        });
    }
    let min_ok = if allow_zero { grid[0] >= 0.0 } else { grid[0] > 0.0 };
    if !min_ok || !grid.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: "grid values out of range".into(),
        });
    }
    Ok(())
}

/// Sweeps (Δ₀, g) over a precomputed ascending mode list. Rows run in
/// parallel; assembly is ordered by (Δ₀ index, g index).
pub fn phase_diagram_from_modes(
    mode_freqs: &[f64],
    edges: &BandEdges,
    omega_sl: f64,
    delta0_grid: &[f64],
    g_grid: &[f64],
    options: &PhaseDiagramOptions,
) -> Result<PhaseDiagram> {
    check_grid("delta0_grid", delta0_grid, false)?;
    check_grid("g_grid", g_grid, true)?;
    positive("jump_threshold", options.jump_threshold)?;
    let cells: Vec<Vec<PhaseCell>> = delta0_grid
        .par_iter()
        .map(|&delta0| {
            g_grid
                .iter()
                .map(|&g| {
                    let qubit = QubitSpec::new(delta0, g)?;
                    let r = renormalize_discrete(mode_freqs, &qubit, edges, &options.renorm)?;
                    Ok(PhaseCell {
                        delta0,
                        g,
                        delta_eff: r.delta_eff,
                        ln_ratio: r.ln_ratio,
                        phase: r.phase,
                        converged: r.converged,
                        iterations: r.iterations,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jumps = Vec::new();
    let mut warnings = Vec::new();
    for (i, row) in cells.iter().enumerate() {
        for (j, pair) in row.windows(2).enumerate() {
            if (pair[1].delta_eff - pair[0].delta_eff).abs() > options.jump_threshold * pair[0].delta0 {
                jumps.push(Jump {
                    row: i,
                    col: j,
                    delta0: pair[0].delta0,
                    g_before: pair[0].g,
                    g_after: pair[1].g,
                    delta_eff_before: pair[0].delta_eff,
                    delta_eff_after: pair[1].delta_eff,
                });
            }
        }
        for c in row.iter().filter(|c| !c.converged) {
            warnings.push(format!(
                "not converged at delta0 = {:e}, g = {:e} after {} iterations",
                c.delta0, c.g, c.iterations
            ));
        }
    }
    Ok(PhaseDiagram {
        omega_sl,
        edges: *edges,
        mode_count: mode_freqs.len(),
        delta0_grid: delta0_grid.to_vec(),
        g_grid: g_grid.to_vec(),
        cells,
        jumps,
        jump_threshold: options.jump_threshold,
        warnings,
    })
}

/// Solves the line's modes once, then sweeps the grid.
pub fn phase_diagram(
    spec: &HybridLineSpec,
    delta0_grid: &[f64],
    g_grid: &[f64],
    scan: &ScanOptions,
    options: &PhaseDiagramOptions,
) -> Result<PhaseDiagram> {
    let scan_result = find_all_modes(spec, scan)?;
    let mut freqs: Vec<f64> = scan_result.modes.iter().map(|m| m.omega).collect();
    freqs.sort_by(f64::total_cmp);
    let mut diagram = phase_diagram_from_modes(
        &freqs,
        &spec.edges(),
        spec.sl.omega_sl(),
        delta0_grid,
        g_grid,
        options,
    )?;
    let mut warnings = scan_result.warnings;
    warnings.append(&mut diagram.warnings);
    diagram.warnings = warnings;
    Ok(diagram)
}
