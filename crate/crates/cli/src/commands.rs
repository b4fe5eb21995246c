use std::f64::consts::PI;

use lhsl_core::modes::self_consistency_residual_scaled;
use lhsl_core::{
    band_edges, dom_analytical_curve, dom_numerical_modes, find_all_modes, find_modes, fit_piecewise_dom,
    mode_profile, phase_diagram_from_modes, renormalize_continuum, renormalize_discrete, sl_dispersion, Band,
    BandEdges, Branch, DomCurve, HybridLineSpec, ModeSolution, PhaseDiagram, QubitSpec,
};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// A file to be written into the output directory.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }

    fn json(name: impl Into<String>, value: &Value) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        Self::new(name, text)
    }
}

fn core(context: &str) -> impl FnOnce(lhsl_core::Error) -> CliError + '_ {
    move |e| CliError::from_core_in(context, e)
}

fn edges_json(e: &BandEdges, omega_sl: f64) -> Value {
    json!({
        "omega_1minus_rad_s": e.omega_1minus,
        "omega_1plus_rad_s": e.omega_1plus,
        "omega_2_rad_s": e.omega_2,
        "gap_width_rad_s": e.gap_width(),
        "band1_width_rad_s": e.band1_width(),
        "omega_1minus_over_wsl": e.omega_1minus / omega_sl,
        "omega_1plus_over_wsl": e.omega_1plus / omega_sl,
        "omega_2_over_wsl": e.omega_2 / omega_sl,
    })
}

fn metadata(config: &RunConfig) -> Value {
    json!({
        "tool": "lhsl",
        "version": env!("CARGO_PKG_VERSION"),
        "epsilon": config.superlattice.epsilon,
        "supercells": config.superlattice.supercells,
        "rh_cells": config.right_handed.cells,
        "omega_sl_rad_s": config.omega_sl(),
    })
}

pub fn dispersion(config: &RunConfig, k_points: usize) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let sl = &spec.sl;
    let w = sl.omega_sl();
    let e = band_edges(sl);
    let mut rows = Vec::with_capacity(2 * k_points);
    for i in 0..k_points {
        let k = (i + 1) as f64 / k_points as f64 * PI / sl.supercell_length();
        for branch in [Branch::Lower, Branch::Upper] {
            if let Some(omega) = sl_dispersion(sl, k, branch).map_err(core("dispersion"))?.finite() {
                rows.push((k, omega, branch));
            }
        }
    }
    match config.output.format {
        Format::Csv => {
            let mut out = format!(
                "# omega_sl_rad_s = {w}\n# omega_1minus_rad_s = {}\n# omega_1plus_rad_s = {}\n# omega_2_rad_s = {}\n# gap_width_rad_s = {}\n",
                e.omega_1minus,
                e.omega_1plus,
                e.omega_2,
                e.gap_width()
            );
            out.push_str("k_rad_per_m,omega_rad_s,branch,omega_over_wsl\n");
            for (k, omega, branch) in &rows {
                out.push_str(&format!("{k},{omega},{},{}\n", branch.as_str(), omega / w));
            }
            Ok(vec![Artifact::new("dispersion.csv", out)])
        }
        Format::Json => {
            let points: Vec<Value> = rows
                .iter()
                .map(|(k, omega, branch)| {
                    json!({ "k_rad_per_m": k, "omega_rad_s": omega, "branch": branch.as_str(), "omega_over_wsl": omega / w })
                })
                .collect();
            Ok(vec![Artifact::json(
                "dispersion.json",
                &json!({ "band_edges": edges_json(&e, w), "points": points, "metadata": metadata(config) }),
            )])
        }
    }
}

pub fn band_edges_cmd(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let w = spec.sl.omega_sl();
    let e = spec.edges();
    match config.output.format {
        Format::Csv => {
            let mut out = String::from("quantity,omega_rad_s,omega_over_wsl\n");
            for (name, value) in [
                ("omega_1minus", e.omega_1minus),
                ("omega_1plus", e.omega_1plus),
                ("omega_2", e.omega_2),
                ("gap_width", e.gap_width()),
                ("band1_width", e.band1_width()),
                ("omega_r", spec.rh.omega_r()),
                ("rh_cutoff", spec.rh.cutoff()),
            ] {
                out.push_str(&format!("{name},{value},{}\n", value / w));
            }
            Ok(vec![Artifact::new("band_edges.csv", out)])
        }
        Format::Json => Ok(vec![Artifact::json(
            "band_edges.json",
            &json!({
                "band_edges": edges_json(&e, w),
                "omega_r_rad_s": spec.rh.omega_r(),
                "rh_cutoff_rad_s": spec.rh.cutoff(),
                "sl_impedance_ohm": spec.sl.impedance(),
                "rh_impedance_ohm": spec.rh.impedance(),
                "metadata": metadata(config),
            }),
        )]),
    }
}

fn solve_modes(config: &RunConfig, spec: &HybridLineSpec, band: Option<Band>) -> Result<(Vec<ModeSolution>, Vec<String>), CliError> {
    let opts = config.scan_options();
    let scan = match band {
        Some(b) => find_modes(spec, b, &opts),
        None => find_all_modes(spec, &opts),
    }
    .map_err(core("mode scan"))?;
    Ok((scan.modes, scan.warnings))
}

pub fn modes(config: &RunConfig, band: Option<Band>) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let w = spec.sl.omega_sl();
    let (modes, warnings) = solve_modes(config, &spec, band)?;
    let residual = |m: &ModeSolution| {
        self_consistency_residual_scaled(&spec, m.omega)
            .map(|r| r.relative())
            .map_err(core("residual"))
    };
    let count = |b: Band| modes.iter().filter(|m| m.band == b).count();
    let summary = json!({
        "band1_count": count(Band::Band1),
        "band2_count": count(Band::Band2),
        "band_edges": edges_json(&spec.edges(), w),
        "warnings": warnings,
        "metadata": metadata(config),
    });
    match config.output.format {
        Format::Csv => {
            let mut out = String::from(
                "band,index,omega_rad_s,omega_over_wsl,k_sl_rad_per_m,k_r_rad_per_m,alpha,residual_over_scale\n",
            );
            for m in &modes {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{:e}\n",
                    m.band.as_str(),
                    m.index,
                    m.omega,
                    m.omega / w,
                    m.k_sl,
                    m.k_r,
                    m.alpha,
                    residual(m)?
                ));
            }
            Ok(vec![Artifact::new("modes.csv", out), Artifact::json("modes_summary.json", &summary)])
        }
        Format::Json => {
            let list = modes
                .iter()
                .map(|m| {
                    Ok(json!({
                        "band": m.band.as_str(),
                        "index": m.index,
                        "omega_rad_s": m.omega,
                        "omega_over_wsl": m.omega / w,
                        "k_sl_rad_per_m": m.k_sl,
                        "k_r_rad_per_m": m.k_r,
                        "alpha": m.alpha,
                        "residual_over_scale": residual(m)?,
                    }))
                })
                .collect::<Result<Vec<Value>, CliError>>()?;
            let mut value = summary;
            value["modes"] = Value::Array(list);
            Ok(vec![Artifact::json("modes.json", &value)])
        }
    }
}

pub fn profile(config: &RunConfig, band: Band, index: usize) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let (modes, _) = solve_modes(config, &spec, Some(band))?;
    let mode = modes.get(index).ok_or_else(|| {
        CliError::Usage(format!("{} has {} modes; index {index} is out of range", band.as_str(), modes.len()))
    })?;
    let p = mode_profile(&spec, mode, config.solver.rh_samples).map_err(core("profile"))?;
    let stem = format!("profile_{}_{index}", band.as_str());
    match config.output.format {
        Format::Csv => Ok(vec![Artifact::new(format!("{stem}.csv"), p.to_csv())]),
        Format::Json => {
            let samples: Vec<Value> = (0..p.positions.len())
                .map(|i| {
                    json!({
                        "z_m": p.positions[i],
                        "re_v_volt": p.voltage[i].re,
                        "im_v_volt": p.voltage[i].im,
                        "re_i_amp": p.current[i].re,
                        "im_i_amp": p.current[i].im,
                        "segment": p.segment[i].as_str(),
                    })
                })
                .collect();
            Ok(vec![Artifact::json(
                format!("{stem}.json"),
                &json!({
                    "band": band.as_str(),
                    "index": index,
                    "omega_rad_s": mode.omega,
                    "omega_over_wsl": mode.omega / spec.sl.omega_sl(),
                    "samples": samples,
                    "metadata": metadata(config),
                }),
            )])
        }
    }
}

/// Numerical DOM, the analytical DOM and the piecewise fit on the same frequencies.
fn dom_curves(
    config: &RunConfig,
    spec: &HybridLineSpec,
    modes: &[ModeSolution],
    warnings: &mut Vec<String>,
) -> Result<(Vec<DomCurve>, Value), CliError> {
    let numeric = dom_numerical_modes(modes).map_err(core("dom"))?;
    warnings.extend(numeric.warnings.iter().cloned());
    let omegas: Vec<f64> = numeric.samples.iter().map(|s| s.omega).collect();
    let analytic = dom_analytical_curve(spec, &omegas);
    let mut curves = vec![numeric.clone(), analytic];
    let fit = match fit_piecewise_dom(&numeric, &spec.edges(), config.solver.edge_margin) {
        Ok(fit) => {
            curves.push(DomCurve::from_fit(fit, &omegas));
            json!({
                "alpha1": fit.alpha1,
                "alpha2": fit.alpha2,
                "residual_band1": fit.residual_band1,
                "residual_band2": fit.residual_band2,
            })
        }
        Err(e) => {
            warnings.push(format!("piecewise fit unavailable: {e}"));
            Value::Null
        }
    };
    Ok((curves, fit))
}

pub fn dom(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let (modes, mut warnings) = solve_modes(config, &spec, None)?;
    let (curves, fit) = dom_curves(config, &spec, &modes, &mut warnings)?;
    let summary = json!({
        "fit": fit,
        "band_edges": edges_json(&spec.edges(), spec.sl.omega_sl()),
        "warnings": warnings,
        "metadata": metadata(config),
    });
    match config.output.format {
        Format::Csv => {
            let mut out = String::from("omega_rad_s,dom_s_per_rad,method\n");
            for c in &curves {
                c.append_csv_rows(&mut out);
            }
            Ok(vec![Artifact::new("dom.csv", out), Artifact::json("dom_summary.json", &summary)])
        }
        Format::Json => {
            let mut value = summary;
            for c in &curves {
                let samples: Vec<Value> = c
                    .samples
                    .iter()
                    .map(|s| json!({ "omega_rad_s": s.omega, "dom_s_per_rad": s.density, "band": s.band.as_str() }))
                    .collect();
                value[c.method.as_str()] = Value::Array(samples);
            }
            Ok(vec![Artifact::json("dom.json", &value)])
        }
    }
}

pub fn renormalize(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let w = spec.sl.omega_sl();
    let edges = spec.edges();
    let (modes, mut warnings) = solve_modes(config, &spec, None)?;
    let (curves, _) = dom_curves(config, &spec, &modes, &mut warnings)?;
    let mut freqs: Vec<f64> = modes.iter().map(|m| m.omega).collect();
    freqs.sort_by(f64::total_cmp);
    let fitted = curves.iter().find(|c| c.fit.is_some());
    let opts = config.renorm_options();
    let mut rows = Vec::new();
    for &d0 in &config.delta0_grid() {
        for &g in &config.g_grid() {
            let q = QubitSpec::new(d0, g).map_err(core("qubit"))?;
            let r = renormalize_discrete(&freqs, &q, &edges, &opts).map_err(core("renormalize"))?;
            rows.push(("discrete", d0, g, r));
            if let Some(dom) = fitted {
                let r = renormalize_continuum(dom, &q, &edges, &opts).map_err(core("renormalize"))?;
                rows.push(("continuum", d0, g, r));
            }
        }
    }
    for (method, d0, g, r) in &rows {
        if !r.converged {
            warnings.push(format!("{method}: not converged at delta0 = {d0:e}, g = {g:e}"));
        }
    }
    let summary = json!({
        "band_edges": edges_json(&edges, w),
        "mode_count": freqs.len(),
        "warnings": warnings,
        "metadata": metadata(config),
    });
    match config.output.format {
        Format::Csv => {
            let mut out = String::from(
                "method,delta0_over_wsl,g_over_wsl,delta_eff_rad_s,delta_eff_over_wsl,ln_ratio,iterations,converged,phase\n",
            );
            for (method, d0, g, r) in &rows {
                out.push_str(&format!(
                    "{method},{},{},{},{},{},{},{},{}\n",
                    d0 / w,
                    g / w,
                    r.delta_eff,
                    r.delta_eff / w,
                    r.ln_ratio,
                    r.iterations,
                    r.converged,
                    r.phase.as_str()
                ));
            }
            Ok(vec![Artifact::new("renormalize.csv", out), Artifact::json("renormalize_summary.json", &summary)])
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|(method, d0, g, r)| {
                    json!({
                        "method": method,
                        "delta0_over_wsl": d0 / w,
                        "g_over_wsl": g / w,
                        "delta_eff_rad_s": r.delta_eff,
                        "delta_eff_over_wsl": r.delta_eff / w,
                        "ln_ratio": r.ln_ratio,
                        "iterations": r.iterations,
                        "converged": r.converged,
                        "phase": r.phase.as_str(),
                    })
                })
                .collect();
            let mut value = summary;
            value["results"] = Value::Array(list);
            Ok(vec![Artifact::json("renormalize.json", &value)])
        }
    }
}

fn phase_summary(config: &RunConfig, d: &PhaseDiagram) -> Value {
    let w = d.omega_sl;
    let jumps: Vec<Value> = d
        .jumps
        .iter()
        .map(|j| {
            json!({
                "delta0_over_wsl": j.delta0 / w,
                "g_before_over_wsl": j.g_before / w,
                "g_after_over_wsl": j.g_after / w,
                "delta_eff_before_over_wsl": j.delta_eff_before / w,
                "delta_eff_after_over_wsl": j.delta_eff_after / w,
                "near_band_edge_crossing": d.jump_near_edge_crossing(j),
            })
        })
        .collect();
    let phases: Vec<&str> = d.phases_present().iter().map(|p| p.as_str()).collect();
    json!({
        "band_edges": edges_json(&d.edges, w),
        "mode_count": d.mode_count,
        "jump_threshold": d.jump_threshold,
        "jumps": jumps,
        "phases_present": phases,
        "delta0_points": d.delta0_grid.len(),
        "g_points": d.g_grid.len(),
        "warnings": d.warnings,
        "metadata": metadata(config),
    })
}

pub fn phase_diagram(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = config.hybrid()?;
    let (modes, warnings) = solve_modes(config, &spec, None)?;
    let mut freqs: Vec<f64> = modes.iter().map(|m| m.omega).collect();
    freqs.sort_by(f64::total_cmp);
    let mut d = phase_diagram_from_modes(
        &freqs,
        &spec.edges(),
        spec.sl.omega_sl(),
        &config.delta0_grid(),
        &config.g_grid(),
        &config.phase_diagram_options(),
    )
    .map_err(core("phase diagram"))?;
    let mut all = warnings;
    all.append(&mut d.warnings);
    d.warnings = all;
    let summary = phase_summary(config, &d);
    match config.output.format {
        Format::Csv => Ok(vec![
            Artifact::new("phase_diagram.csv", d.to_csv()),
            Artifact::json("phase_diagram.json", &summary),
        ]),
        Format::Json => {
            let w = d.omega_sl;
            let cells: Vec<Value> = d
                .cells
                .iter()
                .flatten()
                .map(|c| {
                    json!({
                        "delta0_over_wsl": c.delta0 / w,
                        "g_over_wsl": c.g / w,
                        "delta_eff_over_wsl": c.delta_eff / w,
                        "phase": c.phase.as_str(),
                        "converged": c.converged,
                    })
                })
                .collect();
            let mut value = summary;
            value["cells"] = Value::Array(cells);
            Ok(vec![Artifact::json("phase_diagram.json", &value)])
        }
    }
}
