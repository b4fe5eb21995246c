use std::path::PathBuf;

use lhsl_core::circuit::defaults;
use lhsl_core::spinboson::RenormOptions;
use lhsl_core::{HybridLineSpec, PhaseDiagramOptions, RightHandedSpec, ScanOptions, SuperlatticeSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

const NANO: f64 = 1e9;
const PICO: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperlatticeBlock {
    pub inductance_nh: f64,
    pub capacitance_pf: f64,
    pub epsilon: f64,
    pub supercells: usize,
    pub supercell_length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RightHandedBlock {
    pub cell_inductance_nh: f64,
    pub cell_capacitance_pf: f64,
    pub cells: usize,
    pub length_m: f64,
}

/// Qubit parameters in units of ω_sl.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitBlock {
    pub delta0_over_wsl: Vec<f64>,
    pub g_min_over_wsl: f64,
    pub g_max_over_wsl: f64,
    pub g_points: usize,
}

impl Default for QubitBlock {
    fn default() -> Self {
        Self {
            delta0_over_wsl: vec![0.5, 0.75, 1.0, 1.25, 1.5],
            g_min_over_wsl: 0.0,
            g_max_over_wsl: 0.2,
            g_points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub points_per_mode: usize,
    /// Upper end of the Band2 scan; omitted means just below the RH cutoff.
    pub band2_max_over_wsl: Option<f64>,
    pub renorm_tol: f64,
    pub max_iter: usize,
    pub floor_ratio: f64,
    pub jump_threshold: f64,
    pub edge_margin: usize,
    pub k_points: usize,
    pub rh_samples: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let renorm = RenormOptions::default();
        Self {
            points_per_mode: ScanOptions::default().points_per_mode,
            band2_max_over_wsl: None,
            renorm_tol: renorm.tol,
            max_iter: renorm.max_iter,
            floor_ratio: renorm.floor_ratio,
            jump_threshold: PhaseDiagramOptions::default().jump_threshold,
            edge_margin: 5,
            k_points: 100,
            rh_samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub superlattice: SuperlatticeBlock,
    pub right_handed: RightHandedBlock,
    #[serde(default)]
    pub qubit: QubitBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn paper_defaults() -> Self {
        Self {
            superlattice: SuperlatticeBlock {
                inductance_nh: defaults::SL_INDUCTANCE * NANO,
                capacitance_pf: defaults::SL_CAPACITANCE * PICO,
                epsilon: defaults::EPSILON,
                supercells: defaults::SUPERCELLS,
                supercell_length_m: defaults::SUPERCELL_LENGTH,
            },
            right_handed: RightHandedBlock {
                cell_inductance_nh: defaults::RH_CELL_INDUCTANCE * NANO,
                cell_capacitance_pf: defaults::RH_CELL_CAPACITANCE * PICO,
                cells: defaults::RH_CELLS,
                length_m: defaults::RH_LENGTH,
            },
            qubit: QubitBlock::default(),
            solver: SolverBlock::default(),
            output: OutputBlock::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config {
            message: e.to_string().trim_end().to_string(),
            key: None,
        })?;
        let config: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let key = missing_field(&inner)
                .map(|field| if path == "." { field.to_string() } else { format!("{path}.{field}") })
                .or_else(|| (path != ".").then_some(path));
            CliError::Config { message: inner, key }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.hybrid()?;
        let q = &self.qubit;
        check(!q.delta0_over_wsl.is_empty(), "qubit.delta0_over_wsl", "must not be empty")?;
        check(
            q.delta0_over_wsl.iter().all(|d| d.is_finite() && *d > 0.0),
            "qubit.delta0_over_wsl",
            "entries must be > 0",
        )?;
        check(
            q.delta0_over_wsl.windows(2).all(|w| w[1] > w[0]),
            "qubit.delta0_over_wsl",
            "must be strictly ascending",
        )?;
        check(q.g_min_over_wsl >= 0.0, "qubit.g_min_over_wsl", "must be >= 0")?;
        check(q.g_max_over_wsl > q.g_min_over_wsl, "qubit.g_max_over_wsl", "must exceed g_min_over_wsl")?;
        check(q.g_points >= 2, "qubit.g_points", "must be at least 2")?;
        let s = &self.solver;
        check(s.points_per_mode >= 10, "solver.points_per_mode", "must be at least 10")?;
        check(s.renorm_tol > 0.0, "solver.renorm_tol", "must be > 0")?;
        check(s.max_iter >= 1, "solver.max_iter", "must be at least 1")?;
        check(s.floor_ratio > 0.0, "solver.floor_ratio", "must be > 0")?;
        check(s.jump_threshold > 0.0, "solver.jump_threshold", "must be > 0")?;
        check(s.k_points >= 1, "solver.k_points", "must be at least 1")?;
        check(s.rh_samples >= 2, "solver.rh_samples", "must be at least 2")?;
        if let Some(b) = s.band2_max_over_wsl {
            check(b > 0.0, "solver.band2_max_over_wsl", "must be > 0")?;
        }
        Ok(())
    }

    pub fn hybrid(&self) -> Result<HybridLineSpec, CliError> {
        let sl = &self.superlattice;
        let rh = &self.right_handed;
        let sl = SuperlatticeSpec::new(
            sl.inductance_nh / NANO,
            sl.capacitance_pf / PICO,
            sl.epsilon,
            sl.supercells,
            sl.supercell_length_m,
        )
        .map_err(invalid)?;
        let rh = RightHandedSpec::new(rh.cell_inductance_nh / NANO, rh.cell_capacitance_pf / PICO, rh.cells, rh.length_m)
            .map_err(invalid)?;
        Ok(HybridLineSpec::new(sl, rh))
    }

    pub fn omega_sl(&self) -> f64 {
        1.0 / (self.superlattice.inductance_nh / NANO * self.superlattice.capacitance_pf / PICO).sqrt()
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            points_per_mode: self.solver.points_per_mode,
            band2_max: self.solver.band2_max_over_wsl.map(|b| b * self.omega_sl()),
        }
    }

    pub fn renorm_options(&self) -> RenormOptions {
        RenormOptions {
            tol: self.solver.renorm_tol,
            max_iter: self.solver.max_iter,
            floor_ratio: self.solver.floor_ratio,
        }
    }

    pub fn phase_diagram_options(&self) -> PhaseDiagramOptions {
        PhaseDiagramOptions {
            renorm: self.renorm_options(),
            jump_threshold: self.solver.jump_threshold,
        }
    }

    pub fn delta0_grid(&self) -> Vec<f64> {
        let w = self.omega_sl();
        self.qubit.delta0_over_wsl.iter().map(|d| d * w).collect()
    }

    pub fn g_grid(&self) -> Vec<f64> {
        let q = &self.qubit;
        let w = self.omega_sl();
        let n = q.g_points - 1;
        (0..=n)
            .map(|j| (q.g_min_over_wsl + (q.g_max_over_wsl - q.g_min_over_wsl) * j as f64 / n as f64) * w)
            .collect()
    }
}

fn check(ok: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config {
            message: format!("{key} {reason}"),
            key: Some(key.to_string()),
        })
    }
}

/// Maps a core parameter error onto the config key that carries the value.
fn invalid(e: lhsl_core::Error) -> CliError {
    let key = match &e {
        lhsl_core::Error::InvalidParameter { name, .. } => Some(
            match *name {
                "superlattice.inductance" => "superlattice.inductance_nh",
                "superlattice.capacitance" => "superlattice.capacitance_pf",
                "superlattice.supercell_length" => "superlattice.supercell_length_m",
                "right_handed.cell_inductance" => "right_handed.cell_inductance_nh",
                "right_handed.cell_capacitance" => "right_handed.cell_capacitance_pf",
                "right_handed.length" => "right_handed.length_m",
                other => other,
            }
            .to_string(),
        ),
        _ => None,
    };
    CliError::Config {
        message: e.to_string(),
        key,
    }
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults_reproduce_core_defaults() {
        let c = RunConfig::paper_defaults();
        let h = c.hybrid().unwrap();
        let d = HybridLineSpec::with_defaults(2.0, 200).unwrap();
        assert!((h.sl.omega_sl() - d.sl.omega_sl()).abs() < 1e-6 * d.sl.omega_sl());
        assert!((h.rh.omega_r() - d.rh.omega_r()).abs() < 1e-6 * d.rh.omega_r());
    }

    #[test]
    fn emit_is_idempotent() {
        let first = RunConfig::paper_defaults().to_toml();
        let parsed = RunConfig::from_toml(&first).unwrap();
        assert_eq!(parsed, RunConfig::paper_defaults());
        assert_eq!(parsed.to_toml(), first);
    }

    #[test]
    fn missing_key_is_named() {
        let text = RunConfig::paper_defaults().to_toml().replace("epsilon = 2.0\n", "");
        match RunConfig::from_toml(&text) {
            Err(CliError::Config { key, .. }) => assert_eq!(key.as_deref(), Some("superlattice.epsilon")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = RunConfig::paper_defaults().to_toml().replace("epsilon = 2.0", "epsilon = 2.0\ncolour = 1");
        assert!(matches!(RunConfig::from_toml(&text), Err(CliError::Config { .. })));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = RunConfig::paper_defaults().to_toml().replace("epsilon = 2.0", "epsilon = -1.0");
        assert!(RunConfig::from_toml(&text).is_err());
        let mut c = RunConfig::paper_defaults();
        c.qubit.g_points = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn g_grid_endpoints() {
        let c = RunConfig::paper_defaults();
        let g = c.g_grid();
        assert_eq!(g.len(), 401);
        assert_eq!(g[0], 0.0);
        assert!((g[400] / c.omega_sl() - 0.2).abs() < 1e-15);
    }
}
