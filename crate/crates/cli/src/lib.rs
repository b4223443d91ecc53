//! Library side of the `osdyn` command-line tool: scenario configuration,
//! the shared check battery, and the command implementations.  The binary in
//! `main.rs` only parses arguments and dispatches here.

pub mod checks;
pub mod config;
pub mod orbit;
pub mod reduce;
pub mod simulate;
pub mod sweep;

use std::fmt::Display;
use std::path::{Path, PathBuf};

use config::ScenarioConfig;
use osdyn_core::integrate::IntegratorConfig;
use osdyn_core::model::{SimplifiedParams, State};

/// A command failure carrying its process exit code: `1` configuration or
/// usage, `2` singular reserve band, `3` inapplicable check, `4` no orbit.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(msg: impl Display) -> Self {
        Failure { code: 1, message: format!("{msg:#}") }
    }

    pub fn with_code(code: u8, msg: impl Display) -> Self {
        Failure { code, message: msg.to_string() }
    }
}

impl From<osdyn_core::Error> for Failure {
    fn from(e: osdyn_core::Error) -> Self {
        use osdyn_core::Error::*;
        let code = match &e {
            Singularity { .. } => 2,
            Inapplicable(_) | Hypothesis(_) => 3,
            NoConvergence { .. } => 4,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: format!("io error: {e}") }
    }
}

pub type CmdResult = Result<(), Failure>;

/// Everything a command needs, loaded and override-applied.
pub struct Workload {
    pub scenario: ScenarioConfig,
    pub params: SimplifiedParams,
    pub x0: State,
    pub int_cfg: IntegratorConfig,
}

impl Workload {
    pub fn horizon(&self) -> f64 {
        self.scenario.horizon_periods * self.params.period()
    }

    /// Build from an already-parsed scenario (after overrides).
    pub fn from_scenario(scenario: ScenarioConfig) -> Result<Self, Failure> {
        let params = scenario.params().map_err(Failure::config)?;
        let x0 = scenario.initial_state();
        let int_cfg = scenario.integrator();
        Ok(Workload { scenario, params, x0, int_cfg })
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub scheme: Option<config::SchemeConfig>,
    pub periods: Option<f64>,
}

pub fn load_workload(config_path: &Path, over: &Overrides) -> Result<Workload, Failure> {
    let mut scenario = ScenarioConfig::load(config_path).map_err(Failure::config)?;
    if let Some(p) = over.periods {
        if !(p.is_finite() && p > 0.0) {
            return Err(Failure::config(format!("--periods must be positive, got {p}")));
        }
        scenario.horizon_periods = p;
    }
    if let Some(tol) = over.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure::config(format!("--tol must be positive, got {tol}")));
        }
        scenario.integrator.rel_tol = Some(tol);
        scenario.integrator.abs_tol = Some(tol * 1e-2);
    }
    if let Some(s) = over.scheme {
        scenario.integrator.scheme = Some(s);
    }
    Workload::from_scenario(scenario)
}

/// Summary path derived from the main output path.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.txt")
}
