//! JSON run configuration: sections `{model, regulatory, grid, solver,
//! sim, sweep}`. Field names are lower_snake_case; command-line flags
//! override config fields.

use serde::{Deserialize, Serialize};

use leverage_control::grid::GridSpec;
use leverage_control::reference;
use leverage_control::{ModelParams, RegulatoryParams, SimConfig, SolverOptions, SweepSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub regulatory: RegulatoryParams,
    #[serde(default)]
    pub grid: Option<GridSpec<f64>>,
    #[serde(default)]
    pub solver: Option<SolverOverrides>,
    #[serde(default)]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

/// Optional solver overrides; anything unset falls back to the reference
/// calibration for the run's leverage-cap setting.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverOverrides {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub issuance_tol: Option<f64>,
    #[serde(default)]
    pub max_policy_iter: Option<usize>,
    #[serde(default)]
    pub max_impulse_iter: Option<usize>,
    #[serde(default)]
    pub max_domain_growth: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSection {
    #[serde(default = "default_y0")]
    pub y0: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub record_trajectory: bool,
    #[serde(default)]
    pub survival_horizon: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            y0: default_y0(),
            horizon: default_horizon(),
            dt: default_dt(),
            n_paths: default_paths(),
            seed: default_seed(),
            record_trajectory: false,
            survival_horizon: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSection {
    #[serde(default = "default_a1_grid")]
    pub a1_grid: Vec<f64>,
    #[serde(default = "default_a2_grid")]
    pub a2_grid: Vec<f64>,
    #[serde(default = "default_a3_grid")]
    pub a3_grid: Vec<f64>,
    #[serde(default = "default_y0")]
    pub y0: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub leverage_capped: bool,
    /// Survival constraints to optimize for.
    #[serde(default = "default_etas")]
    pub eta: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            a1_grid: default_a1_grid(),
            a2_grid: default_a2_grid(),
            a3_grid: default_a3_grid(),
            y0: default_y0(),
            t: default_t(),
            n_paths: default_paths(),
            seed: default_seed(),
            leverage_capped: false,
            eta: default_etas(),
        }
    }
}

fn default_y0() -> f64 {
    reference::Y0
}
fn default_horizon() -> f64 {
    reference::BANK_HORIZON
}
fn default_dt() -> f64 {
    1.0 / 250.0
}
fn default_paths() -> usize {
    reference::N_PATHS
}
fn default_seed() -> u64 {
    reference::DEFAULT_SEED
}
fn default_t() -> f64 {
    reference::SURVIVAL_HORIZON
}
fn default_etas() -> Vec<f64> {
    vec![0.8, 0.9]
}
fn default_a1_grid() -> Vec<f64> {
    reference::A1_GRID.to_vec()
}
fn default_a2_grid() -> Vec<f64> {
    reference::A2_GRID.to_vec()
}
fn default_a3_grid() -> Vec<f64> {
    reference::A3_GRID.to_vec()
}

impl RunConfig {
    /// Reference-calibrated run configuration at the baseline parameters.
    pub fn reference_default() -> Self {
        RunConfig {
            model: reference::baseline_model(),
            regulatory: reference::baseline_regulatory(),
            grid: None,
            solver: None,
            sim: None,
            sweep: None,
        }
    }

    pub fn grid(&self) -> GridSpec<f64> {
        self.grid.unwrap_or_else(SolverOptions::reference_grid)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::reference_profile(self.regulatory.leverage_capped);
        if let Some(o) = &self.solver {
            if let Some(v) = o.tol {
                opts.tol = v;
            }
            if let Some(v) = o.issuance_tol {
                opts.issuance_tol = v;
            }
            if let Some(v) = o.max_policy_iter {
                opts.max_policy_iter = v;
            }
            if let Some(v) = o.max_impulse_iter {
                opts.max_impulse_iter = v;
            }
            if let Some(v) = o.max_domain_growth {
                opts.max_domain_growth = v;
            }
        }
        opts
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = self.sim.clone().unwrap_or_default();
        SimConfig {
            y0: s.y0,
            horizon: s.horizon,
            dt: s.dt,
            n_paths: s.n_paths,
            seed: s.seed,
            record_trajectory: s.record_trajectory,
            survival_horizon: s.survival_horizon,
        }
    }

    pub fn sweep_spec(&self) -> (SweepSpec, Vec<f64>) {
        let s = self.sweep.clone().unwrap_or_default();
        (
            SweepSpec {
                a1_grid: s.a1_grid,
                a2_grid: s.a2_grid,
                a3_grid: s.a3_grid,
                y0: s.y0,
                t: s.t,
                n_paths: s.n_paths,
                seed: s.seed,
                leverage_capped: s.leverage_capped,
            },
            s.eta,
        )
    }
}
