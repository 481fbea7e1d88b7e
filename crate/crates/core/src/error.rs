//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by parameter validation, the solver, and policy extraction.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter failed its structural bounds (sign, interval, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was evaluated at a ratio below the bankruptcy level 1.
    #[error("leverage ratio {0} is below the domain boundary y = 1")]
    BelowDomain(f64),

    /// The regulatory switch point is undefined because the solvency branch
    /// binds for every ratio.
    #[error("no regime switch point: a3 <= a1, solvency branch binds everywhere")]
    NoSwitchPoint,

    /// The well-posedness conditions fail, so the control problem has no
    /// finite non-trivial value.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// The solver did not reach the requested tolerance.
    #[error("no convergence after {iterations} sweeps (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    /// The dividend barrier sits against the truncation boundary even after
    /// the domain was enlarged.
    #[error("truncation too small: dividend barrier within 5 cells of y_max = {y_max}")]
    TruncationTooSmall { y_max: f64 },

    /// The two independent barrier locators disagree.
    #[error("barrier mismatch: psi root at {psi_root} but slope criterion at {slope_node} (more than 2 cells apart)")]
    BarrierMismatch { psi_root: f64, slope_node: f64 },

    /// psi has no sign change on the grid.
    #[error("no root: psi has no sign change on the grid (truncation failure)")]
    NoRoot,

    /// The slope criterion and the impulse argmax disagree about the
    /// post-issuance target.
    #[error("inconsistent issuance: slope target {slope_target} vs impulse argmax {impulse_target} (more than 1 cell apart)")]
    InconsistentIssuance {
        slope_target: f64,
        impulse_target: f64,
    },

    /// Simulation or sweep configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
