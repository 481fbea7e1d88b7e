//! Optimal dividend, equity-issuance and investment control of a bank's
//! leverage ratio under solvency and liquidity constraints.
//!
//! The crate solves the one-dimensional variational inequality for the
//! shareholder value per unit liability, extracts the threshold policy
//! (dividend barrier, post-issuance target), simulates the controlled
//! diffusion, and sweeps regulatory parameter grids to map the
//! safety-profitability frontier.
//!
//! All numerics are generic over the scalar type ([`scalar::Real`], i.e.
//! `f32` or `f64`); the aliases at the crate root fix `f64`, which is what
//! the CLI and the file formats use.

pub mod error;
pub mod frontier;
pub mod grid;
pub mod model;
pub mod policy;
pub mod reference;
pub mod scalar;
pub mod sim;
pub mod solver;
mod tridiag;

pub use error::{Error, Result};

/// Double-precision model parameters.
pub type ModelParams = model::ModelParams<f64>;
/// Double-precision regulatory parameters.
pub type RegulatoryParams = model::RegulatoryParams<f64>;
/// Double-precision feasibility report.
pub type FeasibilityReport = model::FeasibilityReport<f64>;
/// Double-precision grid specification.
pub type GridSpec = grid::GridSpec<f64>;
/// Double-precision solver options.
pub type SolverOptions = solver::SolverOptions<f64>;
/// Double-precision solved value function.
pub type ValueFunction = solver::ValueFunction<f64>;
/// Double-precision threshold policy.
pub type OptimalPolicy = policy::OptimalPolicy<f64>;
/// Double-precision simulation configuration.
pub type SimConfig = sim::SimConfig<f64>;
/// Double-precision ensemble statistics.
pub type EnsembleStats = sim::EnsembleStats<f64>;
/// Double-precision sweep specification.
pub type SweepSpec = frontier::SweepSpec<f64>;
/// Double-precision frontier point.
pub type FrontierPoint = frontier::FrontierPoint<f64>;
