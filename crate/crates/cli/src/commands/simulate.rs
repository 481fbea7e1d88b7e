//! `levctl simulate`: Monte Carlo of the controlled diffusion under the
//! solved threshold policy.

use std::path::PathBuf;
use std::process::ExitCode;

use leverage_control::model::feasibility;
use leverage_control::policy::extract_policy;
use leverage_control::sim::{ensemble_csv, simulate, trajectory_csv};
use leverage_control::solver::solve_vi_with_options;
use leverage_control::{Error, Result};

use crate::manifest::ManifestBuilder;

use super::{config_json, load_config, manifest_io, path_opt};

#[allow(clippy::too_many_arguments)]
pub fn run(
    config_path: Option<PathBuf>,
    seed: Option<u64>,
    paths: Option<usize>,
    dt: Option<f64>,
    horizon: Option<f64>,
    y0: Option<f64>,
    record: bool,
    out: PathBuf,
) -> Result<ExitCode> {
    let cfg = load_config(config_path.as_ref())?;
    cfg.model.validate()?;
    cfg.regulatory.validate()?;
    let report = feasibility(&cfg.model, &cfg.regulatory);
    if !report.feasible {
        return Err(Error::Infeasible(
            report
                .violation(&cfg.model)
                .unwrap_or_else(|| "well-posedness conditions fail".into()),
        ));
    }

    let mut sim_cfg = cfg.sim_config();
    if let Some(v) = seed {
        sim_cfg.seed = v;
    }
    if let Some(v) = paths {
        sim_cfg.n_paths = v;
    }
    if let Some(v) = dt {
        sim_cfg.dt = v;
    }
    if let Some(v) = horizon {
        sim_cfg.horizon = v;
    }
    if let Some(v) = y0 {
        sim_cfg.y0 = v;
    }
    if record {
        sim_cfg.record_trajectory = true;
    }
    sim_cfg.validate()?;

    let vf = solve_vi_with_options(
        &cfg.model,
        &cfg.regulatory,
        &cfg.grid(),
        true,
        &cfg.solver_options(),
    )?;
    let pol = extract_policy(&vf, &cfg.model, &cfg.regulatory)?;
    let output = simulate(&pol, &cfg.model, &cfg.regulatory, &sim_cfg)?;

    let mut mb = ManifestBuilder::new(
        "simulate",
        path_opt(&config_path),
        config_json(&cfg),
        Some(sim_cfg.seed),
        &out,
    )
    .map_err(manifest_io)?;

    mb.write("ensemble.csv", &ensemble_csv(&output))
        .map_err(manifest_io)?;
    let summary = serde_json::json!({
        "policy": {"y_star": pol.y_star, "issuance_active": pol.issuance_active, "y_post": pol.y_post, "xi_star": pol.xi_star},
        "config": sim_cfg,
        "stats": output.stats,
    });
    mb.write("summary.json", &serde_json::to_string_pretty(&summary).unwrap())
        .map_err(manifest_io)?;

    if let Some(trajs) = &output.trajectories {
        if trajs.len() == 1 {
            mb.write("trajectory.csv", &trajectory_csv(&trajs[0]))
                .map_err(manifest_io)?;
        } else {
            for (k, traj) in trajs.iter().enumerate() {
                mb.write(&format!("trajectory_{k:04}.csv"), &trajectory_csv(traj))
                    .map_err(manifest_io)?;
            }
        }
    }
    mb.finish().map_err(manifest_io)?;

    let s = &output.stats;
    println!(
        "paths = {}, E[dividends] = {:.4}, E[issuance] = {:.4}, sharpe = {}, survival = {:.4} +- {:.4}",
        sim_cfg.n_paths,
        s.mean_total_dividend,
        s.mean_total_issuance,
        s.sharpe.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
        s.survival_prob,
        s.ci_half,
    );
    super::ok()
}
