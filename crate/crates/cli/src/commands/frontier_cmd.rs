//! `levctl frontier`: regulatory grid sweep, Pareto frontier, constrained
//! picks.

use std::path::PathBuf;
use std::process::ExitCode;

use leverage_control::frontier::{distinct_frontier, optimize, plot_csv, sweep, sweep_csv};
use leverage_control::{Error, Result};

use crate::manifest::ManifestBuilder;

use super::{config_json, load_config, manifest_io, path_opt};

pub fn run(config_path: Option<PathBuf>, etas: Vec<f64>, out: PathBuf) -> Result<ExitCode> {
    let cfg = load_config(config_path.as_ref())?;
    cfg.model.validate()?;
    let (spec, cfg_etas) = cfg.sweep_spec();
    let etas = if etas.is_empty() { cfg_etas } else { etas };

    let points = sweep(&spec, &cfg.model)?;
    let evaluated = points
        .iter()
        .filter(|p| p.feasible && p.error.is_none())
        .count();
    let failed = points
        .iter()
        .filter(|p| p.feasible && p.error.is_some())
        .count();
    if evaluated == 0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            last_update: f64::NAN,
        });
    }
    if failed > 0 {
        eprintln!("warning: {failed} feasible triples failed to solve (recorded in sweep.csv)");
    }

    let mut mb = ManifestBuilder::new(
        "frontier",
        path_opt(&config_path),
        config_json(&cfg),
        Some(spec.seed),
        &out,
    )
    .map_err(manifest_io)?;

    mb.write("sweep.csv", &sweep_csv(&points)).map_err(manifest_io)?;
    mb.write("plot.csv", &plot_csv(&points)).map_err(manifest_io)?;

    let front = distinct_frontier(&points);
    let picks: Vec<serde_json::Value> = etas
        .iter()
        .map(|&eta| match optimize(&points, eta) {
            Some(p) => serde_json::json!({"eta": eta, "pick": p}),
            None => serde_json::json!({"eta": eta, "pick": "no feasible point"}),
        })
        .collect();
    let doc = serde_json::json!({
        "feasible": points.iter().filter(|p| p.feasible).count(),
        "evaluated": evaluated,
        "frontier": front,
        "picks": picks,
    });
    mb.write("frontier.json", &serde_json::to_string_pretty(&doc).unwrap())
        .map_err(manifest_io)?;
    mb.finish().map_err(manifest_io)?;

    println!(
        "feasible triples: {}, frontier points: {}",
        points.iter().filter(|p| p.feasible).count(),
        front.len()
    );
    for pick in &picks {
        println!("{pick}");
    }
    super::ok()
}
