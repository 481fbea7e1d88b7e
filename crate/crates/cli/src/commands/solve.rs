//! `levctl solve`: value function, threshold policy, verification checks.

use std::path::PathBuf;
use std::process::ExitCode;

use leverage_control::model::feasibility;
use leverage_control::policy::{extract_policy, verify_policy};
use leverage_control::solver::solve_vi_with_options;
use leverage_control::{Error, Result};

use crate::manifest::ManifestBuilder;

use super::{config_json, load_config, manifest_io, path_opt};

pub fn run(
    config_path: Option<PathBuf>,
    benchmark: bool,
    allow_degenerate: bool,
    eval_2d: Option<Vec<f64>>,
    out: PathBuf,
) -> Result<ExitCode> {
    let cfg = load_config(config_path.as_ref())?;
    cfg.model.validate()?;
    cfg.regulatory.validate()?;

    let report = feasibility(&cfg.model, &cfg.regulatory);
    if !report.feasible {
        if report.degenerate_liquidation && allow_degenerate {
            eprintln!(
                "note: parameters are in the immediate-liquidation regime (v = y - 1); continuing"
            );
        } else {
            let mut msg = report
                .violation(&cfg.model)
                .unwrap_or_else(|| "well-posedness conditions fail".into());
            if report.degenerate_liquidation {
                msg.push_str(" (pass --allow-degenerate to solve anyway)");
            }
            return Err(Error::Infeasible(msg));
        }
    }

    let grid = cfg.grid();
    let opts = cfg.solver_options();
    let vf = solve_vi_with_options(&cfg.model, &cfg.regulatory, &grid, true, &opts)?;
    let pol = extract_policy(&vf, &cfg.model, &cfg.regulatory)?;
    let checks = verify_policy(&vf, &pol, &cfg.model, &cfg.regulatory)?;

    let mut mb = ManifestBuilder::new(
        "solve",
        path_opt(&config_path),
        config_json(&cfg),
        None,
        &out,
    )
    .map_err(manifest_io)?;

    mb.write("value.csv", &vf.to_csv()).map_err(manifest_io)?;
    mb.write("pi_table.csv", &pol.pi_table_csv(&cfg.regulatory))
        .map_err(manifest_io)?;

    let mut summary = serde_json::json!({
        "y_star": pol.y_star,
        "issuance_active": pol.issuance_active,
        "y_post": pol.y_post,
        "xi_star": pol.xi_star,
        "checks": checks,
        "v_at_1": vf.v[0],
    });

    if benchmark {
        let vb = solve_vi_with_options(&cfg.model, &cfg.regulatory, &grid, false, &opts)?;
        mb.write("value_benchmark.csv", &vb.to_csv())
            .map_err(manifest_io)?;
        let y0 = cfg.sim.as_ref().map(|s| s.y0).unwrap_or(1.2);
        let v = vf.value_at(y0)?;
        let dvv = (v - vb.value_at(y0)?) / v;
        summary["v_y0"] = serde_json::json!(v);
        summary["relative_issuance_value"] = serde_json::json!(dvv);
        summary["y0"] = serde_json::json!(y0);
        println!("relative issuance value at y0={y0}: {dvv:.4}");
    }

    if let Some(lx) = eval_2d {
        let (l, x) = (lx[0], lx[1]);
        if l <= 0.0 || x < l {
            return Err(Error::InvalidConfig(format!(
                "eval-2d requires l > 0 and x >= l, got l={l}, x={x}"
            )));
        }
        let value = l * vf.value_at(x / l)?;
        summary["eval_2d"] = serde_json::json!({"l": l, "x": x, "value": value});
        println!("two-dimensional value at (l={l}, x={x}): {value:.6}");
    }

    mb.write(
        "policy.json",
        &serde_json::to_string_pretty(&summary).unwrap(),
    )
    .map_err(manifest_io)?;
    mb.finish().map_err(manifest_io)?;

    println!(
        "y_star = {:.4}, issuance_active = {}, y_post = {}",
        pol.y_star,
        pol.issuance_active,
        pol.y_post
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into())
    );
    if !checks.all_pass() {
        eprintln!("warning: policy verification checks failed: {checks:?}");
    }
    super::ok()
}
