//! `levctl reproduce-paper`: run the full reference battery and emit a
//! pass/fail comparison table against the published values.

use std::path::PathBuf;
use std::process::ExitCode;

use leverage_control::frontier::{distinct_frontier, optimize, sweep};
use leverage_control::model::{feasibility, mu_star};
use leverage_control::policy::{extract_policy, slope_barrier};
use leverage_control::reference as refs;
use leverage_control::sim::{simulate, SimConfig};
use leverage_control::solver::{solve_vi_with_options, SolverOptions, ValueFunction};
use leverage_control::{ModelParams, RegulatoryParams, Result, SweepSpec};

use crate::manifest::ManifestBuilder;

use super::manifest_io;

struct Row {
    section: &'static str,
    name: String,
    got: f64,
    want: f64,
    tol: f64,
    relative: bool,
}

impl Row {
    fn pass(&self) -> bool {
        let err = if self.relative {
            (self.got - self.want).abs() / self.want.abs()
        } else {
            (self.got - self.want).abs()
        };
        err <= self.tol
    }
}

fn solve_pair(reg: &RegulatoryParams) -> (ValueFunction<f64>, ValueFunction<f64>) {
    let p = refs::baseline_model::<f64>();
    let mut opts = SolverOptions::reference_profile(reg.leverage_capped);
    opts.allow_unbounded = true;
    let grid = SolverOptions::<f64>::reference_grid();
    (
        solve_vi_with_options(&p, reg, &grid, true, &opts).unwrap(),
        solve_vi_with_options(&p, reg, &grid, false, &opts).unwrap(),
    )
}

fn barrier_estimate(vf: &ValueFunction<f64>, p: &ModelParams, reg: &RegulatoryParams) -> f64 {
    if let Ok(pol) = extract_policy(vf, p, reg) {
        return pol.y_star;
    }
    let rho_l = p.rho - p.mu_l;
    let psi =
        |i: usize| rho_l * vf.v[i] + (p.mu_l - mu_star(vf.y[i], p, reg).unwrap()) * vf.y[i] - p.gamma;
    for i in 1..vf.n() {
        let (a, b) = (psi(i - 1), psi(i));
        if (a < 0.0) != (b < 0.0) {
            return vf.y[i - 1] + a / (a - b) * (vf.y[i] - vf.y[i - 1]);
        }
    }
    slope_barrier(vf).unwrap_or(f64::NAN)
}

pub fn run(out: PathBuf, paths: Option<usize>, seed: Option<u64>) -> Result<ExitCode> {
    let p = refs::baseline_model::<f64>();
    let n_paths = paths.unwrap_or(refs::N_PATHS);
    let seed = seed.unwrap_or(refs::DEFAULT_SEED);
    let mut rows: Vec<Row> = Vec::new();

    // Thresholds and values at the baseline.
    let reg0 = refs::baseline_regulatory::<f64>();
    let (vf, vb) = solve_pair(&reg0);
    let pol = extract_policy(&vf, &p, &reg0).unwrap();
    rows.push(Row {
        section: "baseline",
        name: "y_star".into(),
        got: pol.y_star,
        want: refs::BASELINE_Y_STAR,
        tol: 0.01,
        relative: false,
    });
    rows.push(Row {
        section: "baseline",
        name: "y_post".into(),
        got: pol.y_post.unwrap_or(f64::NAN),
        want: refs::BASELINE_Y_POST,
        tol: 0.01,
        relative: false,
    });
    let v12 = vf.value_at(refs::Y0).unwrap();
    rows.push(Row {
        section: "baseline",
        name: "v(1.2)".into(),
        got: v12,
        want: refs::BASELINE_V_Y0,
        tol: 0.01,
        relative: true,
    });
    rows.push(Row {
        section: "baseline",
        name: "dv/v(1.2)".into(),
        got: (v12 - vb.value_at(refs::Y0).unwrap()) / v12,
        want: refs::BASELINE_DVV,
        tol: 0.015,
        relative: true,
    });

    // Sensitivity panels.
    let mut panel = |label: &'static str, rows_ref: &[refs::SensitivityRow], mk: &dyn Fn(f64) -> RegulatoryParams| {
        for r in rows_ref {
            let reg = mk(r.value);
            let (vf, vb) = solve_pair(&reg);
            let v = vf.value_at(refs::Y0).unwrap();
            let dvv = (v - vb.value_at(refs::Y0).unwrap()) / v;
            rows.push(Row {
                section: label,
                name: format!("y*({})", r.value),
                got: barrier_estimate(&vf, &p, &reg),
                want: r.y_star,
                tol: 0.01,
                relative: true,
            });
            rows.push(Row {
                section: label,
                name: format!("dv/v({})", r.value),
                got: dvv,
                want: r.dvv,
                tol: 0.015,
                relative: true,
            });
        }
    };
    panel("a1 panel", &refs::SENSITIVITY_A1, &|v| RegulatoryParams::new(v, 0.05, 0.3));
    panel("a2 panel", &refs::SENSITIVITY_A2, &|v| RegulatoryParams::new(0.045, v, 0.3));
    panel("a3 panel", &refs::SENSITIVITY_A3, &|v| RegulatoryParams::new(0.045, 0.05, v));

    // Feasibility counts.
    let count = |capped: bool| {
        let mut n = 0usize;
        for &a1 in &refs::A1_GRID {
            for &a2 in &refs::A2_GRID {
                for &a3 in &refs::A3_GRID {
                    if feasibility(&p, &RegulatoryParams { a1, a2, a3, leverage_capped: capped }).feasible {
                        n += 1;
                    }
                }
            }
        }
        n as f64
    };
    rows.push(Row {
        section: "counts",
        name: "feasible uncapped".into(),
        got: count(false),
        want: refs::FEASIBLE_UNCAPPED as f64,
        tol: 0.0,
        relative: false,
    });
    rows.push(Row {
        section: "counts",
        name: "feasible capped".into(),
        got: count(true),
        want: refs::FEASIBLE_CAPPED as f64,
        tol: 0.0,
        relative: false,
    });

    // Frontier sweeps.
    let mut sweep_battery = |capped: bool, table: &[refs::FrontierRow], v_tol: f64| {
        let spec = SweepSpec {
            a1_grid: refs::A1_GRID.to_vec(),
            a2_grid: refs::A2_GRID.to_vec(),
            a3_grid: refs::A3_GRID.to_vec(),
            y0: refs::Y0,
            t: refs::SURVIVAL_HORIZON,
            n_paths,
            seed,
            leverage_capped: capped,
        };
        let points = sweep(&spec, &p).unwrap();
        let front = distinct_frontier(&points);
        let label: &'static str = if capped { "frontier capped" } else { "frontier uncapped" };
        rows.push(Row {
            section: label,
            name: "points".into(),
            got: front.len() as f64,
            want: table.len() as f64,
            tol: 0.0,
            relative: false,
        });
        for (got, want) in front.iter().zip(table.iter()) {
            rows.push(Row {
                section: label,
                name: format!("a1 at P~{:.3}", want.survival),
                got: got.a1,
                want: want.a1,
                tol: 0.0,
                relative: false,
            });
            rows.push(Row {
                section: label,
                name: format!("v at a1={}", want.a1),
                got: got.v_y0.unwrap_or(f64::NAN),
                want: want.v_y0,
                tol: v_tol,
                relative: true,
            });
            if !capped {
                rows.push(Row {
                    section: label,
                    name: format!("survival at a1={}", want.a1),
                    got: got.survival.unwrap_or(f64::NAN),
                    want: want.survival,
                    tol: 0.05,
                    relative: false,
                });
            }
        }
        if capped {
            let pick = optimize(&points, refs::PICK_CAPPED.eta);
            rows.push(Row {
                section: label,
                name: format!("pick a1 (eta={})", refs::PICK_CAPPED.eta),
                got: pick.map(|q| q.a1).unwrap_or(f64::NAN),
                want: refs::PICK_CAPPED.a1,
                tol: 0.0,
                relative: false,
            });
            rows.push(Row {
                section: label,
                name: format!("no pick at eta={}", refs::CAPPED_INFEASIBLE_ETA),
                got: optimize(&points, refs::CAPPED_INFEASIBLE_ETA).is_none() as u8 as f64,
                want: 1.0,
                tol: 0.0,
                relative: false,
            });
        } else {
            for pr in &refs::PICKS_UNCAPPED {
                let pick = optimize(&points, pr.eta);
                rows.push(Row {
                    section: label,
                    name: format!("pick a1 (eta={})", pr.eta),
                    got: pick.map(|q| q.a1).unwrap_or(f64::NAN),
                    want: pr.a1,
                    tol: 0.0,
                    relative: false,
                });
            }
        }
    };
    sweep_battery(false, &refs::FRONTIER_UNCAPPED, 0.01);
    sweep_battery(true, &refs::FRONTIER_CAPPED, 0.015);

    // Monte Carlo bank tables.
    let mut banks = |label: &'static str, reg: RegulatoryParams, table: &[refs::BankRow]| {
        let (vf, _) = solve_pair(&reg);
        let pol = extract_policy(&vf, &p, &reg).unwrap();
        for r in table {
            let mut cfg = SimConfig::new(r.y0, refs::BANK_HORIZON, n_paths, seed);
            cfg.survival_horizon = Some(refs::SURVIVAL_HORIZON);
            let stats = simulate(&pol, &p, &reg, &cfg).unwrap().stats;
            rows.push(Row {
                section: label,
                name: format!("E[dividend] y0={}", r.y0),
                got: stats.mean_total_dividend,
                want: r.dividend,
                tol: 0.10,
                relative: true,
            });
            rows.push(Row {
                section: label,
                name: format!("E[issuance] y0={}", r.y0),
                got: stats.mean_total_issuance,
                want: r.issuance,
                tol: 0.10,
                relative: true,
            });
            rows.push(Row {
                section: label,
                name: format!("sharpe y0={}", r.y0),
                got: stats.sharpe.unwrap_or(f64::NAN),
                want: r.sharpe,
                tol: 0.15,
                relative: true,
            });
        }
    };
    banks("banks uncapped", RegulatoryParams::new(0.1, 0.05, 0.3), &refs::BANKS_UNCAPPED);
    banks("banks capped", RegulatoryParams::capped(0.12, 0.05, 0.25), &refs::BANKS_CAPPED);

    // Emit the comparison table.
    let mut csv = String::from("section,name,got,reference,tolerance,relative,status\r\n");
    let mut failed = 0usize;
    println!("{:<18} {:<26} {:>12} {:>12} {:>9} {}", "section", "name", "got", "reference", "tol", "status");
    for row in &rows {
        let ok = row.pass();
        if !ok {
            failed += 1;
        }
        let status = if ok { "pass" } else { "MISS" };
        println!(
            "{:<18} {:<26} {:>12.4} {:>12.4} {:>9} {}",
            row.section,
            row.name,
            row.got,
            row.want,
            format!("{}{}", row.tol, if row.relative { "r" } else { "" }),
            status
        );
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{},{},{}\r\n",
            row.section, row.name, row.got, row.want, row.tol, row.relative, status
        ));
    }
    println!(
        "{} of {} comparisons within tolerance",
        rows.len() - failed,
        rows.len()
    );

    let mut mb = ManifestBuilder::new(
        "reproduce-paper",
        None,
        serde_json::json!({"paths": n_paths, "seed": seed}),
        Some(seed),
        &out,
    )
    .map_err(manifest_io)?;
    mb.write("comparison.csv", &csv).map_err(manifest_io)?;
    mb.finish().map_err(manifest_io)?;

    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
