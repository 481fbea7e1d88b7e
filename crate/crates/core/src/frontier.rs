//! Regulator's outer optimization: sweep `(a1, a2, a3)` grids, evaluate
//! shareholder value and survival probability per feasible triple, extract
//! the Pareto frontier, and pick the value-maximizing triple under a
//! survival constraint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{feasibility, ModelParams, RegulatoryParams};
use crate::policy::extract_policy;
use crate::scalar::Real;
use crate::sim::survival_probability;
use crate::solver::{solve_vi_with_options, SolverOptions};

/// Sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec<T> {
    pub a1_grid: Vec<T>,
    pub a2_grid: Vec<T>,
    pub a3_grid: Vec<T>,
    /// Evaluation point for the value column.
    pub y0: T,
    /// Survival horizon in years.
    pub t: T,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub leverage_capped: bool,
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [
            ("a1_grid", &self.a1_grid),
            ("a2_grid", &self.a2_grid),
            ("a3_grid", &self.a3_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} is empty")));
            }
            if grid.iter().any(|&v| v <= T::zero() || v >= T::one()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} values must lie in (0,1)"
                )));
            }
        }
        if self.y0 < T::one() {
            return Err(Error::InvalidConfig(format!(
                "y0 must be >= 1, got {}",
                self.y0
            )));
        }
        if !(self.t > T::zero()) {
            return Err(Error::InvalidConfig(format!("t must be > 0, got {}", self.t)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
        }
        Ok(())
    }
}

/// Evaluation of one regulatory triple.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierPoint<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub feasible: bool,
    pub y_star: Option<T>,
    pub v_y0: Option<T>,
    pub survival: Option<T>,
    pub ci_half: Option<T>,
    pub on_frontier: bool,
    /// Dominance could flip within one confidence interval.
    pub fragile: bool,
    /// Index (into the sweep results) of a point dominating this one.
    pub dominated_by: Option<usize>,
    /// Solver failure for this triple, if any.
    pub error: Option<String>,
}

impl<T: Real> FrontierPoint<T> {
    fn evaluated(&self) -> Option<(T, T)> {
        match (self.v_y0, self.survival) {
            (Some(v), Some(s)) if self.feasible && self.error.is_none() => Some((v, s)),
            _ => None,
        }
    }
}

/// Evaluate every triple in the grids (in grid order, `a1` outermost).
///
/// Infeasible triples are recorded with `feasible = false`; per-triple
/// solver failures are recorded in `error` without aborting the sweep.
/// All triples share the same master seed, so the Monte Carlo draws are
/// common random numbers across triples.
pub fn sweep<T: Real>(spec: &SweepSpec<T>, p: &ModelParams<T>) -> Result<Vec<FrontierPoint<T>>> {
    spec.validate()?;
    p.validate()?;
    let mut triples = Vec::new();
    for &a1 in &spec.a1_grid {
        for &a2 in &spec.a2_grid {
            for &a3 in &spec.a3_grid {
                triples.push((a1, a2, a3));
            }
        }
    }
    let opts = SolverOptions::reference_profile(spec.leverage_capped);
    let grid = SolverOptions::<T>::reference_grid();

    let mut points: Vec<FrontierPoint<T>> = triples
        .into_par_iter()
        .map(|(a1, a2, a3)| {
            let reg = RegulatoryParams {
                a1,
                a2,
                a3,
                leverage_capped: spec.leverage_capped,
            };
            let mut point = FrontierPoint {
                a1,
                a2,
                a3,
                feasible: false,
                y_star: None,
                v_y0: None,
                survival: None,
                ci_half: None,
                on_frontier: false,
                fragile: false,
                dominated_by: None,
                error: None,
            };
            let report = feasibility(p, &reg);
            if !report.feasible {
                return point;
            }
            point.feasible = true;
            let run = || -> Result<(T, T, T, T)> {
                let vf = solve_vi_with_options(p, &reg, &grid, true, &opts)?;
                let pol = extract_policy(&vf, p, &reg)?;
                let v0 = vf.value_at(spec.y0)?;
                let (surv, ci) =
                    survival_probability(&pol, p, &reg, spec.y0, spec.t, spec.n_paths, spec.seed)?;
                Ok((pol.y_star, v0, surv, ci))
            };
            match run() {
                Ok((y_star, v0, surv, ci)) => {
                    point.y_star = Some(y_star);
                    point.v_y0 = Some(v0);
                    point.survival = Some(surv);
                    point.ci_half = Some(ci);
                }
                Err(e) => point.error = Some(e.to_string()),
            }
            point
        })
        .collect();

    pareto_filter(&mut points);
    Ok(points)
}

/// Mark non-dominated points under the partial order
/// `(survival, value)`; exact coordinate ties are all kept on the
/// frontier. Points whose dominance status could flip when survival
/// estimates move by one confidence interval are flagged `fragile`.
pub fn pareto_filter<T: Real>(points: &mut [FrontierPoint<T>]) {
    let coords: Vec<Option<(T, T)>> = points.iter().map(|p| p.evaluated()).collect();
    let dominates = |a: (T, T), b: (T, T)| -> bool {
        // a dominates b
        a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
    };
    for i in 0..points.len() {
        let Some(ci) = coords[i] else {
            points[i].on_frontier = false;
            continue;
        };
        let mut dominated_by = None;
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            if let Some(cj) = coords[j] {
                if dominates(cj, ci) {
                    dominated_by = Some(j);
                    break;
                }
            }
        }
        points[i].on_frontier = dominated_by.is_none();
        points[i].dominated_by = dominated_by;
    }
    // Fragility: redo dominance with survival bands widened by the joint
    // confidence interval and flag points whose membership changes.
    for i in 0..points.len() {
        let Some((vi, si)) = coords[i] else {
            continue;
        };
        let ci_i = points[i].ci_half.unwrap_or(T::zero());
        let mut flipped = false;
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            let Some((vj, sj)) = coords[j] else { continue };
            let ci_j = points[j].ci_half.unwrap_or(T::zero());
            let band = ci_i + ci_j;
            let dominated_now = dominates((vj, sj), (vi, si));
            let dominated_shifted = vj >= vi && sj + band >= si && (vj > vi || sj + band > si);
            let dominated_shifted_down =
                vj >= vi && sj - band >= si && (vj > vi || sj - band > si);
            if dominated_now != dominated_shifted || dominated_now != dominated_shifted_down {
                flipped = true;
                break;
            }
        }
        points[i].fragile = flipped;
    }
}

/// Frontier points deduplicated by exact `(value, survival)` coordinates
/// (capped sweeps produce many coordinate ties because the liquidity
/// parameters stop binding), sorted by decreasing survival. The
/// representative of each coordinate class is the lexicographically
/// smallest triple.
pub fn distinct_frontier<'a, T: Real>(points: &'a [FrontierPoint<T>]) -> Vec<&'a FrontierPoint<T>> {
    let mut reps: Vec<&FrontierPoint<T>> = Vec::new();
    for p in points.iter().filter(|p| p.on_frontier) {
        let Some(cp) = p.evaluated() else { continue };
        match reps.iter_mut().find(|r| {
            r.evaluated()
                .map(|cr| cr.0 == cp.0 && cr.1 == cp.1)
                .unwrap_or(false)
        }) {
            Some(slot) => {
                let lex = |q: &FrontierPoint<T>| (q.a1, q.a2, q.a3);
                if lex(p) < lex(slot) {
                    *slot = p;
                }
            }
            None => reps.push(p),
        }
    }
    reps.sort_by(|a, b| {
        let sa = a.survival.unwrap();
        let sb = b.survival.unwrap();
        sb.partial_cmp(&sa).unwrap()
    });
    reps
}

/// Among evaluated points with `survival >= eta`, the one maximizing the
/// value; ties broken by higher survival, then by the lexicographically
/// smallest triple. `None` when no point meets the constraint.
pub fn optimize<T: Real>(points: &[FrontierPoint<T>], eta: T) -> Option<&FrontierPoint<T>> {
    points
        .iter()
        .filter(|p| p.evaluated().map(|(_, s)| s >= eta).unwrap_or(false))
        .max_by(|a, b| {
            let (va, sa) = a.evaluated().unwrap();
            let (vb, sb) = b.evaluated().unwrap();
            va.partial_cmp(&vb)
                .unwrap()
                .then(sa.partial_cmp(&sb).unwrap())
                // prefer the lexicographically smallest triple on ties
                .then_with(|| {
                    (b.a1, b.a2, b.a3)
                        .partial_cmp(&(a.a1, a.a2, a.a3))
                        .unwrap()
                })
        })
}

/// Sweep results as CSV,
/// `a1,a2,a3,feasible,y_star,v_y0,survival,ci_half,on_frontier,fragile`.
pub fn sweep_csv<T: Real>(points: &[FrontierPoint<T>]) -> String {
    let mut out =
        String::from("a1,a2,a3,feasible,y_star,v_y0,survival,ci_half,on_frontier,fragile\r\n");
    let fmt = |x: Option<T>| x.map(|v| format!("{:.11e}", v.as_f64())).unwrap_or_default();
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\r\n",
            p.a1,
            p.a2,
            p.a3,
            p.feasible,
            fmt(p.y_star),
            fmt(p.v_y0),
            fmt(p.survival),
            fmt(p.ci_half),
            p.on_frontier,
            p.fragile,
        ));
    }
    out
}

/// Plot data (survival vs value) for external plotting.
pub fn plot_csv<T: Real>(points: &[FrontierPoint<T>]) -> String {
    let mut out = String::from("survival,v_y0,a1,a2,a3,on_frontier\r\n");
    for p in points {
        if let Some((v, s)) = p.evaluated() {
            out.push_str(&format!(
                "{:.11e},{:.11e},{},{},{},{}\r\n",
                s.as_f64(),
                v.as_f64(),
                p.a1,
                p.a2,
                p.a3,
                p.on_frontier
            ));
        }
    }
    out
}
