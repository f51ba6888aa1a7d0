use serde::{Deserialize, Serialize};

use super::{AuditError, FLOOR};
use crate::check::Check;
use crate::fusion::{AnyonDistribution, FusionProbabilities};
use crate::info::shannon;

/// `points` values evenly spaced on `[-p_min/2, p_min/2]`.
pub fn epsilon_grid(p_min: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    let h = p_min / 2.0;
    (0..points).map(|k| -h + p_min * k as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub evaluations: usize,
    pub checks: Vec<Check>,
}

impl TaylorReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }
}

/// Lower bound on `H(p) - sum_s p*_s H(p_{·,s})` for `p = p* + ε e_b - ε e_c`.
///
/// Reports three worst margins over all `(b, c, ε)`: the Taylor bound on `H(p)`,
/// the concavity bound and their combination.
pub fn taylor_bound_sweep(
    p_star: &AnyonDistribution,
    fp: &FusionProbabilities,
    grid: &[f64],
) -> Result<TaylorReport, AuditError> {
    let r = p_star.len();
    let ps = p_star.probs();
    let p_min = p_star.min();
    if let Some(&eps) = grid.iter().find(|e| e.abs() > p_min / 2.0 * (1.0 + 1e-12)) {
        return Err(AuditError::EpsilonOutOfRange { eps, limit: p_min / 2.0 });
    }
    let h_star = p_star.shannon();
    let mut taylor = Check::margin("taylor bound", f64::INFINITY, FLOOR);
    let mut concave = Check::margin("concavity bound", f64::INFINITY, FLOOR);
    let mut combined = Check::margin("entropy difference bound", f64::INFINITY, FLOOR);
    let mut evaluations = 0;
    let keep_worst = |slot: &mut Check, value: f64, where_: &dyn Fn() -> String| {
        if value < slot.value {
            *slot = Check::margin(slot.name.clone(), value, FLOOR).with_detail(where_());
        }
    };
    for b in 0..r {
        for c in 0..r {
            for &eps in grid {
                let mut p = ps.to_vec();
                p[b] += eps;
                p[c] -= eps;
                let p = p.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
                let h = shannon(&p);
                let dist = AnyonDistribution::renormalized(p);
                let averaged: f64 = (0..r).map(|s| ps[s] * fp.fuse_with(&dist, s).shannon()).sum();
                let first_order = eps * (ps[c] / ps[b]).ln() - 2.0 * eps * eps / p_min;
                let at = || format!("b = {b}, c = {c}, eps = {eps:.6}");
                keep_worst(&mut taylor, h - (h_star + first_order), &at);
                keep_worst(&mut concave, h_star - averaged, &at);
                keep_worst(&mut combined, h - averaged - first_order, &at);
                evaluations += 1;
            }
        }
    }
    Ok(TaylorReport { evaluations, checks: vec![taylor, concave, combined] })
}
