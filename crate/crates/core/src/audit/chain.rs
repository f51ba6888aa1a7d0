use serde::{Deserialize, Serialize};

use super::{AuditError, AuditTrace, FLOOR};
use crate::check::{Check, Status};
use crate::fusion::{bound_constant, AnyonDistribution};

/// `ε = p_min / (2 sqrt(n))`.
pub fn default_epsilon(p_min: f64, n: usize) -> f64 {
    p_min / (2.0 * (n as f64).sqrt())
}

/// `α = 1 / (n p_min ε + 1)`, the choice that cancels every `δ_i`.
pub fn default_alpha(p_min: f64, n: usize, eps: f64) -> f64 {
    1.0 / (n as f64 * p_min * eps + 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub a0: String,
    pub epsilon: f64,
    pub alpha: f64,
    pub p_min: f64,
    pub k: f64,
    /// `δ_i^{(a0)}` for `i = 0..n`.
    pub delta: Vec<f64>,
    /// The α-combination of the endpoint and per-level bounds.
    pub combined_bound: f64,
    /// `ln(1/p*_{a0}) - K / sqrt(n)`.
    pub final_bound: f64,
    /// `I_{n+1}^{(a0)}`.
    pub observed: f64,
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        crate::check::first_failure(&self.checks)
    }

    pub fn final_margin(&self) -> f64 {
        self.observed - self.final_bound
    }
}

fn level(trace: &AuditTrace, i: usize) -> Result<&[f64], AuditError> {
    trace.cmi.get(i).map(Vec::as_slice).ok_or(AuditError::LevelOutOfRange(i))
}

fn dot(p: &[f64], x: &[f64]) -> f64 {
    p.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `sum_a p_a I_i^{(a)} - H(p)`.
pub fn check_paia(trace: &AuditTrace, i: usize, p: &AnyonDistribution) -> Result<Check, AuditError> {
    let row = level(trace, i)?;
    Ok(Check::margin("mixture bound", dot(p.probs(), row) - p.shannon(), FLOOR).with_detail(format!("level {i}")))
}

/// Fusion inequality between levels `i+1` and `i` for distribution `p` and string `s`.
pub fn check_fusion_step(trace: &AuditTrace, i: usize, p: &AnyonDistribution, s: usize) -> Result<Check, AuditError> {
    let outer = level(trace, i + 1)?;
    let inner = level(trace, i)?;
    let ps = trace.fp.fuse_with(p, s);
    let lhs = dot(p.probs(), outer) - p.shannon();
    let rhs = dot(ps.probs(), inner) - ps.shannon();
    Ok(Check::margin("fusion step", lhs - rhs, FLOOR)
        .with_detail(format!("levels {i}->{}, s = {}", i + 1, trace.labels[s])))
}

/// Perturbed fusion inequality at `ε` for the pair `(b, c)`.
pub fn check_cor3(trace: &AuditTrace, i: usize, b: usize, c: usize, eps: f64) -> Result<Check, AuditError> {
    let p_min = trace.p_star.min();
    if eps.abs() > p_min / 2.0 {
        return Err(AuditError::EpsilonOutOfRange { eps, limit: p_min / 2.0 });
    }
    let outer = level(trace, i + 1)?;
    let inner = level(trace, i)?;
    let ps = trace.p_star.probs();
    let lhs: f64 = (0..trace.rank()).map(|a| ps[a] * (outer[a] - inner[a])).sum();
    let rhs = eps * p_min * (inner[c] - inner[b] + (ps[c] / ps[b]).ln()) - 2.0 * eps * eps;
    Ok(Check::margin("perturbed fusion", lhs - rhs, FLOOR)
        .with_detail(format!("level {i}, b = {}, c = {}", trace.labels[b], trace.labels[c])))
}

/// `δ_i^{(b)} = sum_a p*_a [I_i^a - I_i^b + ln(p*_a / p*_b)]`.
pub fn delta(trace: &AuditTrace, i: usize, b: usize) -> f64 {
    let ps = trace.p_star.probs();
    let row = &trace.cmi[i];
    (0..trace.rank()).map(|a| ps[a] * (row[a] - row[b] + (ps[a] / ps[b]).ln())).sum()
}

/// Worst check over many cells; keeps the detail of the worst one.
fn worst(name: &str, cells: impl IntoIterator<Item = Check>) -> Check {
    let mut out: Option<Check> = None;
    for c in cells {
        if out.as_ref().is_none_or(|o| c.value < o.value) {
            out = Some(c);
        }
    }
    let mut c = out.unwrap_or_else(|| Check::skipped(name, "no cells"));
    c.name = name.to_string();
    c
}

/// Runs every check in dependency order. After the first failure the rest are
/// recorded as not evaluated.
pub fn audit_trace(trace: &AuditTrace, opts: &AuditOptions) -> Result<AuditReport, AuditError> {
    let n = trace.n();
    let r = trace.rank();
    let ps = trace.p_star.probs();
    let p_min = trace.p_star.min();
    let k = bound_constant(&trace.p_star, r).map_err(|e| AuditError::MalformedTrace(e.to_string()))?;
    let eps = opts.epsilon.unwrap_or_else(|| default_epsilon(p_min, n));
    if eps.abs() > p_min / 2.0 {
        return Err(AuditError::EpsilonOutOfRange { eps, limit: p_min / 2.0 });
    }
    let alpha = opts.alpha.unwrap_or_else(|| default_alpha(p_min, n, eps));
    let b = trace.a0;
    let levels = 0..n + 2;
    let steps = 0..n + 1;
    let uniform = AnyonDistribution::uniform(r);

    let mut checks: Vec<Check> = Vec::new();

    let neg = trace.cmi.iter().enumerate().flat_map(|(i, row)| {
        row.iter().enumerate().map(move |(a, x)| {
            Check::margin("nonnegativity", *x, FLOOR).with_detail(format!("level {i}, label {a}"))
        })
    });
    checks.push(worst("nonnegativity", neg));

    let mut cells = Vec::new();
    for i in levels.clone() {
        cells.push(check_paia(trace, i, &trace.p_star)?);
        cells.push(check_paia(trace, i, &uniform)?);
    }
    checks.push(worst("mixture bound", cells));

    let mut cells = Vec::new();
    for i in steps.clone() {
        for a in 0..r {
            cells.push(
                Check::margin("monotonicity", trace.at(i + 1, a) - trace.at(i, a), FLOOR)
                    .with_detail(format!("level {i}->{}, label {}", i + 1, trace.labels[a])),
            );
        }
    }
    checks.push(worst("monotonicity", cells));

    let mut cells = Vec::new();
    for i in steps.clone() {
        let avg = dot(ps, &trace.cmi[i]) - (r as f64).ln();
        for a in 0..r {
            cells.push(
                Check::margin("averaged fusion", trace.at(i + 1, a) - avg, FLOOR)
                    .with_detail(format!("level {i}->{}, label {}", i + 1, trace.labels[a])),
            );
        }
    }
    checks.push(worst("averaged fusion", cells));

    let mut cells = Vec::new();
    for i in steps.clone() {
        for s in 0..r {
            cells.push(check_fusion_step(trace, i, &trace.p_star, s)?);
            cells.push(check_fusion_step(trace, i, &uniform, s)?);
            for a in 0..r {
                cells.push(check_fusion_step(trace, i, &AnyonDistribution::point(r, a), s)?);
            }
        }
    }
    checks.push(worst("fusion step", cells));

    let mut cells = Vec::new();
    for i in steps.clone() {
        for c in 0..r {
            cells.push(check_cor3(trace, i, b, c, eps)?);
        }
    }
    checks.push(worst("perturbed fusion", cells));

    // Everything below is assembled for b = a0.
    let deltas: Vec<f64> = (0..n).map(|i| delta(trace, i, b)).collect();
    let step_terms: Vec<f64> = deltas.iter().map(|d| eps * p_min * d - 2.0 * eps * eps).collect();
    let summed: f64 = step_terms.iter().sum();

    let cells = (0..n).map(|i| {
        let lhs: f64 = (0..r).map(|a| ps[a] * (trace.at(i + 1, a) - trace.at(i, a))).sum();
        Check::margin("averaged perturbation", lhs - step_terms[i], FLOOR).with_detail(format!("level {i}"))
    });
    checks.push(worst("averaged perturbation", cells));

    checks.push(Check::margin("summed perturbation", dot(ps, &trace.cmi[n]) - summed, FLOOR));

    let observed = trace.at(n + 1, b);
    let ln_r = (r as f64).ln();
    checks.push(Check::margin("endpoint bound", observed - (summed - ln_r), FLOOR));

    let inv_pb = (1.0 / ps[b]).ln();
    let cells = (0..n).map(|i| {
        Check::margin("per-level bound", observed - (inv_pb - deltas[i]), FLOOR).with_detail(format!("level {i}"))
    });
    checks.push(worst("per-level bound", cells));

    let combined = alpha * (summed - ln_r) + (1.0 - alpha) / n as f64 * deltas.iter().map(|d| inv_pb - d).sum::<f64>();
    checks.push(Check::margin("combined bound", observed - combined, FLOOR));
    if opts.alpha.is_none() {
        let closed = inv_pb - alpha * (2.0 * n as f64 * eps * eps + (r as f64 / ps[b]).ln());
        checks.push(Check::defect("delta cancellation", (combined - closed).abs(), 1e-12));
    }

    let final_bound = inv_pb - k / (n as f64).sqrt();
    if opts.epsilon.is_none() && opts.alpha.is_none() {
        checks.push(Check::margin("constant relaxation", combined - final_bound, FLOOR));
    }
    checks.push(Check::margin("final bound", observed - final_bound, FLOOR));

    if let Some(pos) = checks.iter().position(|c| c.status == Status::Fail) {
        let lemma = checks[pos].name.clone();
        for c in checks.iter_mut().skip(pos + 1) {
            *c = Check::skipped(c.name.clone(), format!("depends on {lemma}"));
        }
    }

    Ok(AuditReport {
        n,
        a0: trace.labels[b].clone(),
        epsilon: eps,
        alpha,
        p_min,
        k,
        delta: deltas,
        combined_bound: combined,
        final_bound,
        observed,
        checks,
    })
}

/// Default audit; a failed check becomes `PremiseViolated` naming it.
pub fn assemble_bound(trace: &AuditTrace) -> Result<AuditReport, AuditError> {
    let report = audit_trace(trace, &AuditOptions::default())?;
    if let Some(f) = report.first_failure() {
        return Err(AuditError::PremiseViolated { lemma: f.name.clone(), detail: f.detail.clone() });
    }
    Ok(report)
}
