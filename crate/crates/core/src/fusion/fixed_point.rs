use serde::{Deserialize, Serialize};

use super::{star, AnyonDistribution, FusionError, FusionProbabilities, QuantumDims};

/// Sup-norm change below which the fixed-point iteration stops.
pub const ITERATION_TOL: f64 = 1e-14;
/// Iteration cap for the fixed-point search.
pub const ITERATION_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub p_star: AnyonDistribution,
    pub p_min: f64,
    pub iterations: usize,
    /// Sup-norm defect of `sum_s p_{s×a→b} p*_s = p*_b`.
    pub residual: f64,
}

/// Residual of the fixed-point identity with its worst `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub max: f64,
    pub a: usize,
    pub b: usize,
}

/// Checks that `M_{ab} = sum_s p_{s×a→b} / |A|` has no zero entry.
pub fn check_condition_one(fp: &FusionProbabilities) -> Result<(), FusionError> {
    let r = fp.rank();
    let m = fp.averaged_matrix(&AnyonDistribution::uniform(r));
    for a in 0..r {
        for b in 0..r {
            if m[a * r + b] <= 0.0 {
                return Err(FusionError::ConditionOneViolated { a, b });
            }
        }
    }
    Ok(())
}

/// Iterate `q <- uniform ∗ q` from the uniform distribution.
pub fn fixed_point_iterative(fp: &FusionProbabilities) -> Result<FixedPoint, FusionError> {
    check_condition_one(fp)?;
    let u = AnyonDistribution::uniform(fp.rank());
    let (q, iterations) = iterate_from(fp, &u, u.clone())?;
    let residual = verify_fixed_point_identity(fp, &q).max;
    Ok(FixedPoint { p_min: q.min(), p_star: q, iterations, residual })
}

/// Same iteration from an arbitrary start; used to probe uniqueness.
pub fn fixed_point_from(
    fp: &FusionProbabilities,
    start: AnyonDistribution,
) -> Result<AnyonDistribution, FusionError> {
    check_condition_one(fp)?;
    let u = AnyonDistribution::uniform(fp.rank());
    iterate_from(fp, &u, start).map(|(q, _)| q)
}

fn iterate_from(
    fp: &FusionProbabilities,
    driver: &AnyonDistribution,
    mut q: AnyonDistribution,
) -> Result<(AnyonDistribution, usize), FusionError> {
    let mut change = f64::INFINITY;
    for it in 1..=ITERATION_CAP {
        let next = star(driver, &q, fp);
        change = next.sup_distance(&q);
        q = next;
        if change < ITERATION_TOL {
            return Ok((q, it));
        }
    }
    Err(FusionError::NonConvergence { what: "fixed-point iteration", iterations: ITERATION_CAP, residual: change })
}

/// `p*_a = d_a^2 / D^2`.
pub fn closed_form_fixed_point(dims: &QuantumDims) -> AnyonDistribution {
    let total = dims.total_squared();
    AnyonDistribution::renormalized(dims.d.iter().map(|d| d * d / total).collect())
}

/// `max_{a,b} |sum_s p_{s×a→b} p*_s - p*_b|`.
pub fn verify_fixed_point_identity(fp: &FusionProbabilities, p_star: &AnyonDistribution) -> IdentityResidual {
    let r = fp.rank();
    let m = fp.averaged_matrix(p_star);
    let ps = p_star.probs();
    let mut out = IdentityResidual { max: 0.0, a: 0, b: 0 };
    for a in 0..r {
        for b in 0..r {
            let dev = (m[a * r + b] - ps[b]).abs();
            if dev > out.max {
                out = IdentityResidual { max: dev, a, b };
            }
        }
    }
    out
}

/// `K = 1 + (2 / p_min^2) ln(|A| / p_min)`.
pub fn bound_constant(p_star: &AnyonDistribution, set_size: usize) -> Result<f64, FusionError> {
    let p_min = positive_min(p_star)?;
    Ok(1.0 + 2.0 / (p_min * p_min) * (set_size as f64 / p_min).ln())
}

/// `ln(1/p*_{a0}) - K / sqrt(n)`.
pub fn tee_lower_bound(a0: usize, p_star: &AnyonDistribution, n: u64, k: f64) -> Result<f64, FusionError> {
    if n == 0 {
        return Err(FusionError::MalformedInput("number of thinning levels must be at least 1".into()));
    }
    positive_min(p_star)?;
    let pa = *p_star
        .probs()
        .get(a0)
        .ok_or_else(|| FusionError::MalformedInput(format!("label index {a0} out of range")))?;
    Ok((1.0 / pa).ln() - k / (n as f64).sqrt())
}

fn positive_min(p: &AnyonDistribution) -> Result<f64, FusionError> {
    match p.probs().iter().position(|x| *x <= 0.0) {
        Some(label) => Err(FusionError::DegenerateDistribution { label }),
        None => Ok(p.min()),
    }
}
