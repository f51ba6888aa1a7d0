use serde::{Deserialize, Serialize};

use super::{FusionCategory, FusionError};

/// Tolerance on `sum p = 1` for an [`AnyonDistribution`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

const POWER_ITERATION_CAP: usize = 100_000;

/// Quantum dimensions `d_a` and the total dimension `sqrt(sum d_a^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumDims {
    pub d: Vec<f64>,
    pub total: f64,
}

impl QuantumDims {
    pub fn total_squared(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum()
    }
}

/// Perron eigenvector of `I + sum_a N_a`, normalized so the unit has dimension 1.
///
/// Every `N_a` shares this positive eigenvector, so `d_a` is read off as the
/// eigenvalue of `N_a` on it, which is the spectral radius of `N_a`.
pub fn quantum_dimensions(cat: &FusionCategory) -> Result<QuantumDims, FusionError> {
    let r = cat.rank();
    // t[b][c] = delta_bc + sum_a N^{ab}_c
    let mut t = vec![0.0f64; r * r];
    for b in 0..r {
        t[b * r + b] += 1.0;
        for a in 0..r {
            for c in 0..r {
                t[b * r + c] += f64::from(cat.n(a, b, c));
            }
        }
    }
    let mut v = vec![1.0f64; r];
    let mut next = vec![0.0f64; r];
    let mut converged = false;
    let mut change = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        for b in 0..r {
            next[b] = (0..r).map(|c| t[b * r + c] * v[c]).sum();
        }
        let norm = next[0];
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        change = 0.0;
        for b in 0..r {
            let x = next[b] / norm;
            change = f64::max(change, (x - v[b]).abs() / x.abs().max(1.0));
            v[b] = x;
        }
        if change < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(FusionError::NonConvergence {
            what: "quantum dimension power iteration",
            iterations: POWER_ITERATION_CAP,
            residual: change,
        });
    }
    // Read d_a as the eigenvalue of N_a on v, then check the product rule.
    let d: Vec<f64> = (0..r)
        .map(|a| (0..r).map(|c| f64::from(cat.n(a, 0, c)) * v[c]).sum::<f64>())
        .collect();
    let mut worst = 0.0f64;
    for a in 0..r {
        for b in 0..r {
            let lhs: f64 = (0..r).map(|c| f64::from(cat.n(a, b, c)) * d[c]).sum();
            worst = worst.max((lhs - d[a] * d[b]).abs());
        }
    }
    if worst > 1e-10 {
        return Err(FusionError::NonConvergence {
            what: "quantum dimension product rule",
            iterations: POWER_ITERATION_CAP,
            residual: worst,
        });
    }
    let total = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(QuantumDims { d, total })
}

/// Fusion probabilities `p_{s×a→b}` indexed `(s, a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionProbabilities {
    rank: usize,
    p: Vec<f64>,
}

impl FusionProbabilities {
    /// Wrap a raw table; checks shape, range and row normalization.
    pub fn from_table(rank: usize, p: Vec<f64>) -> Result<Self, FusionError> {
        if p.len() != rank * rank * rank {
            return Err(FusionError::MalformedInput(format!(
                "fusion probability table has {} entries, expected {}",
                p.len(),
                rank * rank * rank
            )));
        }
        if let Some(x) = p.iter().find(|x| !(0.0..=1.0 + NORMALIZATION_TOL).contains(*x)) {
            return Err(FusionError::InvalidDistribution(format!(
                "fusion probability {x} outside [0, 1]"
            )));
        }
        let fp = Self { rank, p };
        let worst = fp.row_sum_defect();
        if worst > NORMALIZATION_TOL {
            return Err(FusionError::InvalidDistribution(format!(
                "fusion probability rows deviate from 1 by {worst:e}"
            )));
        }
        Ok(fp)
    }

    /// Nested `[s][a][b]` view, convenient for JSON.
    pub fn from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Self, FusionError> {
        let r = nested.len();
        let mut p = Vec::with_capacity(r * r * r);
        for row in nested {
            if row.len() != r || row.iter().any(|x| x.len() != r) {
                return Err(FusionError::MalformedInput("fusion probabilities are not cubic".into()));
            }
            for x in row {
                p.extend_from_slice(x);
            }
        }
        Self::from_table(r, p)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let r = self.rank;
        (0..r).map(|s| (0..r).map(|a| (0..r).map(|b| self.get(s, a, b)).collect()).collect()).collect()
    }

    /// Deterministic group-law probabilities for an Abelian category.
    pub fn abelian(cat: &FusionCategory) -> Result<Self, FusionError> {
        if !cat.is_abelian() {
            return Err(FusionError::InvalidCategory(format!("`{}` is not Abelian", cat.name())));
        }
        let r = cat.rank();
        let mut p = vec![0.0; r * r * r];
        for s in 0..r {
            for a in 0..r {
                for b in 0..r {
                    p[(s * r + a) * r + b] = f64::from(cat.n(s, a, b));
                }
            }
        }
        Self::from_table(r, p)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `p_{s×a→b}`.
    #[inline]
    pub fn get(&self, s: usize, a: usize, b: usize) -> f64 {
        self.p[(s * self.rank + a) * self.rank + b]
    }

    pub fn row_sum_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst = 0.0f64;
        for s in 0..r {
            for a in 0..r {
                let sum: f64 = (0..r).map(|b| self.get(s, a, b)).sum();
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// Largest violation of `sum_u p_{s×t→u} p_{u×a→c} = sum_b p_{t×a→b} p_{s×b→c}`.
    pub fn associativity_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst = 0.0f64;
        for s in 0..r {
            for t in 0..r {
                for a in 0..r {
                    for c in 0..r {
                        let lhs: f64 = (0..r).map(|u| self.get(s, t, u) * self.get(u, a, c)).sum();
                        let rhs: f64 = (0..r).map(|b| self.get(t, a, b) * self.get(s, b, c)).sum();
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }

    /// The averaged transition matrix `M_{ab} = sum_s w_s p_{s×a→b}`, row-major.
    pub fn averaged_matrix(&self, weights: &AnyonDistribution) -> Vec<f64> {
        let r = self.rank;
        let w = weights.probs();
        let mut m = vec![0.0; r * r];
        for a in 0..r {
            for b in 0..r {
                m[a * r + b] = (0..r).map(|s| w[s] * self.get(s, a, b)).sum();
            }
        }
        m
    }

    /// Push `p` through fusion with a fixed `s`: `p_{a,s} = sum_b p_b p_{s×b→a}`.
    pub fn fuse_with(&self, p: &AnyonDistribution, s: usize) -> AnyonDistribution {
        let r = self.rank;
        let pb = p.probs();
        let out = (0..r).map(|a| (0..r).map(|b| pb[b] * self.get(s, b, a)).sum()).collect();
        AnyonDistribution::renormalized(out)
    }
}

/// `p_{s×a→b} = d_b N^{sa}_b / (d_s d_a)`.
pub fn fusion_probabilities(
    cat: &FusionCategory,
    dims: &QuantumDims,
) -> Result<FusionProbabilities, FusionError> {
    let r = cat.rank();
    if dims.d.len() != r {
        return Err(FusionError::MalformedInput(format!(
            "{} dimensions for a rank-{r} category",
            dims.d.len()
        )));
    }
    let d = &dims.d;
    let mut p = vec![0.0; r * r * r];
    for s in 0..r {
        for a in 0..r {
            for b in 0..r {
                p[(s * r + a) * r + b] = d[b] * f64::from(cat.n(s, a, b)) / (d[s] * d[a]);
            }
        }
    }
    FusionProbabilities::from_table(r, p)
}

/// Probability distribution on anyon labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AnyonDistribution(Vec<f64>);

impl AnyonDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, FusionError> {
        if probs.is_empty() {
            return Err(FusionError::InvalidDistribution("empty distribution".into()));
        }
        if let Some((i, x)) = probs.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(FusionError::InvalidDistribution(format!("entry {i} is {x}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(FusionError::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Divide by the sum; used for results of exact-in-principle arithmetic.
    pub(crate) fn renormalized(mut probs: Vec<f64>) -> Self {
        let sum: f64 = probs.iter().sum();
        for x in &mut probs {
            *x = (*x / sum).max(0.0);
        }
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn shannon(&self) -> f64 {
        crate::info::shannon(&self.0)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for AnyonDistribution {
    type Error = FusionError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<AnyonDistribution> for Vec<f64> {
    fn from(d: AnyonDistribution) -> Self {
        d.0
    }
}

/// `(p ∗ q)_b = sum_{s,a} p_{s×a→b} p_s q_a`.
pub fn star(
    p: &AnyonDistribution,
    q: &AnyonDistribution,
    fp: &FusionProbabilities,
) -> AnyonDistribution {
    let r = fp.rank();
    let mut out = vec![0.0; r];
    for (s, &ps) in p.probs().iter().enumerate() {
        if ps == 0.0 {
            continue;
        }
        for (a, &qa) in q.probs().iter().enumerate() {
            let w = ps * qa;
            if w == 0.0 {
                continue;
            }
            for (b, o) in out.iter_mut().enumerate() {
                *o += w * fp.get(s, a, b);
            }
        }
    }
    AnyonDistribution::renormalized(out)
}
