use serde::{Deserialize, Serialize};

use super::{AnyonDistribution, FusionError, NORMALIZATION_TOL};

const ITERATION_TOL: f64 = 1e-14;
const ITERATION_CAP: usize = 100_000;

/// Strings from a set `S` acting on sectors from a separate set `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectFusionSystem {
    pub string_labels: Vec<String>,
    pub sector_labels: Vec<String>,
    /// `p_{s×b→a}` indexed `(s, b, a)`.
    p: Vec<f64>,
    pub q_star: Option<AnyonDistribution>,
    pub p_star: Option<AnyonDistribution>,
    pub residual: Option<f64>,
}

impl DefectFusionSystem {
    pub fn new(string_labels: Vec<String>, sector_labels: Vec<String>, p: Vec<f64>) -> Result<Self, FusionError> {
        let (ns, na) = (string_labels.len(), sector_labels.len());
        if ns == 0 || na == 0 || p.len() != ns * na * na {
            return Err(FusionError::MalformedInput(format!(
                "defect table has {} entries for {ns} strings and {na} sectors",
                p.len()
            )));
        }
        for s in 0..ns {
            for b in 0..na {
                let row = &p[(s * na + b) * na..(s * na + b + 1) * na];
                let sum: f64 = row.iter().sum();
                if row.iter().any(|x| *x < 0.0) || (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(FusionError::InvalidDistribution(format!(
                        "row ({}, {}) is not a distribution",
                        string_labels[s], sector_labels[b]
                    )));
                }
            }
        }
        Ok(Self { string_labels, sector_labels, p, q_star: None, p_star: None, residual: None })
    }

    /// `p_{s×b→a}`.
    pub fn get(&self, s: usize, b: usize, a: usize) -> f64 {
        let na = self.sector_labels.len();
        self.p[(s * na + b) * na + a]
    }

    pub fn with_string_distribution(mut self, q: AnyonDistribution) -> Result<Self, FusionError> {
        if q.len() != self.string_labels.len() {
            return Err(FusionError::MalformedInput("string distribution has the wrong length".into()));
        }
        self.q_star = Some(q);
        Ok(self)
    }

    fn induced(&self, q: &AnyonDistribution) -> Vec<f64> {
        let na = self.sector_labels.len();
        let mut m = vec![0.0; na * na];
        for b in 0..na {
            for a in 0..na {
                m[b * na + a] = q.probs().iter().enumerate().map(|(s, qs)| qs * self.get(s, b, a)).sum();
            }
        }
        m
    }

    /// `max_{a,b} |sum_s p_{s×b→a} q_s - p_a|`.
    pub fn identity_residual(&self, q: &AnyonDistribution, p: &AnyonDistribution) -> f64 {
        let na = self.sector_labels.len();
        let m = self.induced(q);
        let mut worst = 0.0f64;
        for b in 0..na {
            for a in 0..na {
                worst = worst.max((m[b * na + a] - p.probs()[a]).abs());
            }
        }
        worst
    }
}

/// Stationary sector distribution of the map induced by `q*` (uniform if unset).
pub fn defect_fixed_point(sys: &DefectFusionSystem) -> Result<DefectFusionSystem, FusionError> {
    let na = sys.sector_labels.len();
    let q = sys.q_star.clone().unwrap_or_else(|| AnyonDistribution::uniform(sys.string_labels.len()));
    let m = sys.induced(&q);
    if let Some(i) = m.iter().position(|x| *x <= 0.0) {
        return Err(FusionError::ConditionOneViolated { a: i / na, b: i % na });
    }
    let mut p = vec![1.0 / na as f64; na];
    let mut change = f64::INFINITY;
    let mut done = false;
    for _ in 0..ITERATION_CAP {
        let next: Vec<f64> = (0..na).map(|a| (0..na).map(|b| p[b] * m[b * na + a]).sum()).collect();
        change = next.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        p = next;
        if change < ITERATION_TOL {
            done = true;
            break;
        }
    }
    if !done {
        return Err(FusionError::NonConvergence { what: "defect fixed point", iterations: ITERATION_CAP, residual: change });
    }
    let p = AnyonDistribution::renormalized(p);
    let mut out = sys.clone();
    out.residual = Some(sys.identity_residual(&q, &p));
    out.q_star = Some(q);
    out.p_star = Some(p);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{bundled, closed_form_fixed_point, fusion_probabilities, quantum_dimensions};

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn toggling_strings_give_even_split() {
        // 1 and ε keep the sector, e and m swap σ+ and σ-.
        let mut p = vec![0.0; 4 * 2 * 2];
        for s in 0..4 {
            let toggle = s == 1 || s == 2;
            for b in 0..2 {
                let a = if toggle { 1 - b } else { b };
                p[(s * 2 + b) * 2 + a] = 1.0;
            }
        }
        let sys = DefectFusionSystem::new(labels(&["1", "e", "m", "eps"]), labels(&["s+", "s-"]), p).unwrap();
        let out = defect_fixed_point(&sys).unwrap();
        assert!(out.p_star.unwrap().sup_distance(&AnyonDistribution::uniform(2)) < 1e-15);
        assert!(out.residual.unwrap() < 1e-15);
    }

    fn same_set(name: &str) -> (DefectFusionSystem, AnyonDistribution) {
        let cat = bundled(name).unwrap();
        let dims = quantum_dimensions(&cat).unwrap();
        let fp = fusion_probabilities(&cat, &dims).unwrap();
        let r = cat.rank();
        let mut p = vec![0.0; r * r * r];
        for s in 0..r {
            for b in 0..r {
                for a in 0..r {
                    p[(s * r + b) * r + a] = fp.get(s, b, a);
                }
            }
        }
        let sys = DefectFusionSystem::new(cat.labels().to_vec(), cat.labels().to_vec(), p).unwrap();
        (sys, closed_form_fixed_point(&dims))
    }

    #[test]
    fn abelian_same_set_is_uniform() {
        let (sys, _) = same_set("z4");
        let out = defect_fixed_point(&sys).unwrap();
        assert!(out.p_star.unwrap().sup_distance(&AnyonDistribution::uniform(4)) < 1e-15);
    }

    #[test]
    fn ising_same_set_recovers_closed_form() {
        let (sys, closed) = same_set("ising");
        let out = defect_fixed_point(&sys.with_string_distribution(closed.clone()).unwrap()).unwrap();
        assert!(out.p_star.unwrap().sup_distance(&closed) < 1e-12);
        assert!(out.residual.unwrap() < 1e-12);
    }

    #[test]
    fn zero_entry_is_rejected() {
        let p = vec![1.0, 0.0, 0.0, 1.0];
        let sys = DefectFusionSystem::new(labels(&["1"]), labels(&["x", "y"]), p).unwrap();
        assert!(matches!(defect_fixed_point(&sys), Err(FusionError::ConditionOneViolated { a: 0, b: 1 })));
    }
}
