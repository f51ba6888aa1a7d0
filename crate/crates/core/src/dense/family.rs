use serde::{Deserialize, Serialize};

use super::{
    conditional_mutual_information, trace_distance, DenseError, DensityOperator, LocalOperator, Partition, Region,
};
use crate::check::Check;
use crate::fusion::{AnyonDistribution, FusionProbabilities};

const ORTHOGONALITY_TOL: f64 = 1e-10;
const INDISTINGUISHABILITY_TOL: f64 = 1e-10;
const FUSION_TOL: f64 = 1e-9;
const MIXTURE_TOL: f64 = 1e-9;

/// Labeled density operators on one common space.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorFamily {
    pub labels: Vec<String>,
    pub states: Vec<DensityOperator>,
    pub base: usize,
}

impl SectorFamily {
    pub fn new(labels: Vec<String>, states: Vec<DensityOperator>, base: usize) -> Result<Self, DenseError> {
        if labels.is_empty() || labels.len() != states.len() {
            return Err(DenseError::MalformedInput("labels and states differ in length".into()));
        }
        if base >= labels.len() {
            return Err(DenseError::MalformedInput(format!("base label index {base} out of range")));
        }
        if states.iter().any(|s| s.space() != states[0].space()) {
            return Err(DenseError::MalformedInput("family members live on different spaces".into()));
        }
        Ok(Self { labels, states, base })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn reductions(&self, part: &Partition, rs: &[Region]) -> Result<Vec<DensityOperator>, DenseError> {
        part.validate(self.states[0].space())?;
        let ids = part.union(rs);
        self.states.iter().map(|s| s.partial_trace(&ids)).collect()
    }
}

/// Pairwise `Tr(ρ^a_ABC ρ^b_ABC)` must vanish.
pub fn check_global_distinguishability(fam: &SectorFamily, part: &Partition) -> Result<Check, DenseError> {
    let red = fam.reductions(part, &[Region::A, Region::B, Region::C])?;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for a in 0..red.len() {
        for b in a + 1..red.len() {
            let o = red[a].overlap(&red[b])?.abs();
            worst = worst.max(o);
            if o >= ORTHOGONALITY_TOL {
                bad.push(format!("({},{})", fam.labels[a], fam.labels[b]));
            }
        }
    }
    let check = Check::defect("global distinguishability", worst, ORTHOGONALITY_TOL);
    Ok(if bad.is_empty() { check } else { check.with_detail(format!("overlapping pairs {}", bad.join(" "))) })
}

/// AB and BC reductions must agree across the family.
pub fn check_local_indistinguishability(fam: &SectorFamily, part: &Partition) -> Result<Check, DenseError> {
    let mut worst = 0.0f64;
    let mut witness = String::new();
    for (name, rs) in [("AB", [Region::A, Region::B]), ("BC", [Region::B, Region::C])] {
        let red = fam.reductions(part, &rs)?;
        for a in 0..red.len() {
            for b in a + 1..red.len() {
                let d = trace_distance(&red[a], &red[b])?;
                if d > worst {
                    worst = d;
                    witness = format!("{name} distance between {} and {}", fam.labels[a], fam.labels[b]);
                }
            }
        }
    }
    let check = Check::defect("local indistinguishability", worst, INDISTINGUISHABILITY_TOL);
    Ok(if check.ok() { check } else { check.with_detail(witness) })
}

/// Compares `(W ρ^a W†)_{A'BC}` with `sum_b p_{s×a→b} ρ^b_{A'BC}` for every sector `a`.
pub fn check_fusion_property(
    fam: &SectorFamily,
    part_full: &Partition,
    part_thinned: &Partition,
    w: &LocalOperator,
    s: usize,
    fp: &FusionProbabilities,
) -> Result<Check, DenseError> {
    for &f in &w.factors {
        if part_full.assignment.get(&f) != Some(&Region::A) {
            return Err(DenseError::SupportViolation(f));
        }
    }
    if fp.rank() != fam.len() {
        return Err(DenseError::MalformedInput("fusion table and family differ in size".into()));
    }
    part_thinned.validate(fam.states[0].space())?;
    let keep = part_thinned.union(&[Region::A, Region::B, Region::C]);
    let targets: Vec<DensityOperator> =
        fam.states.iter().map(|r| r.partial_trace(&keep)).collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    let mut witness = String::new();
    for (a, rho) in fam.states.iter().enumerate() {
        let moved = rho.conjugate(w)?.partial_trace(&keep)?;
        let weights: Vec<f64> = (0..fam.len()).map(|b| fp.get(s, a, b)).collect();
        let refs: Vec<&DensityOperator> = targets.iter().collect();
        let expected = DensityOperator::mixture(&weights, &refs)?;
        let d = trace_distance(&moved, &expected)?;
        if d > worst {
            worst = d;
            witness = format!("sector {}", fam.labels[a]);
        }
    }
    let check = Check::defect(format!("fusion with {}", fam.labels[s]), worst, FUSION_TOL);
    Ok(if check.ok() { check } else { check.with_detail(witness) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    /// `I(A:C|B)` of the mixture.
    pub mixture_cmi: f64,
    /// `sum_a p_a I_a - H(p)`.
    pub decomposed: f64,
    pub sector_cmi: Vec<f64>,
    pub shannon: f64,
    pub checks: Vec<Check>,
}

/// Evaluates both sides of the mixture identity for `λ = sum_a p_a ρ^a`.
pub fn mixture_cmi_decomposition(
    fam: &SectorFamily,
    part: &Partition,
    p: &AnyonDistribution,
) -> Result<MixtureReport, DenseError> {
    if p.len() != fam.len() {
        return Err(DenseError::MalformedInput("distribution and family differ in size".into()));
    }
    let p1 = check_global_distinguishability(fam, part)?;
    if !p1.ok() {
        return Err(DenseError::PremiseViolated(p1.to_string()));
    }
    let p2 = check_local_indistinguishability(fam, part)?;
    if !p2.ok() {
        return Err(DenseError::PremiseViolated(p2.to_string()));
    }
    let sector_cmi: Vec<f64> =
        fam.states.iter().map(|r| conditional_mutual_information(r, part)).collect::<Result<_, _>>()?;
    let refs: Vec<&DensityOperator> = fam.states.iter().collect();
    let lambda = DensityOperator::mixture(p.probs(), &refs)?;
    let mixture_cmi = conditional_mutual_information(&lambda, part)?;
    let shannon = p.shannon();
    let weighted: f64 = p.probs().iter().zip(&sector_cmi).map(|(w, i)| w * i).sum();
    let decomposed = weighted - shannon;
    let checks = vec![
        p1,
        p2,
        Check::defect("mixture decomposition", (mixture_cmi - decomposed).abs(), MIXTURE_TOL),
        Check::margin("mixture bound", decomposed, MIXTURE_TOL),
    ];
    Ok(MixtureReport { mixture_cmi, decomposed, sector_cmi, shannon, checks })
}
