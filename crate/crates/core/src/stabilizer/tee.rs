use serde::{Deserialize, Serialize};

use super::annulus::AnnulusPartition;
use super::sectors::{fusion_operator, FusionStringRule, SectorLabel};
use super::state::{RegionEntropy, RegionReducer, StabilizerState};
use super::StabilizerError;
use crate::audit::{AuditTrace, Provenance};
use crate::check::Check;
use crate::dense::Region;
use crate::fusion::{AnyonDistribution, FusionCategory, FusionProbabilities};

/// `I(A:C|B)` with the rank certificate of each term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmiCertificate {
    pub ab: RegionEntropy,
    pub bc: RegionEntropy,
    pub b: RegionEntropy,
    pub abc: RegionEntropy,
    /// `I = units · ln p`.
    pub units: i64,
}

impl CmiCertificate {
    pub fn nats(&self, p: u32) -> f64 {
        self.units as f64 * f64::from(p).ln()
    }
}

pub fn annulus_cmi(state: &StabilizerState, part: &AnnulusPartition) -> Result<CmiCertificate, StabilizerError> {
    if state.lattice() != &part.lattice {
        return Err(StabilizerError::Geometry("partition and state live on different lattices".into()));
    }
    part.validate()?;
    let s = |rs: &[Region]| state.region_entropy(&part.union(rs));
    let (ab, bc, b, abc) =
        (s(&[Region::A, Region::B]), s(&[Region::B, Region::C]), s(&[Region::B]), s(&[Region::A, Region::B, Region::C]));
    let units = ab.units as i64 + bc.units as i64 - b.units as i64 - abc.units as i64;
    Ok(CmiCertificate { ab, bc, b, abc, units })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: u8,
    pub sectors: (String, String),
    pub region: String,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub checks: Vec<Check>,
    pub violations: Vec<Violation>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }
}

fn count_check(name: &str, bad: &[Violation]) -> Check {
    let check = Check::defect(name, bad.len() as f64, 0.5);
    match bad.first() {
        Some(v) => check.with_detail(format!("{} vs {} on {}: {}", v.sectors.0, v.sectors.1, v.region, v.witness)),
        None => check,
    }
}

/// Exact checks of the three sector properties on the stabilizer family.
///
/// `states[i]` must be the sector with [`SectorLabel::index`] `i`, all on one lattice.
pub fn verify_assumptions(
    states: &[StabilizerState],
    part: &AnnulusPartition,
    rule: FusionStringRule,
) -> Result<AssumptionReport, StabilizerError> {
    let lat = part.lattice;
    let p = lat.p;
    let labels = SectorLabel::all(p);
    if states.len() != labels.len() || states.iter().any(|s| s.lattice() != &lat) {
        return Err(StabilizerError::InvalidSector(format!("expected {} states on the partition's lattice", labels.len())));
    }
    let name = |i: usize| labels[i].to_string();

    // Sector reductions on ABC are pairwise orthogonal.
    let abc = RegionReducer::new(&states[0], &part.union(&[Region::A, Region::B, Region::C]));
    let reduced: Vec<_> = states.iter().map(|s| abc.apply(s)).collect();
    let mut p1 = vec![];
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            if reduced[i].orthogonality_witness(&reduced[j], p).is_none() {
                p1.push(Violation {
                    property: 1,
                    sectors: (name(i), name(j)),
                    region: "ABC".into(),
                    witness: "no stabilizer with conflicting phases".into(),
                });
            }
        }
    }

    // Reductions on AB and BC do not depend on the sector.
    let mut p2 = vec![];
    for (tag, regions) in [("AB", [Region::A, Region::B]), ("BC", [Region::B, Region::C])] {
        let red = RegionReducer::new(&states[0], &part.union(&regions));
        let base = red.apply(&states[0]);
        for (i, st) in states.iter().enumerate().skip(1) {
            if let Some(w) = base.local_difference(&red.apply(st), &lat) {
                p2.push(Violation { property: 2, sectors: (name(0), name(i)), region: tag.into(), witness: w.describe(&lat) });
            }
        }
    }

    // (W_s ρ^a W_s†) on A′BC equals ρ^{s×a} on A′BC.
    let thin = part.thinned(1)?;
    let red = RegionReducer::new(&states[0], &thin.union(&[Region::A, Region::B, Region::C]));
    let targets: Vec<_> = states.iter().map(|s| red.apply(s)).collect();
    let mut p3 = vec![];
    for &s in &labels {
        let w = fusion_operator(part, s, rule)?;
        for (i, st) in states.iter().enumerate() {
            let b = s.fuse(&labels[i], p).index(p);
            if let Some(wit) = red.apply(&st.apply(&w)).local_difference(&targets[b], &lat) {
                p3.push(Violation {
                    property: 3,
                    sectors: (format!("{s} applied to {}", name(i)), name(b)),
                    region: "A'BC".into(),
                    witness: wit.describe(&lat),
                });
            }
        }
    }

    let checks = vec![
        count_check("global distinguishability", &p1),
        count_check("local indistinguishability", &p2),
        count_check("fusion", &p3),
    ];
    let violations = p1.into_iter().chain(p2).chain(p3).collect();
    Ok(AssumptionReport { checks, violations })
}

/// `Z_p × Z_p` fusion data and labels matching [`SectorLabel::index`].
pub fn sector_fusion_data(p: u32) -> (Vec<String>, FusionProbabilities) {
    let cat = FusionCategory::abelian_group(&[p, p]).expect("Z_p × Z_p is a valid category");
    let fp = FusionProbabilities::abelian(&cat).expect("Z_p × Z_p is Abelian");
    (cat.labels().to_vec(), fp)
}

/// `I_i^{(a)}` on `A_0 ⊂ ... ⊂ A_{n+1} = A`, where `A_i` is A thinned by `n + 1 - i`.
pub fn nested_annulus_table(
    states: &[StabilizerState],
    part: &AnnulusPartition,
    n: usize,
) -> Result<AuditTrace, StabilizerError> {
    let p = part.lattice.p;
    if states.len() != (p * p) as usize {
        return Err(StabilizerError::InvalidSector(format!("expected {} states", p * p)));
    }
    if part.thinned(n + 1).is_err() {
        return Err(StabilizerError::InsufficientWidth { width: part.width_a(), needed: part.thinning + n + 2, levels: n + 2 });
    }
    let mut cmi = Vec::with_capacity(n + 2);
    for i in 0..n + 2 {
        let level = part.thinned(n + 1 - i)?;
        let row = states.iter().map(|s| annulus_cmi(s, &level).map(|c| c.nats(p))).collect::<Result<Vec<_>, _>>()?;
        cmi.push(row);
    }
    let (labels, fp) = sector_fusion_data(p);
    AuditTrace::new(labels, cmi, fp, AnyonDistribution::uniform((p * p) as usize), 0, Provenance::StabilizerTee)
        .map_err(|e| StabilizerError::Geometry(e.to_string()))
}
