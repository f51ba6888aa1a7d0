//! Classical constrained-ring sector families with entropies computed by counting.
//!
//! Sites are arranged in cyclic order A, B1, C, B2. The A arc is a radial stack
//! of `sites_a` sites that all carry one shared value, so thinning A from the
//! outside keeps the loop closed. The remaining sites each carry an independent
//! value. In sector `a` the state is uniform over configurations whose loop
//! values (the shared A value plus every B1, C, B2 value) sum to `a` mod `q`.
//!
//! Site ids: A sites are `0..sites_a` with id equal to radial depth (0 is next
//! to the hole), followed by B1, C and B2.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{AuditTrace, Provenance};
use crate::check::Check;
use crate::dense::{DenseError, DensityOperator, FactorSpace, LocalOperator, Partition, SectorFamily, OPERATOR_CAP};
use crate::fusion::{AnyonDistribution, FusionCategory, FusionProbabilities};
use crate::info::shannon_counts;

/// Enumeration is refused above this many configurations per sector.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("invalid ring: {0}")]
    InvalidSpec(String),
    #[error("A arc has {sites_a} sites; {needed} are needed for {levels} nested levels")]
    InsufficientWidth { sites_a: usize, needed: usize, levels: usize },
    #[error("string endpoint {site} lies in the retained width {width}")]
    SiteInThinnedRegion { site: usize, width: usize },
    #[error("{0} configurations exceed the enumeration cap")]
    EnumerationCap(u64),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub q: u32,
    pub sites_a: usize,
    pub sites_b1: usize,
    pub sites_c: usize,
    pub sites_b2: usize,
}

impl RingSpec {
    pub fn new(q: u32, sites_a: usize, sites_b1: usize, sites_c: usize, sites_b2: usize) -> Result<Self, RingError> {
        let spec = Self { q, sites_a, sites_b1, sites_c, sites_b2 };
        if q < 2 {
            return Err(RingError::InvalidSpec(format!("q = {q}")));
        }
        if [sites_a, sites_b1, sites_c, sites_b2].contains(&0) {
            return Err(RingError::InvalidSpec("every arc needs at least one site".into()));
        }
        if spec.loop_len() > 64 {
            return Err(RingError::InvalidSpec("more than 64 loop variables".into()));
        }
        Ok(spec)
    }

    pub fn sites(&self) -> usize {
        self.sites_a + self.sites_b1 + self.sites_c + self.sites_b2
    }

    /// Independent values around the loop.
    pub fn loop_len(&self) -> usize {
        1 + self.sites_b1 + self.sites_c + self.sites_b2
    }

    pub fn a_sites(&self, width: usize) -> Vec<usize> {
        (0..width.min(self.sites_a)).collect()
    }

    pub fn b1_sites(&self) -> Vec<usize> {
        let s = self.sites_a;
        (s..s + self.sites_b1).collect()
    }

    pub fn c_sites(&self) -> Vec<usize> {
        let s = self.sites_a + self.sites_b1;
        (s..s + self.sites_c).collect()
    }

    pub fn b2_sites(&self) -> Vec<usize> {
        let s = self.sites_a + self.sites_b1 + self.sites_c;
        (s..s + self.sites_b2).collect()
    }

    pub fn b_sites(&self) -> Vec<usize> {
        let mut b = self.b1_sites();
        b.extend(self.b2_sites());
        b
    }

    fn loop_var(&self, site: usize) -> usize {
        if site < self.sites_a {
            0
        } else {
            1 + site - self.sites_a
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.q).map(|a| a.to_string()).collect()
    }

    /// Configurations per sector, `q^(loop_len - 1)`.
    pub fn support_size(&self) -> u128 {
        u128::from(self.q).pow(self.loop_len() as u32 - 1)
    }

    /// Partition with A kept to its innermost `width` sites; the rest of A is ENV.
    pub fn partition(&self, width: usize) -> Partition {
        let a = self.a_sites(width);
        let env: Vec<usize> = (width.min(self.sites_a)..self.sites_a).collect();
        Partition::from_lists(&a, &self.b_sites(), &self.c_sites(), &env)
    }
}

/// Entropy of a site set in units of `ln q`.
pub fn entropy_units(spec: &RingSpec, sites: &[usize]) -> u32 {
    let mut seen = vec![false; spec.loop_len()];
    for &s in sites {
        seen[spec.loop_var(s)] = true;
    }
    let k = seen.iter().filter(|x| **x).count() as u32;
    if k as usize == spec.loop_len() {
        k - 1
    } else {
        k
    }
}

/// `I(A:C|B)` in units of `ln q` with A cut to `width` sites.
pub fn cmi_units(spec: &RingSpec, width: usize) -> i64 {
    let a = spec.a_sites(width);
    let b = spec.b_sites();
    let c = spec.c_sites();
    let cat = |parts: &[&[usize]]| -> i64 { i64::from(entropy_units(spec, &parts.concat())) };
    cat(&[&a, &b]) + cat(&[&b, &c]) - cat(&[&b]) - cat(&[&a, &b, &c])
}

/// `I(A:C|B)` for the full ring, by counting.
pub fn exact_cmi(spec: &RingSpec) -> f64 {
    cmi_units(spec, spec.sites_a) as f64 * f64::from(spec.q).ln()
}

/// Calls `f` with every site configuration in sector `a`.
pub fn for_each_configuration(spec: &RingSpec, a: u32, mut f: impl FnMut(&[u32])) -> Result<(), RingError> {
    let free = spec.loop_len() - 1;
    let total = u64::from(spec.q).checked_pow(free as u32).unwrap_or(u64::MAX);
    if total > ENUMERATION_CAP {
        return Err(RingError::EnumerationCap(total));
    }
    let q = spec.q;
    let mut vars = vec![0u32; spec.loop_len()];
    let mut sites = vec![0u32; spec.sites()];
    for mut code in 0..total {
        let mut sum = 0u32;
        for v in vars.iter_mut().skip(1) {
            *v = (code % u64::from(q)) as u32;
            code /= u64::from(q);
            sum = (sum + *v) % q;
        }
        vars[0] = (a + q - sum) % q;
        for (i, s) in sites.iter_mut().enumerate() {
            *s = vars[spec.loop_var(i)];
        }
        f(&sites);
    }
    Ok(())
}

/// Shannon entropy of the marginal on `sites` by exhaustive enumeration.
pub fn enumerated_entropy(spec: &RingSpec, a: u32, sites: &[usize]) -> Result<f64, RingError> {
    Ok(enumerated_entropies(spec, a, &[sites])?[0])
}

/// Marginal entropies of several site sets from one enumeration pass.
pub fn enumerated_entropies(spec: &RingSpec, a: u32, sets: &[&[usize]]) -> Result<Vec<f64>, RingError> {
    let q = u64::from(spec.q);
    let key = |cfg: &[u32], sites: &[usize]| sites.iter().fold(0u64, |acc, &s| acc * q + u64::from(cfg[s]));
    let dense_len = |sites: &[usize]| q.checked_pow(sites.len() as u32).filter(|n| *n <= ENUMERATION_CAP);
    if sets.iter().all(|s| dense_len(s).is_some()) {
        let mut counts: Vec<Vec<u64>> = sets.iter().map(|s| vec![0; dense_len(s).unwrap() as usize]).collect();
        for_each_configuration(spec, a, |cfg| {
            for (c, sites) in counts.iter_mut().zip(sets) {
                c[key(cfg, sites) as usize] += 1;
            }
        })?;
        return Ok(counts.into_iter().map(shannon_counts).collect());
    }
    let mut counts: Vec<HashMap<u64, u64>> = vec![HashMap::new(); sets.len()];
    for_each_configuration(spec, a, |cfg| {
        for (c, sites) in counts.iter_mut().zip(sets) {
            *c.entry(key(cfg, sites)).or_default() += 1;
        }
    })?;
    Ok(counts.into_iter().map(|c| shannon_counts(c.into_values())).collect())
}

/// `I(A:C|B)` for sector `a` by exhaustive enumeration.
pub fn enumerated_cmi(spec: &RingSpec, a: u32, width: usize) -> Result<f64, RingError> {
    let av = spec.a_sites(width);
    let b = spec.b_sites();
    let c = spec.c_sites();
    let (ab, bc, abc) = ([&av[..], &b].concat(), [&b[..], &c].concat(), [&av[..], &b, &c].concat());
    let s = enumerated_entropies(spec, a, &[&ab, &bc, &b, &abc])?;
    Ok(s[0] + s[1] - s[2] - s[3])
}

/// Site-wise shifts `h_i -> h_i + shift_i` mod `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingUnitary {
    pub q: u32,
    pub shifts: Vec<u32>,
}

impl RingUnitary {
    pub fn identity(spec: &RingSpec) -> Self {
        Self { q: spec.q, shifts: vec![0; spec.sites()] }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let shifts = self.shifts.iter().zip(&other.shifts).map(|(a, b)| (a + b) % self.q).collect();
        Self { q: self.q, shifts }
    }

    pub fn apply(&self, cfg: &[u32], out: &mut [u32]) {
        for ((o, c), s) in out.iter_mut().zip(cfg).zip(&self.shifts) {
            *o = (c + s) % self.q;
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.shifts.iter().enumerate().filter(|(_, s)| **s != 0).map(|(i, _)| i).collect()
    }

    pub fn to_local_operator(&self) -> LocalOperator {
        let parts: Vec<(usize, Vec<usize>)> = self
            .support()
            .into_iter()
            .map(|i| (i, (0..self.q).map(|x| ((x + self.shifts[i]) % self.q) as usize).collect()))
            .collect();
        if parts.is_empty() {
            return LocalOperator::permutation(0, &(0..self.q as usize).collect::<Vec<_>>());
        }
        LocalOperator::permutations(&parts)
    }
}

/// Open string adding `s` to every A site from the hole out to `endpoint`.
///
/// The endpoint must lie in the removed part of A, i.e. `width <= endpoint < sites_a`.
pub fn fusion_unitary(spec: &RingSpec, s: u32, width: usize, endpoint: usize) -> Result<RingUnitary, RingError> {
    if endpoint >= spec.sites_a {
        return Err(RingError::InvalidSpec(format!("endpoint {endpoint} is outside A")));
    }
    if endpoint < width {
        return Err(RingError::SiteInThinnedRegion { site: endpoint, width });
    }
    Ok(shift_up_to(spec, s, endpoint))
}

/// The same string without the endpoint check; used to build negative cases.
pub fn shift_up_to(spec: &RingSpec, s: u32, endpoint: usize) -> RingUnitary {
    let mut u = RingUnitary::identity(spec);
    for site in 0..=endpoint.min(spec.sites_a - 1) {
        u.shifts[site] = s % spec.q;
    }
    u
}

/// Exact fusion check by counting: `(W ρ^a W†)_{A'BC}` against `ρ^{a+s}_{A'BC}` for every `a`.
pub fn fusion_check_exact(spec: &RingSpec, w: &RingUnitary, s: u32, width: usize) -> Result<Check, RingError> {
    let mut keep = spec.a_sites(width);
    keep.extend(spec.b_sites());
    keep.extend(spec.c_sites());
    keep.sort_unstable();
    let q = u64::from(spec.q);
    let marginal = |a: u32, w: Option<&RingUnitary>| -> Result<HashMap<u64, u64>, RingError> {
        let mut counts = HashMap::new();
        let mut moved = vec![0u32; spec.sites()];
        for_each_configuration(spec, a, |cfg| {
            let cfg = match w {
                Some(w) => {
                    w.apply(cfg, &mut moved);
                    &moved[..]
                }
                None => cfg,
            };
            let key = keep.iter().fold(0u64, |acc, &i| acc * q + u64::from(cfg[i]));
            *counts.entry(key).or_insert(0u64) += 1;
        })?;
        Ok(counts)
    };
    let mut worst = 0.0f64;
    let mut witness = String::new();
    for a in 0..spec.q {
        let got = marginal(a, Some(w))?;
        let want = marginal((a + s) % spec.q, None)?;
        // Both sides have the same total, so count differences give the trace distance exactly.
        let total: u64 = want.values().sum();
        let mut diff = 0u64;
        for (k, v) in &got {
            diff += v.abs_diff(*want.get(k).unwrap_or(&0));
        }
        for (k, v) in &want {
            if !got.contains_key(k) {
                diff += v;
            }
        }
        let d = diff as f64 / (2.0 * total as f64);
        if d > worst {
            worst = d;
            witness = format!("sector {a}");
        }
    }
    let check = Check::defect(format!("ring fusion with {s}"), worst, 1e-9);
    Ok(if check.ok() { check } else { check.with_detail(witness) })
}

/// `Z_q` fusion data for the ring sectors.
pub fn fusion_data(spec: &RingSpec) -> FusionProbabilities {
    let cat = FusionCategory::abelian_group(&[spec.q]).expect("cyclic group is a valid category");
    FusionProbabilities::abelian(&cat).expect("cyclic group is Abelian")
}

/// Diagonal density operators for every sector, plus the full partition.
pub fn build_family(spec: &RingSpec) -> Result<(SectorFamily, Partition), RingError> {
    let space = FactorSpace::new((0..spec.sites()).map(|i| (i, spec.q as usize)).collect(), OPERATOR_CAP)?;
    let dim = space.dim();
    let mut states = Vec::with_capacity(spec.q as usize);
    for a in 0..spec.q {
        let mut probs = vec![0.0; dim];
        let weight = 1.0 / spec.support_size() as f64;
        for_each_configuration(spec, a, |cfg| {
            let idx = cfg.iter().fold(0usize, |acc, &h| acc * spec.q as usize + h as usize);
            probs[idx] = weight;
        })?;
        states.push(DensityOperator::from_diagonal(space.clone(), &probs)?);
    }
    Ok((SectorFamily::new(spec.labels(), states, 0)?, spec.partition(spec.sites_a)))
}

/// Widths of `A_0 ⊂ A_1 ⊂ ... ⊂ A_{n+1} = A`, one site removed per step.
pub fn level_widths(spec: &RingSpec, n: usize) -> Result<Vec<usize>, RingError> {
    let needed = n + 2;
    if spec.sites_a < needed {
        return Err(RingError::InsufficientWidth { sites_a: spec.sites_a, needed, levels: n + 2 });
    }
    Ok((0..n + 2).map(|i| spec.sites_a - (n + 1 - i)).collect())
}

/// Counting table `I_i^{(a)}` for every sector and level.
pub fn nested_annulus_table(spec: &RingSpec, n: usize) -> Result<AuditTrace, RingError> {
    let ln_q = f64::from(spec.q).ln();
    let cmi: Vec<Vec<f64>> = level_widths(spec, n)?
        .into_iter()
        .map(|w| vec![cmi_units(spec, w) as f64 * ln_q; spec.q as usize])
        .collect();
    let trace = AuditTrace::new(
        spec.labels(),
        cmi,
        fusion_data(spec),
        AnyonDistribution::uniform(spec.q as usize),
        0,
        Provenance::RingFamily,
    )
    .map_err(|e| RingError::InvalidSpec(e.to_string()))?;
    Ok(trace)
}
