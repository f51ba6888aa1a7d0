//! Dense density operators on tensor products of small local spaces.
//!
//! Basis indices are big-endian in factor order: the first factor is the most
//! significant digit.

mod family;
mod operator;
mod pure;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use family::{
    check_fusion_property, check_global_distinguishability, check_local_indistinguishability,
    mixture_cmi_decomposition, MixtureReport, SectorFamily,
};
pub use operator::{
    conditional_mutual_information, random_density, trace_distance, von_neumann_entropy, DensityOperator,
    LocalOperator, CLIP_NEGATIVE, CLIP_ZERO,
};
pub use pure::PureState;

/// Default dimension cap for dense operators.
pub const OPERATOR_CAP: usize = 1 << 14;
/// Default dimension cap for pure-state vectors.
pub const VECTOR_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenseError {
    #[error("unknown factor {0}")]
    UnknownFactor(usize),
    #[error("eigensolver did not converge on a {0}x{0} matrix")]
    SpectrumFailure(usize),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("operator acts on factor {0}, which is not in region A")]
    SupportViolation(usize),
    #[error("premise violated: {0}")]
    PremiseViolated(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

/// Ordered tensor factors, each `(id, local dimension)`, ids strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpace {
    factors: Vec<(usize, usize)>,
}

impl FactorSpace {
    pub fn new(factors: Vec<(usize, usize)>, cap: usize) -> Result<Self, DenseError> {
        if factors.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(DenseError::MalformedInput("factor ids must be strictly increasing".into()));
        }
        if let Some(&(id, d)) = factors.iter().find(|f| f.1 < 2) {
            return Err(DenseError::MalformedInput(format!("factor {id} has dimension {d}")));
        }
        let space = Self { factors };
        let dim = space.checked_dim().unwrap_or(usize::MAX);
        if dim > cap {
            return Err(DenseError::DimensionCap { dim, cap });
        }
        Ok(space)
    }

    /// `n` factors of dimension `d` with ids `0..n`.
    pub fn uniform(n: usize, d: usize) -> Result<Self, DenseError> {
        Self::new((0..n).map(|i| (i, d)).collect(), OPERATOR_CAP)
    }

    fn checked_dim(&self) -> Option<usize> {
        self.factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.1))
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.1).product()
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|f| f.0)
    }

    pub fn position(&self, id: usize) -> Result<usize, DenseError> {
        self.factors.iter().position(|f| f.0 == id).ok_or(DenseError::UnknownFactor(id))
    }

    /// Subspace on `keep`, in ascending id order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, DenseError> {
        for &id in keep {
            self.position(id)?;
        }
        let factors = self.factors.iter().copied().filter(|f| keep.contains(&f.0)).collect();
        Ok(Self { factors })
    }

    /// Digits of a basis index, one per factor.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.1;
            index /= f.1;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factors).fold(0, |acc, (d, f)| acc * f.1 + d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    #[serde(rename = "ENV")]
    Env,
}

/// Region tag per factor id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: BTreeMap<usize, Region>,
}

impl Partition {
    pub fn new(assignment: BTreeMap<usize, Region>) -> Self {
        Self { assignment }
    }

    /// Builds from explicit id lists; anything unlisted is left untagged.
    pub fn from_lists(a: &[usize], b: &[usize], c: &[usize], env: &[usize]) -> Self {
        let mut assignment = BTreeMap::new();
        for (ids, r) in [(a, Region::A), (b, Region::B), (c, Region::C), (env, Region::Env)] {
            for &id in ids {
                assignment.insert(id, r);
            }
        }
        Self { assignment }
    }

    pub fn region(&self, r: Region) -> Vec<usize> {
        self.assignment.iter().filter(|(_, t)| **t == r).map(|(id, _)| *id).collect()
    }

    pub fn union(&self, rs: &[Region]) -> Vec<usize> {
        self.assignment.iter().filter(|(_, t)| rs.contains(t)).map(|(id, _)| *id).collect()
    }

    /// Every factor of `space` must be tagged exactly once, and nothing else.
    pub fn validate(&self, space: &FactorSpace) -> Result<(), DenseError> {
        for id in space.ids() {
            if !self.assignment.contains_key(&id) {
                return Err(DenseError::MalformedInput(format!("factor {id} has no region tag")));
            }
        }
        for &id in self.assignment.keys() {
            space.position(id)?;
        }
        Ok(())
    }

    /// Copy with `ids` moved to ENV.
    pub fn discard(&self, ids: &[usize]) -> Self {
        let mut out = self.clone();
        for id in ids {
            if let Some(t) = out.assignment.get_mut(id) {
                *t = Region::Env;
            }
        }
        out
    }
}
