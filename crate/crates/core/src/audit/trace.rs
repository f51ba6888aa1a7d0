use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::fusion::{AnyonDistribution, FusionProbabilities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RingFamily,
    StabilizerTee,
    Synthetic,
}

/// On-disk form of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub labels: Vec<String>,
    pub levels: usize,
    /// `I[level][label]` in nats.
    #[serde(rename = "I")]
    pub cmi: Vec<Vec<f64>>,
    /// `[s][a][b]`.
    pub fusion_probabilities: Vec<Vec<Vec<f64>>>,
    pub p_star: Vec<f64>,
    pub a0: String,
    pub provenance: Provenance,
}

/// Table `I_i^{(a)}` over nested annuli `i = 0..=n+1`, plus the fusion data it is audited against.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditTrace {
    pub labels: Vec<String>,
    /// `cmi[i][a]`.
    pub cmi: Vec<Vec<f64>>,
    pub fp: FusionProbabilities,
    pub p_star: AnyonDistribution,
    pub a0: usize,
    pub provenance: Provenance,
}

impl AuditTrace {
    pub fn new(
        labels: Vec<String>,
        cmi: Vec<Vec<f64>>,
        fp: FusionProbabilities,
        p_star: AnyonDistribution,
        a0: usize,
        provenance: Provenance,
    ) -> Result<Self, AuditError> {
        let r = labels.len();
        if r == 0 || fp.rank() != r || p_star.len() != r {
            return Err(AuditError::MalformedTrace("labels, fusion table and p* disagree in size".into()));
        }
        if cmi.len() < 3 {
            return Err(AuditError::MalformedTrace(format!("{} levels; at least 3 are needed", cmi.len())));
        }
        if let Some(i) = cmi.iter().position(|row| row.len() != r) {
            return Err(AuditError::MalformedTrace(format!("level {i} is not rectangular")));
        }
        if cmi.iter().flatten().any(|x| !x.is_finite()) {
            return Err(AuditError::MalformedTrace("non-finite table entry".into()));
        }
        if a0 >= r {
            return Err(AuditError::MalformedTrace(format!("base label index {a0} out of range")));
        }
        Ok(Self { labels, cmi, fp, p_star, a0, provenance })
    }

    /// A table whose every entry equals `value`.
    pub fn constant(
        labels: Vec<String>,
        n: usize,
        value: f64,
        fp: FusionProbabilities,
        p_star: AnyonDistribution,
        provenance: Provenance,
    ) -> Result<Self, AuditError> {
        let r = labels.len();
        Self::new(labels, vec![vec![value; r]; n + 2], fp, p_star, 0, provenance)
    }

    pub fn from_document(doc: TraceDocument) -> Result<Self, AuditError> {
        if doc.levels != doc.cmi.len() {
            return Err(AuditError::MalformedTrace(format!(
                "`levels` is {} but the table has {} rows",
                doc.levels,
                doc.cmi.len()
            )));
        }
        let fp = FusionProbabilities::from_nested(&doc.fusion_probabilities)
            .map_err(|e| AuditError::MalformedTrace(e.to_string()))?;
        let p_star = AnyonDistribution::new(doc.p_star).map_err(|e| AuditError::MalformedTrace(e.to_string()))?;
        let a0 = doc
            .labels
            .iter()
            .position(|l| *l == doc.a0)
            .ok_or_else(|| AuditError::MalformedTrace(format!("unknown base label `{}`", doc.a0)))?;
        Self::new(doc.labels, doc.cmi, fp, p_star, a0, doc.provenance)
    }

    pub fn from_json(text: &str) -> Result<Self, AuditError> {
        let doc: TraceDocument = serde_json::from_str(text).map_err(|e| AuditError::MalformedTrace(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> TraceDocument {
        TraceDocument {
            labels: self.labels.clone(),
            levels: self.cmi.len(),
            cmi: self.cmi.clone(),
            fusion_probabilities: self.fp.to_nested(),
            p_star: self.p_star.probs().to_vec(),
            a0: self.labels[self.a0].clone(),
            provenance: self.provenance,
        }
    }

    /// `n`, so levels run `0..=n+1`.
    pub fn n(&self) -> usize {
        self.cmi.len() - 2
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// `I_i^{(a)}`.
    pub fn at(&self, level: usize, label: usize) -> f64 {
        self.cmi[level][label]
    }
}

/// Trace with `I` falling across levels; monotonicity must reject it.
pub const DECREASING_TRACE: &str = include_str!("../../data/traces/decreasing.json");
