//! Replays the inequality chain from the two key inequalities to the final bound
//! as arithmetic on a table `I_i^{(a)}`.

mod chain;
mod taylor;
mod trace;

use thiserror::Error;

pub use chain::{
    assemble_bound, audit_trace, check_cor3, check_fusion_step, check_paia, default_alpha, default_epsilon,
    delta, AuditOptions, AuditReport,
};
pub use taylor::{epsilon_grid, taylor_bound_sweep, TaylorReport};
pub use trace::{AuditTrace, Provenance, TraceDocument, DECREASING_TRACE};

/// Margins above `-FLOOR` pass.
pub const FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("|epsilon| = {eps} exceeds p_min/2 = {limit}")]
    EpsilonOutOfRange { eps: f64, limit: f64 },
    #[error("premise violated: {lemma} ({detail})")]
    PremiseViolated { lemma: String, detail: String },
    #[error("level {0} is out of range")]
    LevelOutOfRange(usize),
}
