//! Fusion rules, quantum dimensions, fusion probabilities and their fixed points.

mod algebra;
mod category;
mod defect;
mod fixed_point;

use thiserror::Error;

pub use algebra::{
    fusion_probabilities, quantum_dimensions, star, AnyonDistribution, FusionProbabilities, QuantumDims,
    NORMALIZATION_TOL,
};
pub use category::{bundled, bundled_json, CategoryDocument, FusionCategory, BUNDLED};
pub use defect::{defect_fixed_point, DefectFusionSystem};
pub use fixed_point::{
    bound_constant, check_condition_one, closed_form_fixed_point, fixed_point_from, fixed_point_iterative,
    tee_lower_bound, verify_fixed_point_identity, FixedPoint, IdentityResidual,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid category: {0}")]
    InvalidCategory(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("averaged fusion matrix has a zero entry at ({a}, {b})")]
    ConditionOneViolated { a: usize, b: usize },
    #[error("distribution vanishes on label {label}")]
    DegenerateDistribution { label: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}
