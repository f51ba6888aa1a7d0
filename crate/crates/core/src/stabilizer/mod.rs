//! Qudit toric code on a planar lattice, handled as a CSS stabilizer state.
//!
//! Region entropies come from ranks over `F_p`, so every value is an exact integer
//! multiple of `ln p`.

mod annulus;
mod field;
mod lattice;
mod sectors;
mod state;
mod tee;

use thiserror::Error;

use crate::dense::DenseError;

pub use annulus::{AnnulusPartition, Direction, Rect, Route, ELL};
pub use field::{rank_gf2, rank_on_columns, rank_on_columns_generic, rref};
pub use lattice::{Edge, Lattice, StringOperator, StringPath};
pub use sectors::{
    charge_loop, charge_path, create_sector, flux_loop, flux_path, fusion_operator, sector_operator, sector_states,
    FusionStringRule, Placement, SectorLabel,
};
pub use state::{
    build_ground_state, Generator, PauliKind, Reduction, RegionEntropy, RegionReducer, StabilizerState, Witness,
};
pub use tee::{
    annulus_cmi, nested_annulus_table, sector_fusion_data, verify_assumptions, AssumptionReport, CmiCertificate,
    Violation,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizerError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("generator rank {rank}, expected {expected}")]
    RankDeficiency { rank: usize, expected: usize },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("{kind} string crosses B at edge {edge}")]
    PathBlocked { kind: &'static str, edge: String },
    #[error("A has width {width}; {needed} thinning steps with two layers left need more ({levels} levels)")]
    InsufficientWidth { width: usize, needed: usize, levels: usize },
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("region of {edges} edges exceeds the dense cap {cap}")]
    RegionTooLarge { edges: usize, cap: usize },
    #[error(transparent)]
    Dense(#[from] DenseError),
}
