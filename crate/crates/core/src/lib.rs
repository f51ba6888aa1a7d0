//! Numerical checks for topological entanglement entropy lower bounds.

pub mod audit;
pub mod check;
pub mod dense;
pub mod fusion;
pub mod info;
pub mod ring;
pub mod stabilizer;
