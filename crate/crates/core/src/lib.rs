//! Discrete magnetic and cut Schrödinger operators on finite graphs.
//!
//! The crate builds the operator `H = Q - C` of a connected simple graph,
//! its magnetic deformations (phases on the edges closing the independent
//! cycles) and its cut deformations (surplus edges removed, compensating
//! potential added), and checks numerically that the Morse index of the
//! n-th eigenvalue as a function of the magnetic phases at zero field equals
//! the nodal surplus of the n-th eigenfunction.
//!
//! Levels are 1-based throughout (`level = 1` is the ground state); vertices
//! and surplus-edge indices are 0-based.

pub mod criticality;
pub mod duality;
mod error;
pub mod graph;
pub mod harness;
pub mod nodal;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{CycleStructure, Edge, Graph};
pub use operators::{CutParams, EdgePhaseAssignment, HermitianOperator, MagneticPhases};
pub use spectral::{Inertia, SpectralDecomposition};
