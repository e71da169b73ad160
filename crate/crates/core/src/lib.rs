//! Morse, Maslov and triple-index computations for linear Hamiltonian
//! systems arising from Sturm-Liouville operators with Lagrangian boundary
//! conditions.

pub mod brake_orbit;
pub mod cli;
pub mod error;
pub mod hermitian_forms;
pub mod index_theory;
pub mod linalg;
pub mod problem;
pub mod random;
pub mod sturm_liouville;
pub mod symplectic_core;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use tolerances::Tolerances;
