//! Exact permanents of random symmetric sign matrices and the
//! constructive machinery around them: expansion identities, heavy-minor
//! growth processes, the quadratic endgame step, second moments and
//! anti-concentration oracles.

pub mod anticonc;
pub mod distribution;
pub mod endgame;
pub mod error;
pub mod growth;
pub mod index_set;
pub mod matrix;
pub mod moments;
pub mod perm;
pub mod seed;

pub use distribution::{EntryDistribution, FiniteLaw};
pub use error::{LabError, Result};
pub use index_set::{complement_disjoint, IndexSet};
pub use matrix::{extend_symmetric, sample_symmetric, Matrix, SymmetricMatrixProcess};
pub use seed::SeedSpec;
