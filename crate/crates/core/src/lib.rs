//! Berry–Esseen type bounds for the combinatorial central limit theorem under
//! truncation, with Monte-Carlo and exact-enumeration checks.
//!
//! The statistic is Sₙ = Σᵢ X_{iπ(i)} for an n×n matrix of independent random
//! variables and an independent uniform permutation π.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod matrix;
pub mod mc;
pub mod moments;
pub mod normal;
pub mod runner;
pub mod scenario;
pub mod solver;

pub use dist::{DistributionSpec, Level, TruncatedMomentSet};
pub use error::{Error, Result};
pub use matrix::{RealMatrix, Square};
pub use moments::{build_moment_table, variance_summary, MomentTable, VarianceSummary};
