//! Exact symbolic calculus for complete contractions of covariant
//! derivatives of curvature tensors.

pub mod ratcoef;
pub mod expr;
pub mod numeval;
pub mod rewrite;
pub mod textio;
pub mod divergence;
pub mod ambient;
pub mod cli;
