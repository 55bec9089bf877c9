//! Verification front end for the torelli-core engine: symbolic vector
//! expressions, operator chains, case manifests and decomposition tables.

pub mod cases;
pub mod chain;
pub mod expr;
pub mod lie;
pub mod pattern;
pub mod report;
pub mod tables;
