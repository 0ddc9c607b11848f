//! Verification of time-aware business process models via constrained Horn
//! clauses.

pub mod backend;
pub mod chc;
pub mod fixtures;
pub mod generate;
pub mod minimizer;
pub mod model;
pub mod property;
pub mod semantics;
pub mod specializer;
pub mod syntax;
pub mod wellformed;
