//! Constrained Horn clauses over linear integer arithmetic.

pub mod clause;
pub mod linear;
pub mod text;

use thiserror::Error;

use crate::syntax::SyntaxError;

pub use clause::{var_name, Atom, ClauseSet, FreshVars, Head, HornClause, Term};
pub use linear::{gcd, Conjunct, LinExpr, LinearConstraint, Projection, Rel, Var};
pub use text::{parse_clause, parse_clauses, parse_conjunct};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChcError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("predicate `{pred}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is reserved and cannot be used as a predicate")]
    ReservedPredicate(String),
}
