//! Independent checks for the engine: bounded verification of unifiers,
//! a classical first-order baseline and random problems.

mod generate;
mod robinson;
mod verify;

use thiserror::Error;

use crate::expansion::ExpandError;
use crate::surface::SurfaceError;
use crate::term_core::{MetaId, RecId, TermError};

pub use generate::{gen_problem, GenConfig, GenMode, GeneratedProblem};
pub use robinson::{robinson_acyclic, RobinsonOutcome};
pub use verify::{verify_concrete, verify_unifier, EqCheck, VerifyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("metavariable {0} is not assigned by the substitution")]
    NotCovered(MetaId),
    #[error("the problem is not first-order")]
    NotFirstOrder,
    #[error("definition of {0} is recursive")]
    Recursive(RecId),
    #[error("recursion constant {0} has no definition")]
    UndefinedRec(RecId),
    #[error("generated problem does not load: {0}")]
    Generated(SurfaceError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
}

#[cfg(test)]
mod tests;
