//! Terms, contexts and the substitution algebra shared by every stage.

mod context;
mod names;
mod signature;
mod subst;
mod term;
mod types;

pub use context::{join_contexts, rename_apart, Def, Equation, MetaInfo, UnifContext};
pub use names::{primed, ConstName, MetaId, NameSupply, RecId, Sym, TypeName, Var, GEN_PREFIX};
pub use signature::{Kind, Signature};
pub use subst::{
    apply_subst_context, apply_subst_term, compose, eta_expand, restrict, SubstEntry,
    Substitution,
};
pub use term::{
    intersect, proper_subset, same_set, subset, Binder, Body, Head, Mode, Term, TermClass,
};
pub use types::SimpleType;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("renaming arity mismatch: {expected} source variables but {found} targets")]
    ArityMismatch { expected: usize, found: usize },
    #[error("metavariable {meta} has width {expected} but occurs with {found} arguments")]
    WidthMismatch {
        meta: MetaId,
        expected: usize,
        found: usize,
    },
    #[error("type mismatch: {0}")]
    Type(String),
    #[error("recursion constant {0} has no definition")]
    UndefinedRec(RecId),
    #[error("definition of {0} is not closed")]
    OpenDef(RecId),
    #[error("definition of {0} is not contractive")]
    NonContractiveDef(RecId),
    #[error("ill-formed equation {0}")]
    MixedEquation(String),
    #[error("ill-formed substitution entry for {meta}: {reason}")]
    BadEntry { meta: MetaId, reason: String },
}
