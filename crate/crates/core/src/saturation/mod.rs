//! Saturation of a flat unification context under the first-order or
//! higher-order rule set.

mod closure;
mod engine;
mod schema;
mod status;
mod trace;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::term_core::{MetaId, NameSupply, TermError, UnifContext};

pub use closure::{Closure, TermId};
pub use schema::{match_schema, DuplicateHole, Hole, Schema};
pub use status::{measure, pruning_for, resolution_for, status_metavar, status_recconst, Measure, Multiset, RecStatus, Status};
pub use trace::{ItemNo, RuleId, SatTrace, TraceItem, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("context is not first-order")]
    NotFirstOrder,
    #[error("metavariable {0} has no type information")]
    UnknownMeta(MetaId),
    #[error("saturation exceeded {0} steps")]
    Budget(usize),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("internal: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SatMode {
    FirstOrder,
    HigherOrder,
}

/// Order in which pending work is taken.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Clone, Debug)]
pub struct SatConfig {
    pub mode: SatMode,
    pub schedule: Schedule,
    /// Work items processed before giving up.
    pub max_steps: usize,
    pub stop_on_contra: bool,
}

impl SatConfig {
    pub fn new(mode: SatMode) -> Self {
        SatConfig {
            mode,
            schedule: Schedule::Fifo,
            max_steps: 2_000_000,
            stop_on_contra: true,
        }
    }
}

/// A rule application that did not decrease (or, for rules creating no
/// symbols, increased) the termination measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureViolation {
    /// Index into [`SatTrace::steps`].
    pub step: usize,
    pub rule: RuleId,
    pub before: Measure,
    pub after: Measure,
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub context: UnifContext,
    pub trace: SatTrace,
    pub violations: Vec<MeasureViolation>,
    pub supply: NameSupply,
    /// Work items processed.
    pub work: usize,
}

pub fn saturate_with(ctx: &UnifContext, cfg: &SatConfig, supply: NameSupply) -> Result<Saturation, SatError> {
    engine::Engine::new(ctx, cfg.clone(), supply)?.run()
}

pub fn saturate(ctx: &UnifContext, mode: SatMode) -> Result<(UnifContext, SatTrace), SatError> {
    let s = saturate_with(ctx, &SatConfig::new(mode), NameSupply::new())?;
    Ok((s.context, s.trace))
}
