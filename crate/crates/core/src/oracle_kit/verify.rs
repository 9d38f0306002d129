use crate::expansion::{expand, first_divergence, BotTerm};
use crate::surface::ConcreteContext;
use crate::term_core::{apply_subst_context, Equation, Substitution, UnifContext};

use super::OracleError;

#[derive(Clone, Debug, PartialEq)]
pub enum EqCheck {
    Holds,
    /// The expansions first differ at `depth`.
    FailsAt { depth: usize, left: BotTerm, right: BotTerm },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub depth: usize,
    /// Each equation of `Δ[Γ]` with its outcome.
    pub equations: Vec<(Equation, EqCheck)>,
}

impl VerifyReport {
    pub fn holds(&self) -> bool {
        self.equations.iter().all(|(_, c)| *c == EqCheck::Holds)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.equations
            .iter()
            .filter_map(|(_, c)| match c {
                EqCheck::FailsAt { depth, .. } => Some(*depth),
                EqCheck::Holds => None,
            })
            .min()
    }
}

/// Checks every equation of `Δ[Γ]` up to expansion depth `k`.
pub fn verify_unifier(ctx: &UnifContext, g: &Substitution, k: usize) -> Result<VerifyReport, OracleError> {
    if let Some(m) = ctx.uv().into_iter().find(|m| !g.entries.contains_key(m)) {
        return Err(OracleError::NotCovered(m));
    }
    let applied = apply_subst_context(ctx, g)?;
    let defs = &applied.defs;
    let mut equations = Vec::new();
    for eq in applied.eqs {
        let check = match first_divergence(defs, &eq.lhs, defs, &eq.rhs, k)? {
            None => EqCheck::Holds,
            Some(d) => EqCheck::FailsAt {
                depth: d,
                left: expand(defs, &eq.lhs, d)?,
                right: expand(defs, &eq.rhs, d)?,
            },
        };
        equations.push((eq, check));
    }
    Ok(VerifyReport { depth: k, equations })
}

/// The same check against the unflattened problem.
pub fn verify_concrete(ctx: &ConcreteContext, g: &Substitution, k: usize) -> Result<VerifyReport, OracleError> {
    let as_unif = UnifContext {
        eqs: ctx.eqs.clone(),
        defs: ctx.defs.clone(),
        metas: ctx.metas.clone(),
        contra: false,
    };
    verify_unifier(&as_unif, g, k)
}
