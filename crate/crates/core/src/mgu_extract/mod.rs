//! Reading a most general unifier off a saturated context.

mod mediate;

#[cfg(test)]
mod tests;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

use crate::expansion::ExpandError;
use crate::saturation::{resolution_for, Closure, TermId};
use crate::term_core::{
    same_set, Binder, Body, Equation, MetaId, MetaInfo, Mode, NameSupply, RecId, SubstEntry, Substitution, Term,
    TermError, UnifContext, Var,
};

pub use mediate::{equivalent, mediate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifError {
    #[error("context contains contra")]
    Contradictory,
    #[error("metavariable {0} has no type information")]
    UnknownMeta(MetaId),
    #[error("replacing {0} does not terminate")]
    ReplacementCycle(MetaId),
    #[error("the given substitution does not instantiate the unifier: {0}")]
    NotAnInstance(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
}

/// Which candidate to take when several equations qualify.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ChoicePolicy {
    /// The earliest interned pair.
    #[default]
    First,
    /// The latest interned pair.
    Last,
}

/// Chosen equations, each oriented with the metavariable on the left.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResolutionChoice {
    pub resolutions: IndexMap<MetaId, Equation>,
    /// For unresolved metavariables: `H ȳ ≐ G z̄` with `G` the class
    /// representative and one right-hand side per class.
    pub representatives: IndexMap<MetaId, Equation>,
}

impl ResolutionChoice {
    fn entry_for(&self, m: &MetaId) -> Option<&Equation> {
        self.resolutions.get(m).or_else(|| self.representatives.get(m))
    }

    /// Whether `m` stands for its own class.
    pub fn is_representative(&self, m: &MetaId) -> bool {
        self.representatives
            .get(m)
            .is_some_and(|e| matches!(&e.rhs.body, Body::Meta { meta, .. } if meta == m))
    }
}

fn flex_parts(t: &Term) -> Option<(&MetaId, &[Var])> {
    match (&t.body, t.binders.is_empty()) {
        (Body::Meta { meta, args, .. }, true) => Some((meta, args)),
        _ => None,
    }
}

/// Bare `H ȳ` terms of the closure, grouped by metavariable.
fn bare_occurrences(c: &Closure) -> HashMap<MetaId, Vec<TermId>> {
    let mut out: HashMap<MetaId, Vec<TermId>> = HashMap::new();
    for id in c.ids() {
        if let Some((m, _)) = flex_parts(c.term(id)) {
            out.entry(m.clone()).or_default().push(id);
        }
    }
    out
}

fn pick<T>(mut v: Vec<T>, policy: ChoicePolicy) -> Option<T> {
    match policy {
        ChoicePolicy::First => (!v.is_empty()).then(|| v.swap_remove(0)),
        ChoicePolicy::Last => v.pop(),
    }
}

/// Representatives prefer names from the problem over generated ones.
fn rep_order(m: &MetaId) -> (bool, String) {
    (m.is_generated(), m.as_str().to_string())
}

pub fn choose(ctx: &UnifContext, policy: ChoicePolicy) -> Result<ResolutionChoice, UnifError> {
    let c = Closure::of_context(ctx);
    let occ = bare_occurrences(&c);
    let uv = ctx.uv();
    let mut out = ResolutionChoice::default();
    let mut unresolved = Vec::new();
    for m in &uv {
        let mut cands = Vec::new();
        for &a in occ.get(m).map_or(&[][..], Vec::as_slice) {
            let mut members = c.class(a).to_vec();
            members.sort();
            for b in members {
                if resolution_for(c.term(a), c.term(b)).as_ref() == Some(m) {
                    cands.push(Equation::new(c.term(a).clone(), c.term(b).clone()));
                }
            }
        }
        match pick(cands, policy) {
            Some(e) => {
                out.resolutions.insert(m.clone(), e);
            }
            None => unresolved.push(m.clone()),
        }
    }

    // Classes of unresolved metavariables linked by permutation equations.
    let mut class_of: HashMap<MetaId, usize> = unresolved.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let find_root = |class_of: &HashMap<MetaId, usize>, mut i: usize| {
        while class_of[&unresolved[i]] != i {
            i = class_of[&unresolved[i]];
        }
        i
    };
    // Links kept for locating each member's equation to its representative.
    let mut links: Vec<(TermId, TermId)> = Vec::new();
    for m in &unresolved {
        for &a in occ.get(m).map_or(&[][..], Vec::as_slice) {
            let (_, ys) = flex_parts(c.term(a)).expect("bare occurrence");
            for &b in c.class(a) {
                let Some((g, zs)) = flex_parts(c.term(b)) else { continue };
                if g == m || !class_of.contains_key(g) || !same_set(ys, zs) || ys.len() != zs.len() {
                    continue;
                }
                links.push((a, b));
                let (ra, rb) = (find_root(&class_of, class_of[m]), find_root(&class_of, class_of[g]));
                if ra != rb {
                    class_of.insert(unresolved[rb].clone(), ra);
                }
            }
        }
    }
    let mut classes: IndexMap<usize, Vec<MetaId>> = IndexMap::new();
    for m in &unresolved {
        let root = find_root(&class_of, class_of[m]);
        classes.entry(root).or_default().push(m.clone());
    }
    let mut supply = NameSupply::new();
    for m in &uv {
        supply.reserve(&m.0);
    }
    for id in c.ids() {
        for v in c.term(id).free_vars() {
            supply.reserve(&v.0);
        }
    }
    for members in classes.values() {
        let rep = members.iter().min_by_key(|m| rep_order(m)).expect("non-empty class").clone();
        let rep_term = match occ.get(&rep).and_then(|v| pick(v.clone(), ChoicePolicy::First)) {
            Some(id) => c.term(id).clone(),
            None => {
                let info = ctx.metas.get(&rep).ok_or_else(|| UnifError::UnknownMeta(rep.clone()))?;
                let vars = (0..info.width()).map(|_| supply.fresh_var("z")).collect();
                Term::meta(rep.clone(), info.mode, vars)
            }
        };
        let (_, rep_vars) = flex_parts(&rep_term).expect("flex representative");
        let rep_vars = rep_vars.to_vec();
        out.representatives.insert(rep.clone(), Equation::new(rep_term.clone(), rep_term.clone()));
        for h in members.iter().filter(|h| **h != rep) {
            let eq = member_equation(&c, &links, h, &rep, &rep_vars)
                .ok_or_else(|| UnifError::NotAnInstance(format!("no permutation equation from {h} to {rep}")))?;
            out.representatives.insert(h.clone(), Equation::new(eq, rep_term.clone()));
        }
    }
    Ok(out)
}

/// `H ȳ'` such that `H ȳ' ≐ G p̄` holds, read from some `H ȳ ≐ G z̄` in
/// the closure and renamed so that `z̄` becomes `p̄`.
fn member_equation(c: &Closure, links: &[(TermId, TermId)], h: &MetaId, rep: &MetaId, rep_vars: &[Var]) -> Option<Term> {
    let (a, b) = links.iter().copied().find(|&(a, b)| {
        c.same(a, b)
            && flex_parts(c.term(a)).is_some_and(|(m, _)| m == h)
            && flex_parts(c.term(b)).is_some_and(|(g, _)| g == rep)
    })?;
    let (_, ys) = flex_parts(c.term(a))?;
    let (_, zs) = flex_parts(c.term(b))?;
    let map: HashMap<&Var, &Var> = zs.iter().zip(rep_vars).collect();
    let renamed: Vec<Var> = ys.iter().map(|y| map[y].clone()).collect();
    let Body::Meta { mode, .. } = &c.term(a).body else { return None };
    Some(Term::meta(h.clone(), *mode, renamed))
}

struct Replacer<'a> {
    choice: &'a ResolutionChoice,
    limit: usize,
}

impl Replacer<'_> {
    fn term(&self, t: &Term, depth: usize) -> Result<Term, UnifError> {
        let body = match &t.body {
            Body::Rigid { head, args } => Body::Rigid {
                head: head.clone(),
                args: args.iter().map(|a| self.term(a, depth)).collect::<Result<_, _>>()?,
            },
            Body::Rec { .. } => t.body.clone(),
            Body::Meta { meta, args, .. } => {
                if self.choice.is_representative(meta) {
                    t.body.clone()
                } else if let Some(eq) = self.choice.entry_for(meta) {
                    if depth > self.limit {
                        return Err(UnifError::ReplacementCycle(meta.clone()));
                    }
                    let (_, ys) = flex_parts(&eq.lhs).expect("oriented equation");
                    let v = eq.rhs.rename(ys, args)?;
                    let v = self.term(&v, depth + 1)?;
                    return Ok(Term::lam(t.binders.clone(), v));
                } else {
                    t.body.clone()
                }
            }
        };
        Ok(Term {
            binders: t.binders.clone(),
            body,
        })
    }
}

/// `unif(Δ)` with the default choice policy.
pub fn unif(ctx: &UnifContext) -> Result<Substitution, UnifError> {
    unif_with(ctx, ChoicePolicy::First)
}

pub fn unif_with(ctx: &UnifContext, policy: ChoicePolicy) -> Result<Substitution, UnifError> {
    if ctx.contra {
        return Err(UnifError::Contradictory);
    }
    let choice = choose(ctx, policy)?;
    build(ctx, &choice)
}

/// Steps (1) to (4) of the construction for a given choice.
pub fn build(ctx: &UnifContext, choice: &ResolutionChoice) -> Result<Substitution, UnifError> {
    let rep = Replacer {
        choice,
        limit: ctx.metas.len() + choice.resolutions.len() + choice.representatives.len() + 1,
    };
    let mut out = Substitution::new();
    for m in ctx.uv() {
        let info = ctx.metas.get(&m).ok_or_else(|| UnifError::UnknownMeta(m.clone()))?;
        let eq = choice.entry_for(&m).ok_or_else(|| UnifError::UnknownMeta(m.clone()))?;
        let (_, ys) = flex_parts(&eq.lhs).expect("oriented equation");
        let (tys, _) = info.ty.uncurry();
        let pattern: Vec<Binder> = ys.iter().zip(tys).map(|(y, ty)| Binder::new(y.clone(), ty)).collect();
        let value = rep.term(&eq.rhs, 0)?;
        out.entries.insert(m.clone(), SubstEntry::new(info.mode, info.ty.clone(), pattern, value));
    }
    for (r, d) in &ctx.defs {
        let mut d = d.clone();
        d.body = rep.term(&d.body, 0)?;
        out.defs.insert(r.clone(), d);
    }
    out.free_metas = free_metas(&out, &ctx.metas);
    Ok(out)
}

fn free_metas(g: &Substitution, pool: &IndexMap<MetaId, MetaInfo>) -> IndexMap<MetaId, MetaInfo> {
    g.range_metas()
        .into_iter()
        .filter_map(|(m, _, _)| {
            let info = pool.get(&m).cloned().or_else(|| {
                g.entries.get(&m).map(|e| MetaInfo {
                    mode: e.mode,
                    ty: e.ty.clone(),
                })
            })?;
            Some((m, info))
        })
        .collect()
}

/// Drops definitions not reachable from any right-hand side.
pub fn gc_defs(g: &Substitution) -> Substitution {
    let mut keep: HashSet<RecId> = HashSet::new();
    let mut todo: Vec<RecId> = g.entries.values().flat_map(|e| e.value.recs()).collect();
    while let Some(r) = todo.pop() {
        if keep.insert(r.clone()) {
            if let Some(d) = g.defs.get(&r) {
                todo.extend(d.body.recs());
            }
        }
    }
    let mut out = g.clone();
    out.defs.retain(|r, _| keep.contains(r));
    out.free_metas = free_metas(&out, &g.free_metas);
    out
}

/// `unif` followed by [`gc_defs`], restricted to `keep` when given.
pub fn mgu(ctx: &UnifContext, keep: Option<&[MetaId]>) -> Result<Substitution, UnifError> {
    let g = unif(ctx)?;
    let g = match keep {
        Some(k) => crate::term_core::restrict(&g, k),
        None => g,
    };
    Ok(gc_defs(&g))
}

/// Whether every entry is headed by a value whose mode matches its own.
pub fn modes_consistent(g: &Substitution) -> bool {
    g.entries.values().all(|e| match (&e.value.body, e.mode) {
        (Body::Rigid { .. }, Mode::Con) | (Body::Rec { .. }, Mode::Rec) => true,
        (Body::Meta { mode, .. }, m) => *mode == m,
        _ => false,
    })
}
