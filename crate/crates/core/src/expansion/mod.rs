//! Depth-k definitional expansion and rational term equality.

mod bot;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

pub use bot::{Atom, BotHead, BotTerm};

use crate::term_core::{
    Body, Def, Equation, Head, RecId, Substitution, Term, TermError, UnifContext, Var,
};

/// Default depth for bounded checks.
pub const DEFAULT_DEPTH: usize = 25;

/// Step limit for a single comparison; exceeding it means a termination bug.
const STEP_LIMIT: usize = 50_000_000;

pub type Defs = IndexMap<RecId, Def>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("recursion constant {0} has no definition")]
    UndefinedRec(RecId),
    #[error("definition of {0} unfolds without reaching a head")]
    NonContractive(RecId),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("comparison exceeded {0} steps")]
    Budget(usize),
}

/// Unfolds recursion constants at the head until a constructor, variable
/// or metavariable head appears. Leading binders are kept.
pub fn unfold_head(defs: &Defs, t: &Term) -> Result<Term, ExpandError> {
    let mut cur = t.clone();
    let mut rounds = 0;
    while let Body::Rec { rec, args } = &cur.body {
        let d = defs
            .get(rec)
            .ok_or_else(|| ExpandError::UndefinedRec(rec.clone()))?;
        let body = d.instantiate(args)?;
        rounds += 1;
        if rounds > defs.len() {
            return Err(ExpandError::NonContractive(rec.clone()));
        }
        cur = Term::lam(cur.binders.clone(), body);
    }
    Ok(cur)
}

/// `exp_k(M)` under `defs`. Equations play no role.
pub fn expand(defs: &Defs, t: &Term, k: usize) -> Result<BotTerm, ExpandError> {
    let mut env = Vec::new();
    expand_in(defs, t, k, &mut env)
}

fn expand_in(defs: &Defs, t: &Term, k: usize, env: &mut Vec<Var>) -> Result<BotTerm, ExpandError> {
    if k == 0 {
        return Ok(BotTerm::Bot);
    }
    let t = unfold_head(defs, t)?;
    let mark = env.len();
    env.extend(t.binders.iter().map(|b| b.var.clone()));
    let atom = |env: &Vec<Var>, v: &Var| match env.iter().rposition(|b| b == v) {
        Some(i) => Atom::Bound(i),
        None => Atom::Free(v.clone()),
    };
    let out = match &t.body {
        Body::Rigid { head, args } => {
            let head = match head {
                Head::Const(c) => BotHead::Const(c.clone()),
                Head::Var(v) => BotHead::Var(atom(env, v)),
            };
            let mut children = Vec::with_capacity(args.len());
            for a in args {
                children.push(expand_in(defs, a, k - 1, env)?);
            }
            BotTerm::Node {
                lams: t.binders.len(),
                head,
                args: children,
            }
        }
        Body::Meta { meta, mode, args } => BotTerm::Leaf {
            lams: t.binders.len(),
            meta: meta.clone(),
            mode: *mode,
            args: args.iter().map(|v| atom(env, v)).collect(),
        },
        Body::Rec { .. } => unreachable!("unfold_head leaves no recursion constant at the head"),
    };
    env.truncate(mark);
    Ok(out)
}

fn level_var(level: usize) -> Var {
    Var::new(&format!("$@{level}"))
}

/// Strips the binders of `t`, renaming them to the shared level names
/// starting at `level`.
fn open(t: &Term, level: usize) -> Result<Term, TermError> {
    let from: Vec<Var> = t.binders.iter().map(|b| b.var.clone()).collect();
    let to: Vec<Var> = (0..from.len()).map(|i| level_var(level + i)).collect();
    t.strip().rename(&from, &to)
}

/// Key for a pair of terms, invariant under injective renaming of their
/// free variables.
fn pair_key(l: &Term, r: &Term) -> Result<String, TermError> {
    let mut fv = l.free_vars();
    for v in r.free_vars() {
        if !fv.contains(&v) {
            fv.push(v);
        }
    }
    let to: Vec<Var> = (0..fv.len()).map(|i| Var::new(&format!("$#{i}"))).collect();
    let l = l.rename(&fv, &to)?;
    let r = r.rename(&fv, &to)?;
    Ok(format!("{}|{}", l.key(), r.key()))
}

fn is_rec(t: &Term) -> bool {
    matches!(t.body, Body::Rec { .. })
}

/// Compares two terms, each under its own definitions.
struct Comparator<'a> {
    left: &'a Defs,
    right: &'a Defs,
    bounded: HashMap<(String, usize), bool>,
    assumed: HashSet<String>,
    steps: usize,
}

enum Shape<'t> {
    Rigid(&'t Head, &'t [Term]),
    Flex(&'t crate::term_core::MetaId, &'t [Var]),
}

fn shape(t: &Term) -> Shape<'_> {
    match &t.body {
        Body::Rigid { head, args } => Shape::Rigid(head, args),
        Body::Meta { meta, args, .. } => Shape::Flex(meta, args),
        Body::Rec { .. } => unreachable!("compared terms are unfolded first"),
    }
}

impl<'a> Comparator<'a> {
    fn new(left: &'a Defs, right: &'a Defs) -> Self {
        Comparator {
            left,
            right,
            bounded: HashMap::new(),
            assumed: HashSet::new(),
            steps: 0,
        }
    }

    fn tick(&mut self) -> Result<(), ExpandError> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return Err(ExpandError::Budget(STEP_LIMIT));
        }
        Ok(())
    }

    /// Unfolds and opens both sides. `None` when the λ-prefixes differ.
    fn align(&self, l: &Term, r: &Term, level: usize) -> Result<Option<(Term, Term, usize)>, ExpandError> {
        let l = unfold_head(self.left, l)?;
        let r = unfold_head(self.right, r)?;
        if l.binders.len() != r.binders.len() {
            return Ok(None);
        }
        let n = l.binders.len();
        Ok(Some((open(&l, level)?, open(&r, level)?, level + n)))
    }

    /// `exp_k(l) = exp_k(r)`.
    fn agree(&mut self, l: &Term, r: &Term, k: usize, level: usize) -> Result<bool, ExpandError> {
        if k == 0 {
            return Ok(true);
        }
        self.tick()?;
        let key = (pair_key(l, r)?, k);
        if let Some(&b) = self.bounded.get(&key) {
            return Ok(b);
        }
        let out = match self.align(l, r, level)? {
            None => false,
            Some((l, r, level)) => match (shape(&l), shape(&r)) {
                (Shape::Rigid(h1, a1), Shape::Rigid(h2, a2)) => {
                    if h1 != h2 || a1.len() != a2.len() {
                        false
                    } else {
                        let mut all = true;
                        for (x, y) in a1.iter().zip(a2) {
                            if !self.agree(x, y, k - 1, level)? {
                                all = false;
                                break;
                            }
                        }
                        all
                    }
                }
                (Shape::Flex(m1, a1), Shape::Flex(m2, a2)) => m1 == m2 && a1 == a2,
                _ => false,
            },
        };
        self.bounded.insert(key, out);
        Ok(out)
    }

    /// Coinductive equality: pairs involving a recursion constant are
    /// assumed equal while they are being compared.
    fn equal(&mut self, l: &Term, r: &Term, level: usize) -> Result<bool, ExpandError> {
        self.tick()?;
        if is_rec(l) || is_rec(r) {
            let key = pair_key(l, r)?;
            if !self.assumed.insert(key) {
                return Ok(true);
            }
        }
        let Some((l, r, level)) = self.align(l, r, level)? else {
            return Ok(false);
        };
        match (shape(&l), shape(&r)) {
            (Shape::Rigid(h1, a1), Shape::Rigid(h2, a2)) => {
                if h1 != h2 || a1.len() != a2.len() {
                    return Ok(false);
                }
                for (x, y) in a1.iter().zip(a2) {
                    if !self.equal(x, y, level)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Shape::Flex(m1, a1), Shape::Flex(m2, a2)) => Ok(m1 == m2 && a1 == a2),
            _ => Ok(false),
        }
    }
}

/// Smallest depth `d ≤ k` at which the expansions differ.
pub fn first_divergence(
    left: &Defs,
    l: &Term,
    right: &Defs,
    r: &Term,
    k: usize,
) -> Result<Option<usize>, ExpandError> {
    let mut c = Comparator::new(left, right);
    if c.agree(l, r, k, 0)? {
        return Ok(None);
    }
    // Agreement at depth d implies agreement below d.
    let (mut lo, mut hi) = (0, k);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if c.agree(l, r, mid, 0)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// `exp_k(l) = exp_k(r)` for every `k`, decided coinductively.
pub fn equal_rational_in(left: &Defs, l: &Term, right: &Defs, r: &Term) -> Result<bool, ExpandError> {
    Comparator::new(left, right).equal(l, r, 0)
}

/// Both sides under the definitions of one context.
pub fn equal_rational(ctx: &UnifContext, l: &Term, r: &Term) -> Result<bool, ExpandError> {
    equal_rational_in(&ctx.defs, l, &ctx.defs, r)
}

pub fn equation_holds(ctx: &UnifContext, eq: &Equation) -> Result<bool, ExpandError> {
    equal_rational(ctx, &eq.lhs, &eq.rhs)
}

/// Equal domains and rationally equal η-long values.
pub fn subst_equal(g1: &Substitution, g2: &Substitution) -> Result<bool, ExpandError> {
    if g1.entries.len() != g2.entries.len() {
        return Ok(false);
    }
    for (m, e1) in &g1.entries {
        let Some(e2) = g2.entries.get(m) else {
            return Ok(false);
        };
        if e1.pattern.len() != e2.pattern.len() {
            return Ok(false);
        }
        if !equal_rational_in(&g1.defs, &e1.as_lambda(), &g2.defs, &e2.as_lambda())? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
