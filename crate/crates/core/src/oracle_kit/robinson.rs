use std::collections::{HashMap, HashSet};

use crate::surface::ConcreteContext;
use crate::term_core::{Body, ConstName, Head, MetaId, RecId, SubstEntry, Substitution, Term};

use super::OracleError;

#[derive(Clone, Debug, PartialEq)]
pub enum RobinsonOutcome {
    /// Idempotent, with every metavariable it binds in its domain.
    Unifier(Substitution),
    OccursFail(MetaId),
    Clash(ConstName, ConstName),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Tree {
    Meta(MetaId),
    App(ConstName, Vec<Tree>),
}

struct Reader<'a> {
    ctx: &'a ConcreteContext,
    inlined: HashMap<RecId, Tree>,
    active: HashSet<RecId>,
}

impl Reader<'_> {
    fn read(&mut self, t: &Term) -> Result<Tree, OracleError> {
        if !t.binders.is_empty() {
            return Err(OracleError::NotFirstOrder);
        }
        match &t.body {
            Body::Meta { meta, args, .. } if args.is_empty() => Ok(Tree::Meta(meta.clone())),
            Body::Rigid { head: Head::Const(c), args } => {
                let args = args.iter().map(|a| self.read(a)).collect::<Result<_, _>>()?;
                Ok(Tree::App(c.clone(), args))
            }
            Body::Rec { rec, args } if args.is_empty() => {
                if let Some(t) = self.inlined.get(rec) {
                    return Ok(t.clone());
                }
                let d = self.ctx.defs.get(rec).ok_or_else(|| OracleError::UndefinedRec(rec.clone()))?;
                if !d.params.is_empty() {
                    return Err(OracleError::NotFirstOrder);
                }
                if !self.active.insert(rec.clone()) {
                    return Err(OracleError::Recursive(rec.clone()));
                }
                let tree = self.read(&d.body)?;
                self.active.remove(rec);
                self.inlined.insert(rec.clone(), tree.clone());
                Ok(tree)
            }
            _ => Err(OracleError::NotFirstOrder),
        }
    }
}

#[derive(Default)]
struct Bindings(HashMap<MetaId, Tree>);

impl Bindings {
    fn walk<'t>(&'t self, mut t: &'t Tree) -> &'t Tree {
        // Metavariable chains are acyclic: a metavariable is only bound to
        // a term it does not walk to.
        while let Tree::Meta(m) = t {
            match self.0.get(m) {
                Some(u) => t = u,
                None => break,
            }
        }
        t
    }

    /// Bindings may be cyclic after an occurs failure, hence `seen`.
    fn occurs(&self, m: &MetaId, t: &Tree, seen: &mut HashSet<MetaId>) -> bool {
        match t {
            Tree::Meta(n) if n == m => true,
            Tree::Meta(n) => match self.0.get(n) {
                Some(u) if seen.insert(n.clone()) => self.occurs(m, u, seen),
                _ => false,
            },
            Tree::App(_, args) => args.iter().any(|a| self.occurs(m, a, seen)),
        }
    }

    fn resolve(&self, t: &Tree) -> Tree {
        match self.walk(t) {
            Tree::Meta(n) => Tree::Meta(n.clone()),
            Tree::App(c, args) => Tree::App(c.clone(), args.iter().map(|a| self.resolve(a)).collect()),
        }
    }
}

/// Syntactic unification with occurs check. Non-recursive definitions
/// are inlined first. An occurs failure does not stop the run: the binding
/// is made anyway, so a clash anywhere in the problem is reported as one.
pub fn robinson_acyclic(ctx: &ConcreteContext) -> Result<RobinsonOutcome, OracleError> {
    let mut reader = Reader {
        ctx,
        inlined: HashMap::new(),
        active: HashSet::new(),
    };
    let mut work = Vec::new();
    for e in &ctx.eqs {
        work.push((reader.read(&e.lhs)?, reader.read(&e.rhs)?));
    }
    for d in ctx.defs.values() {
        if !d.body.binders.is_empty() || !d.params.is_empty() {
            return Err(OracleError::NotFirstOrder);
        }
    }
    for r in ctx.defs.keys() {
        reader.read(&Term::rec(r.clone(), vec![]))?;
    }
    work.reverse();
    let mut b = Bindings::default();
    let mut seen = HashSet::new();
    let mut occurs_fail = None;
    while let Some((l, r)) = work.pop() {
        let (l, r) = (b.walk(&l).clone(), b.walk(&r).clone());
        if !seen.insert((l.clone(), r.clone())) {
            continue;
        }
        match (l, r) {
            (Tree::Meta(m), Tree::Meta(n)) if m == n => {}
            (Tree::Meta(m), t) | (t, Tree::Meta(m)) => {
                if occurs_fail.is_none() && b.occurs(&m, &t, &mut HashSet::new()) {
                    occurs_fail = Some(m.clone());
                }
                b.0.insert(m, t);
            }
            (Tree::App(c, xs), Tree::App(d, ys)) => {
                if c != d || xs.len() != ys.len() {
                    return Ok(RobinsonOutcome::Clash(c, d));
                }
                work.extend(xs.into_iter().zip(ys).rev());
            }
        }
    }
    if let Some(m) = occurs_fail {
        return Ok(RobinsonOutcome::OccursFail(m));
    }
    let mut g = Substitution::new();
    let mut range = Vec::new();
    for (m, info) in &ctx.metas {
        if !b.0.contains_key(m) {
            continue;
        }
        let value = b.resolve(&Tree::Meta(m.clone()));
        collect_metas(&value, &mut range);
        g.entries.insert(m.clone(), SubstEntry::new(info.mode, info.ty.clone(), vec![], to_term(ctx, &value)));
    }
    for m in range {
        if let Some(info) = ctx.metas.get(&m) {
            g.free_metas.insert(m, info.clone());
        }
    }
    Ok(RobinsonOutcome::Unifier(g))
}

fn collect_metas(t: &Tree, out: &mut Vec<MetaId>) {
    match t {
        Tree::Meta(m) if !out.contains(m) => out.push(m.clone()),
        Tree::Meta(_) => {}
        Tree::App(_, args) => args.iter().for_each(|a| collect_metas(a, out)),
    }
}

fn to_term(ctx: &ConcreteContext, t: &Tree) -> Term {
    match t {
        Tree::Meta(m) => {
            let mode = ctx.metas.get(m).map(|i| i.mode).unwrap_or(crate::term_core::Mode::Rec);
            Term::meta(m.clone(), mode, vec![])
        }
        Tree::App(c, args) => Term::constant(c.clone(), args.iter().map(|a| to_term(ctx, a)).collect()),
    }
}
