//! Conclusions under existential parameters and the subsumption check
//! that guards rules introducing fresh names.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

use crate::term_core::{Body, Def, Equation, Head, MetaId, MetaInfo, RecId, Term, UnifContext, Var};

use super::closure::Closure;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Hole {
    Var(Var),
    Rec(RecId),
    Meta(MetaId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parameter {0:?} is listed twice")]
pub struct DuplicateHole(pub Hole);

/// Equations and definitions whose holes may be instantiated: variable
/// holes by a renaming, the others by any entity of the same kind.
#[derive(Clone, Debug, Default)]
pub struct Schema {
    holes: Vec<Hole>,
    pub eqs: Vec<Equation>,
    pub defs: Vec<(RecId, Def)>,
    /// Types of metavariable holes, checked when the target is typed.
    pub metas: IndexMap<MetaId, MetaInfo>,
}

impl Schema {
    pub fn new(holes: Vec<Hole>, eqs: Vec<Equation>, defs: Vec<(RecId, Def)>) -> Result<Self, DuplicateHole> {
        let mut seen = HashSet::new();
        for h in &holes {
            if !seen.insert(h.clone()) {
                return Err(DuplicateHole(h.clone()));
            }
        }
        Ok(Schema {
            holes,
            eqs,
            defs,
            metas: IndexMap::new(),
        })
    }

    pub fn with_metas(mut self, metas: IndexMap<MetaId, MetaInfo>) -> Self {
        self.metas = metas;
        self
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }
}

#[derive(Clone, Default)]
struct Inst {
    vars: HashMap<Var, Var>,
    recs: HashMap<RecId, RecId>,
    metas: HashMap<MetaId, MetaId>,
}

struct Matcher<'a> {
    closure: &'a Closure,
    defs: &'a IndexMap<RecId, Def>,
    metas: &'a IndexMap<MetaId, MetaInfo>,
    schema: &'a Schema,
    var_holes: HashSet<Var>,
    rec_holes: HashSet<RecId>,
    meta_holes: HashSet<MetaId>,
    /// Free variables of the schema that are not holes.
    fixed: HashSet<Var>,
}

type Bound = Vec<(Var, Var)>;

impl Matcher<'_> {
    fn var(&self, p: &Var, t: &Var, inst: &mut Inst, bound: &Bound) -> bool {
        let pi = bound.iter().rposition(|(a, _)| a == p);
        let ti = bound.iter().rposition(|(_, b)| b == t);
        match (pi, ti) {
            (Some(i), Some(j)) => i == j,
            (None, None) => {
                if !self.var_holes.contains(p) {
                    return p == t;
                }
                if let Some(img) = inst.vars.get(p) {
                    return img == t;
                }
                if self.fixed.contains(t) || inst.vars.values().any(|v| v == t) {
                    return false;
                }
                inst.vars.insert(p.clone(), t.clone());
                true
            }
            _ => false,
        }
    }

    fn vars(&self, ps: &[Var], ts: &[Var], inst: &mut Inst, bound: &Bound) -> bool {
        ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| self.var(p, t, inst, bound))
    }

    fn meta(&self, p: &MetaId, t: &MetaId, inst: &mut Inst) -> bool {
        if !self.meta_holes.contains(p) {
            return p == t;
        }
        if let Some(img) = inst.metas.get(p) {
            return img == t;
        }
        if let (Some(a), Some(b)) = (self.schema.metas.get(p), self.metas.get(t)) {
            if a != b {
                return false;
            }
        }
        inst.metas.insert(p.clone(), t.clone());
        true
    }

    fn rec(&self, p: &RecId, t: &RecId, inst: &mut Inst) -> bool {
        if !self.rec_holes.contains(p) {
            return p == t;
        }
        if let Some(img) = inst.recs.get(p) {
            return img == t;
        }
        inst.recs.insert(p.clone(), t.clone());
        true
    }

    fn term(&self, p: &Term, t: &Term, inst: &mut Inst, bound: &mut Bound) -> bool {
        if p.binders.len() != t.binders.len() {
            return false;
        }
        let mark = bound.len();
        for (a, b) in p.binders.iter().zip(&t.binders) {
            if a.ty != b.ty {
                bound.truncate(mark);
                return false;
            }
            bound.push((a.var.clone(), b.var.clone()));
        }
        let ok = match (&p.body, &t.body) {
            (Body::Rigid { head: hp, args: ap }, Body::Rigid { head: ht, args: at }) => {
                let heads = match (hp, ht) {
                    (Head::Const(a), Head::Const(b)) => a == b,
                    (Head::Var(a), Head::Var(b)) => self.var(a, b, inst, bound),
                    _ => false,
                };
                heads && ap.len() == at.len() && ap.iter().zip(at).all(|(a, b)| self.term(a, b, inst, bound))
            }
            (
                Body::Meta { meta: mp, mode: op, args: ap },
                Body::Meta { meta: mt, mode: ot, args: at },
            ) => op == ot && self.meta(mp, mt, inst) && self.vars(ap, at, inst, bound),
            (Body::Rec { rec: rp, args: ap }, Body::Rec { rec: rt, args: at }) => {
                self.rec(rp, rt, inst) && self.vars(ap, at, inst, bound)
            }
            _ => false,
        };
        bound.truncate(mark);
        ok
    }

    fn eq_items(&self, i: usize, inst: &Inst) -> bool {
        let Some(e) = self.schema.eqs.get(i) else {
            return self.def_items(0, inst);
        };
        for &a in self.closure.with_skeleton(&e.lhs.skeleton()) {
            let mut ia = inst.clone();
            if !self.term(&e.lhs, self.closure.term(a), &mut ia, &mut Vec::new()) {
                continue;
            }
            for &b in self.closure.class(a) {
                let mut ib = ia.clone();
                if self.term(&e.rhs, self.closure.term(b), &mut ib, &mut Vec::new()) && self.eq_items(i + 1, &ib) {
                    return true;
                }
            }
        }
        false
    }

    fn def_items(&self, i: usize, inst: &Inst) -> bool {
        let Some((name, d)) = self.schema.defs.get(i) else {
            return true;
        };
        let candidates: Vec<&RecId> = if self.rec_holes.contains(name) {
            match inst.recs.get(name) {
                Some(r) => vec![r],
                None => self.defs.keys().collect(),
            }
        } else {
            vec![name]
        };
        for r in candidates {
            let Some(target) = self.defs.get(r) else {
                continue;
            };
            if target.ty != d.ty {
                continue;
            }
            let mut next = inst.clone();
            if self.rec(name, r, &mut next)
                && self.term(&d.as_lambda(), &target.as_lambda(), &mut next, &mut Vec::new())
                && self.def_items(i + 1, &next)
            {
                return true;
            }
        }
        false
    }
}

/// Whether some instantiation of `s` is already present in the closure.
pub(crate) fn matches_in(
    closure: &Closure,
    defs: &IndexMap<RecId, Def>,
    metas: &IndexMap<MetaId, MetaInfo>,
    s: &Schema,
) -> bool {
    let mut m = Matcher {
        closure,
        defs,
        metas,
        schema: s,
        var_holes: HashSet::new(),
        rec_holes: HashSet::new(),
        meta_holes: HashSet::new(),
        fixed: HashSet::new(),
    };
    for h in &s.holes {
        match h {
            Hole::Var(v) => m.var_holes.insert(v.clone()),
            Hole::Rec(r) => m.rec_holes.insert(r.clone()),
            Hole::Meta(g) => m.meta_holes.insert(g.clone()),
        };
    }
    for e in &s.eqs {
        for v in e.lhs.free_vars().into_iter().chain(e.rhs.free_vars()) {
            if !m.var_holes.contains(&v) {
                m.fixed.insert(v);
            }
        }
    }
    m.eq_items(0, &Inst::default())
}

/// `match_schema(Δ, s)`: is some instance of `s` in Δ (closed under
/// symmetry and transitivity)?
pub fn match_schema(ctx: &UnifContext, s: &Schema) -> bool {
    matches_in(&Closure::of_context(ctx), &ctx.defs, &ctx.metas, s)
}
