//! The substitution witnessing that `unif(Δ)` is more general than a
//! given unifier.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::expansion::{subst_equal, unfold_head, Defs};
use crate::term_core::{
    compose, restrict, Binder, Body, Head, MetaId, MetaInfo, NameSupply, SubstEntry, Substitution, Term, UnifContext, Var,
};

use super::UnifError;

const STEP_LIMIT: usize = 1_000_000;

struct Matcher<'a> {
    left: &'a Defs,
    right: &'a Defs,
    holes: &'a IndexMap<MetaId, MetaInfo>,
    found: IndexMap<MetaId, SubstEntry>,
    seen: HashSet<String>,
    steps: usize,
}

type Env = Vec<(Var, Var)>;

fn image(env: &Env, x: &Var) -> Option<Var> {
    let i = env.iter().rposition(|(a, _)| a == x)?;
    let y = &env[i].1;
    // The image must not be shadowed by a later right-hand binder.
    (env.iter().rposition(|(_, b)| b == y) == Some(i)).then(|| y.clone())
}

impl Matcher<'_> {
    fn go(&mut self, l: &Term, r: &Term, env: &mut Env) -> Result<(), UnifError> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return Err(UnifError::NotAnInstance("matching did not finish".into()));
        }
        if l.binders.len() != r.binders.len() {
            return Err(UnifError::NotAnInstance(format!("{l} against {r}")));
        }
        let mark = env.len();
        env.extend(l.binders.iter().zip(&r.binders).map(|(a, b)| (a.var.clone(), b.var.clone())));
        let out = self.body(&l.strip(), &r.strip(), env);
        env.truncate(mark);
        out
    }

    fn body(&mut self, l: &Term, r: &Term, env: &mut Env) -> Result<(), UnifError> {
        let scope: Vec<String> = l.free_vars().iter().map(|x| format!("{x}:{:?}", image(env, x))).collect();
        if !self.seen.insert(format!("{}|{}|{}", l.key(), r.key(), scope.join(","))) {
            return Ok(());
        }
        if let Body::Meta { meta, args, .. } = &l.body {
            if let Some(info) = self.holes.get(meta) {
                return self.assign(meta, info, args, r, env);
            }
        }
        let (lu, ru) = (unfold_head(self.left, l)?, unfold_head(self.right, r)?);
        let clash = || UnifError::NotAnInstance(format!("{l} against {r}"));
        match (&lu.body, &ru.body) {
            (Body::Meta { .. }, _) if !lu.binders.is_empty() => Err(clash()),
            (Body::Meta { meta, .. }, _) if self.holes.contains_key(meta) => self.body(&lu, &ru, env),
            (Body::Meta { meta: m1, args: a1, .. }, Body::Meta { meta: m2, args: a2, .. }) => {
                let mapped: Option<Vec<Var>> = a1.iter().map(|x| image(env, x)).collect();
                if m1 == m2 && mapped.as_deref() == Some(&a2[..]) {
                    Ok(())
                } else {
                    Err(clash())
                }
            }
            (Body::Rigid { head: h1, args: a1 }, Body::Rigid { head: h2, args: a2 }) => {
                let heads = match (h1, h2) {
                    (Head::Const(c), Head::Const(d)) => c == d,
                    (Head::Var(x), Head::Var(y)) => image(env, x).as_ref() == Some(y),
                    _ => false,
                };
                if !heads || a1.len() != a2.len() {
                    return Err(clash());
                }
                for (a, b) in a1.iter().zip(a2) {
                    self.go(a, b, env)?;
                }
                Ok(())
            }
            _ => Err(clash()),
        }
    }

    fn assign(&mut self, meta: &MetaId, info: &MetaInfo, args: &[Var], r: &Term, env: &Env) -> Result<(), UnifError> {
        if self.found.contains_key(meta) {
            return Ok(());
        }
        let images: Option<Vec<Var>> = args.iter().map(|x| image(env, x)).collect();
        let images = images.ok_or_else(|| UnifError::NotAnInstance(format!("{meta} applied outside its scope")))?;
        if r.free_vars().iter().any(|v| !images.contains(v)) {
            return Err(UnifError::NotAnInstance(format!("{meta} would capture variables of {r}")));
        }
        let (tys, _) = info.ty.uncurry();
        let pattern = images.into_iter().zip(tys).map(|(v, ty)| Binder::new(v, ty)).collect();
        self.found
            .insert(meta.clone(), SubstEntry::new(info.mode, info.ty.clone(), pattern, r.clone()));
        Ok(())
    }
}

/// `Γ′` with `compose(Γ_mgu, Γ′)` agreeing with `g2` on `dom(g2)`: each
/// metavariable left in the unifier's range is mapped to the part of `g2`
/// it stands for, or to itself when `g2` does not constrain it.
pub fn mediate(ctx: &UnifContext, mgu: &Substitution, g2: &Substitution) -> Result<Substitution, UnifError> {
    let mut holes: IndexMap<MetaId, MetaInfo> = IndexMap::new();
    for (m, mode, _) in mgu.range_metas() {
        let info = mgu
            .free_metas
            .get(&m)
            .or_else(|| ctx.metas.get(&m))
            .cloned()
            .or_else(|| mgu.entries.get(&m).map(|e| MetaInfo { mode, ty: e.ty.clone() }))
            .ok_or_else(|| UnifError::UnknownMeta(m.clone()))?;
        holes.insert(m, info);
    }
    let mut matcher = Matcher {
        left: &mgu.defs,
        right: &g2.defs,
        holes: &holes,
        found: IndexMap::new(),
        seen: HashSet::new(),
        steps: 0,
    };
    for (m, e2) in &g2.entries {
        if let Some(e1) = mgu.entries.get(m) {
            matcher.go(&e1.as_lambda(), &e2.as_lambda(), &mut Vec::new())?;
        }
    }
    let mut found = matcher.found;
    let mut supply = NameSupply::new();
    for (m, info) in &holes {
        if found.contains_key(m) {
            continue;
        }
        let (tys, _) = info.ty.uncurry();
        let pattern: Vec<Binder> = tys.into_iter().map(|ty| Binder::new(supply.fresh_var("z"), ty)).collect();
        let value = Term::meta(m.clone(), info.mode, pattern.iter().map(|b| b.var.clone()).collect());
        found.insert(m.clone(), SubstEntry::new(info.mode, info.ty.clone(), pattern, value));
    }
    let mut out = Substitution::new();
    out.entries = found;
    out.defs = g2.defs.clone();
    out.free_metas = g2.free_metas.clone();
    for (m, info) in &holes {
        if out.range_metas().iter().any(|(r, _, _)| r == m) {
            out.free_metas.entry(m.clone()).or_insert_with(|| info.clone());
        }
    }
    Ok(out)
}

/// Each unifier is the other up to a renaming of the metavariables left in
/// their ranges.
pub fn equivalent(g1: &Substitution, g2: &Substitution) -> Result<bool, UnifError> {
    let (mut d1, mut d2) = (g1.domain(), g2.domain());
    d1.sort();
    d2.sort();
    if d1 != d2 {
        return Ok(false);
    }
    let empty = UnifContext::new();
    for (a, b) in [(g1, g2), (g2, g1)] {
        let m = match mediate(&empty, a, b) {
            Ok(m) => m,
            Err(UnifError::NotAnInstance(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let renaming = m.entries.values().all(|e| {
            e.value.binders.is_empty() && matches!(&e.value.body, Body::Meta { args, .. } if *args == e.pattern_vars())
        });
        if !renaming || !subst_equal(&restrict(&compose(a, &m)?, &d1), b)? {
            return Ok(false);
        }
    }
    Ok(true)
}
