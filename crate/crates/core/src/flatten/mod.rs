//! Flattening concrete contexts into one-level-deep definitions.

use std::collections::HashMap;

use indexmap::IndexMap;
use thiserror::Error;

use crate::surface::{ConcreteContext, ConcreteSubst};
use crate::term_core::{
    Binder, Body, Def, Equation, Head, Mode, NameSupply, RecId, Signature, SimpleType, SubstEntry,
    Substitution, Term, TermError, TypeName, UnifContext, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("recursion constant {0} has no definition")]
    UndefinedRec(RecId),
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("unknown constructor {0}")]
    UnknownConst(String),
    #[error("a contractive term cannot have a {0} head")]
    NotContractive(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Threads the name supply and collects the generated definitions.
pub struct Flattener<'a> {
    sig: &'a Signature,
    /// Concrete definitions, for collapsing repeated arguments.
    concrete: IndexMap<RecId, Def>,
    supply: &'a mut NameSupply,
    /// Output definitions in allocation order; filled once flattened.
    out: Vec<(RecId, Option<Def>)>,
    collapsed: HashMap<(RecId, Vec<usize>), RecId>,
    pending: Vec<(RecId, Def)>,
}

type Scope = Vec<Binder>;

impl<'a> Flattener<'a> {
    pub fn new(sig: &'a Signature, concrete: &IndexMap<RecId, Def>, supply: &'a mut NameSupply) -> Self {
        Flattener {
            sig,
            concrete: concrete.clone(),
            supply,
            out: Vec::new(),
            collapsed: HashMap::new(),
            pending: Vec::new(),
        }
    }

    fn lookup<'s>(scope: &'s Scope, v: &Var) -> Result<&'s Binder, FlattenError> {
        scope
            .iter()
            .rev()
            .find(|b| &b.var == v)
            .ok_or_else(|| FlattenError::Unbound(v.clone()))
    }

    fn result_base(&self, t: &Term, scope: &Scope) -> Result<TypeName, FlattenError> {
        match &t.body {
            Body::Rigid { head: Head::Const(c), .. } => self
                .sig
                .const_type(c)
                .map(SimpleType::result_base)
                .ok_or_else(|| FlattenError::UnknownConst(c.to_string())),
            Body::Rigid { head: Head::Var(v), .. } => Ok(Self::lookup(scope, v)?.ty.result_base()),
            _ => Err(FlattenError::NotContractive("non-rigid".into())),
        }
    }

    /// `T ▷^REC N`: rigid terms are abstracted over their free variables
    /// into a fresh definition. Binders of `t` that the body ignores are
    /// abstracted too, after the free ones.
    pub fn flatten_rec(&mut self, t: &Term, scope: &mut Scope) -> Result<Term, FlattenError> {
        let mark = scope.len();
        scope.extend(t.binders.iter().cloned());
        let out = match &t.body {
            Body::Meta { meta, args, .. } => Ok(Term::meta(meta.clone(), Mode::Rec, args.clone())),
            Body::Rec { rec, args } => self.patternize(rec, args).map(|(r, a)| Term::rec(r, a)),
            Body::Rigid { .. } => {
                let body = t.strip();
                let mut zs = body.free_vars();
                for b in &t.binders {
                    if !zs.contains(&b.var) {
                        zs.push(b.var.clone());
                    }
                }
                let params = zs
                    .iter()
                    .map(|z| Self::lookup(scope, z).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                let base = self.result_base(&body, scope)?;
                let r = self.supply.fresh_rec("r");
                let slot = self.out.len();
                self.out.push((r.clone(), None));
                let mut inner: Scope = params.clone();
                let u = self.flatten_con(&body, &mut inner)?;
                self.out[slot].1 = Some(Def::new(params, u, SimpleType::Base(base)));
                Ok(Term::rec(r, zs))
            }
        };
        scope.truncate(mark);
        Ok(Term::lam(t.binders.clone(), out?))
    }

    /// `h T̄ ▷^CON h N̄`.
    pub fn flatten_con(&mut self, t: &Term, scope: &mut Scope) -> Result<Term, FlattenError> {
        let Body::Rigid { head, args } = &t.body else {
            return Err(FlattenError::NotContractive(t.to_string()));
        };
        let mark = scope.len();
        scope.extend(t.binders.iter().cloned());
        let mut flat = Vec::with_capacity(args.len());
        for a in args {
            flat.push(self.flatten_rec(a, scope)?);
        }
        scope.truncate(mark);
        Ok(Term::lam(t.binders.clone(), Term::rigid(head.clone(), flat)))
    }

    /// `r x̄` with repeats in `x̄` becomes `t ȳ` for a fresh `t` defined as
    /// `r`'s body with the repeated parameters identified; `ȳ` lists each
    /// variable of `x̄` once.
    pub fn patternize(&mut self, r: &RecId, args: &[Var]) -> Result<(RecId, Vec<Var>), FlattenError> {
        let mut distinct: Vec<Var> = Vec::new();
        let mut shape = Vec::with_capacity(args.len());
        for a in args {
            match distinct.iter().position(|d| d == a) {
                Some(i) => shape.push(i),
                None => {
                    shape.push(distinct.len());
                    distinct.push(a.clone());
                }
            }
        }
        if distinct.len() == args.len() {
            return Ok((r.clone(), args.to_vec()));
        }
        let key = (r.clone(), shape.clone());
        if let Some(t) = self.collapsed.get(&key) {
            return Ok((t.clone(), distinct));
        }
        let d = self
            .concrete
            .get(r)
            .cloned()
            .ok_or_else(|| FlattenError::UndefinedRec(r.clone()))?;
        let t = self.supply.fresh_rec("t");
        self.collapsed.insert(key, t.clone());
        let ws: Vec<Binder> = distinct
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let i = shape.iter().position(|&s| s == j).expect("every class has a member");
                Binder::new(self.supply.fresh_var("w"), d.params[i].ty.clone())
            })
            .collect();
        let to: Vec<Var> = shape.iter().map(|&j| ws[j].var.clone()).collect();
        let body = d.body.rename(&d.param_vars(), &to)?;
        let collapsed = Def::new(ws, body, SimpleType::Base(d.ty.result_base()));
        self.concrete.insert(t.clone(), collapsed.clone());
        self.pending.push((t.clone(), collapsed));
        Ok((t, distinct))
    }

    /// Flattens a concrete definition body under its parameters.
    pub fn flatten_def(&mut self, name: &RecId, d: &Def) -> Result<(), FlattenError> {
        let slot = self.out.len();
        self.out.push((name.clone(), None));
        let mut scope = d.params.clone();
        let u = self.flatten_con(&d.body, &mut scope)?;
        self.out[slot].1 = Some(Def {
            ty: d.ty.clone(),
            params: d.params.clone(),
            body: u,
        });
        Ok(())
    }

    /// Flattens the definitions created by [`Flattener::patternize`].
    fn drain_pending(&mut self) -> Result<(), FlattenError> {
        while let Some((t, d)) = self.pending.pop() {
            self.flatten_def(&t, &d)?;
        }
        Ok(())
    }

    fn finish(self) -> IndexMap<RecId, Def> {
        self.out
            .into_iter()
            .map(|(r, d)| (r, d.expect("every allocated definition is filled")))
            .collect()
    }
}

/// `Δ_c ▷ Δ` together with the flattened image of each concrete equation,
/// in order.
pub fn flatten_with_images(
    sig: &Signature,
    ctx: &ConcreteContext,
    supply: &mut NameSupply,
) -> Result<(UnifContext, Vec<Equation>), FlattenError> {
    let mut f = Flattener::new(sig, &ctx.defs, supply);
    let mut images = Vec::with_capacity(ctx.eqs.len());
    for e in &ctx.eqs {
        let l = f.flatten_rec(&e.lhs, &mut Vec::new())?;
        let r = f.flatten_rec(&e.rhs, &mut Vec::new())?;
        images.push(Equation::new(l, r));
    }
    for (name, d) in &ctx.defs {
        f.flatten_def(name, d)?;
    }
    f.drain_pending()?;
    let mut out = UnifContext::new();
    out.defs = f.finish();
    for e in &images {
        out.add_equation(e.clone());
    }
    out.metas = ctx.metas.clone();
    Ok((out, images))
}

/// `Δ_c ▷ Δ`.
pub fn flatten(sig: &Signature, ctx: &ConcreteContext) -> Result<UnifContext, FlattenError> {
    flatten_with_images(sig, ctx, &mut NameSupply::new()).map(|(c, _)| c)
}

/// Flattens a concrete substitution: each value `λx̄. T` becomes
/// `H x̄ ≐ N` (or `≐ U` for a contractive metavariable).
pub fn flatten_substitution(
    sig: &Signature,
    g: &ConcreteSubst,
    supply: &mut NameSupply,
) -> Result<Substitution, FlattenError> {
    let mut f = Flattener::new(sig, &g.defs, supply);
    let mut entries = IndexMap::new();
    for (m, e) in &g.entries {
        let mut scope = e.pattern.clone();
        let value = match e.mode {
            Mode::Rec => f.flatten_rec(&e.value, &mut scope)?,
            Mode::Con => f.flatten_con(&e.value, &mut scope)?,
        };
        entries.insert(m.clone(), SubstEntry::new(e.mode, e.ty.clone(), e.pattern.clone(), value));
    }
    for (name, d) in &g.defs {
        f.flatten_def(name, d)?;
    }
    f.drain_pending()?;
    Ok(Substitution {
        entries,
        defs: f.finish(),
        free_metas: g.free_metas.clone(),
    })
}

#[cfg(test)]
mod tests;
