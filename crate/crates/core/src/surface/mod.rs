//! Concrete syntax: parsing, type inference, normalization and printing.

mod elab;
mod lexer;
mod normal;
mod printer;
mod syntax;

use indexmap::IndexMap;
use thiserror::Error;

use crate::term_core::{Body, Def, Equation, MetaId, MetaInfo, Mode, RecId, Signature, SimpleType, SubstEntry, Term};

pub use elab::{infer_types, ParsedDef, ParsedEquation, ParsedProblem, Tm, TypeEnv, TypedProblem};
pub use lexer::Pos;
pub use normal::{eta_contract_var, to_tm, Normalizer};
pub use printer::{print_problem, print_substitution, print_term, Namer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unknown identifier `{name}`")]
    Unknown { pos: Pos, name: String },
    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: type clash: {msg}")]
    TypeClash { pos: Pos, msg: String },
    #[error("{pos}: cannot determine the type of `{name}`")]
    Ambiguous { pos: Pos, name: String },
    #[error("{pos}: non-pattern argument: {msg}")]
    NonPattern { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

/// Equations and definitions in normal form, before flattening. Terms may
/// nest arbitrarily; recursion constants may take repeated variables.
#[derive(Clone, Debug, Default)]
pub struct ConcreteContext {
    pub eqs: Vec<Equation>,
    pub defs: IndexMap<RecId, Def>,
    pub metas: IndexMap<MetaId, MetaInfo>,
}

impl ConcreteContext {
    pub fn type_env(&self, sig: &Signature) -> TypeEnv {
        TypeEnv {
            sig: sig.clone(),
            recs: self.defs.iter().map(|(r, d)| (r.clone(), d.ty.clone())).collect(),
            metas: self.metas.iter().map(|(m, i)| (m.clone(), i.ty.clone())).collect(),
        }
    }

    /// Alpha-equivalence of equations (in order) and definitions.
    pub fn alpha_eq(&self, other: &ConcreteContext) -> bool {
        self.eqs.len() == other.eqs.len()
            && self.eqs.iter().zip(&other.eqs).all(|(a, b)| {
                a.lhs.alpha_eq(&b.lhs) && a.rhs.alpha_eq(&b.rhs)
            })
            && self.defs.len() == other.defs.len()
            && self.defs.iter().all(|(r, d)| {
                other
                    .defs
                    .get(r)
                    .is_some_and(|e| d.ty == e.ty && d.as_lambda().alpha_eq(&e.as_lambda()))
            })
            && self.metas == other.metas
    }
}

/// A substitution in concrete form: values may nest.
#[derive(Clone, Debug, Default)]
pub struct ConcreteSubst {
    pub entries: IndexMap<MetaId, SubstEntry>,
    pub defs: IndexMap<RecId, Def>,
    pub free_metas: IndexMap<MetaId, MetaInfo>,
}

/// Parses and resolves a problem file.
pub fn parse_problem(text: &str) -> Result<ParsedProblem, SurfaceError> {
    elab::resolve_problem(&syntax::parse_items(text)?)
}

fn normalize_def(n: &mut Normalizer, name: &RecId, d: &ParsedDef) -> Result<Def, SurfaceError> {
    let t = n.normalize(&d.body, &d.ty)?;
    if !matches!(t.body, Body::Rigid { .. }) {
        return Err(SurfaceError::Invalid {
            pos: d.pos,
            msg: format!("the body of {name} must start with a constructor or a bound variable"),
        });
    }
    let (params, body) = (t.binders.clone(), t.strip());
    Ok(Def::new(params, body, SimpleType::Base(d.ty.result_base())))
}

/// Normal forms for every definition and equation of a typed problem.
pub fn normalize_problem(p: &TypedProblem) -> Result<(Signature, ConcreteContext), SurfaceError> {
    let mut n = Normalizer::new(&p.env);
    let mut ctx = ConcreteContext::default();
    for (name, d) in &p.defs {
        ctx.defs.insert(name.clone(), normalize_def(&mut n, name, d)?);
    }
    for (e, ty) in &p.eqs {
        let lhs = n.normalize(&e.lhs, ty)?;
        let rhs = n.normalize(&e.rhs, ty)?;
        ctx.eqs.push(Equation::new(lhs, rhs));
    }
    ctx.metas = p
        .env
        .metas
        .iter()
        .map(|(m, ty)| {
            (
                m.clone(),
                MetaInfo {
                    mode: Mode::Rec,
                    ty: ty.clone(),
                },
            )
        })
        .collect();
    Ok((p.env.sig.clone(), ctx))
}

/// Parse, infer and normalize.
pub fn load_problem(text: &str) -> Result<(Signature, ConcreteContext), SurfaceError> {
    normalize_problem(&infer_types(&parse_problem(text)?)?)
}

/// Normalizes an already normalized context again. Normalization is
/// idempotent, so the result is α-equivalent to the input.
pub fn renormalize(sig: &Signature, ctx: &ConcreteContext) -> Result<ConcreteContext, SurfaceError> {
    let env = ctx.type_env(sig);
    let mut n = Normalizer::new(&env);
    let mut out = ConcreteContext {
        metas: ctx.metas.clone(),
        ..ConcreteContext::default()
    };
    for (r, d) in &ctx.defs {
        let pd = ParsedDef {
            ty: d.ty.clone(),
            body: to_tm(&d.as_lambda()),
            pos: Pos::default(),
        };
        out.defs.insert(r.clone(), normalize_def(&mut n, r, &pd)?);
    }
    for e in &ctx.eqs {
        let ty = term_type(&env, &e.lhs).ok_or_else(|| SurfaceError::Invalid {
            pos: Pos::default(),
            msg: format!("cannot type {}", e.lhs),
        })?;
        out.eqs.push(Equation::new(
            n.normalize(&to_tm(&e.lhs), &ty)?,
            n.normalize(&to_tm(&e.rhs), &ty)?,
        ));
    }
    Ok(out)
}

/// Type of a normal term, read off its binders and head.
pub fn term_type(env: &TypeEnv, t: &Term) -> Option<SimpleType> {
    fn base(env: &TypeEnv, t: &Term, scope: &mut Vec<(crate::term_core::Var, SimpleType)>) -> Option<SimpleType> {
        scope.extend(t.binders.iter().map(|b| (b.var.clone(), b.ty.clone())));
        let hty = match &t.body {
            Body::Rigid { head, .. } => match head {
                crate::term_core::Head::Const(c) => env.sig.consts.get(c)?.clone(),
                crate::term_core::Head::Var(v) => scope.iter().rev().find(|(w, _)| w == v)?.1.clone(),
            },
            Body::Meta { meta, .. } => env.metas.get(meta)?.clone(),
            Body::Rec { rec, .. } => env.recs.get(rec)?.clone(),
        };
        Some(SimpleType::Base(hty.result_base()))
    }
    let b = base(env, t, &mut Vec::new())?;
    Some(SimpleType::arrows(t.binders.iter().map(|b| b.ty.clone()), b))
}

/// Parses `H := TERM.` assignments and definitions against a problem's
/// signature and metavariables. Capitalized identifiers that are not
/// metavariables of the problem become free metavariables.
pub fn parse_substitution(
    text: &str,
    sig: &Signature,
    metas: &IndexMap<MetaId, MetaInfo>,
) -> Result<ConcreteSubst, SurfaceError> {
    let known: IndexMap<MetaId, SimpleType> = metas.iter().map(|(m, i)| (m.clone(), i.ty.clone())).collect();
    let items = syntax::parse_items(text)?;
    let parsed = elab::resolve_substitution(&items, sig, &known)?;
    let typed = infer_types(&parsed)?;
    let mut n = Normalizer::new(&typed.env);
    let mut out = ConcreteSubst::default();
    for (name, d) in &typed.defs {
        out.defs.insert(name.clone(), normalize_def(&mut n, name, d)?);
    }
    for (m, value, _) in &typed.assigns {
        let ty = &typed.env.metas[m];
        let t = n.normalize(value, ty)?;
        let mode = metas.get(m).map_or(Mode::Rec, |i| i.mode);
        out.entries.insert(
            m.clone(),
            SubstEntry::new(mode, ty.clone(), t.binders.clone(), t.strip()),
        );
    }
    for (m, ty) in &typed.env.metas {
        if !out.entries.contains_key(m) && !metas.contains_key(m) {
            out.free_metas.insert(
                m.clone(),
                MetaInfo {
                    mode: Mode::Rec,
                    ty: ty.clone(),
                },
            );
        }
    }
    Ok(out)
}
