use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;

use super::names::{primed, MetaId, RecId};
use super::term::{Binder, Body, Mode, Term};
use super::types::SimpleType;
use super::TermError;

/// `r =_d λz̄. body`. `params` covers the whole arity of `ty`, so `body`
/// has base type.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Def {
    pub ty: SimpleType,
    pub params: Vec<Binder>,
    pub body: Term,
}

impl Def {
    pub fn new(params: Vec<Binder>, body: Term, result: SimpleType) -> Self {
        let ty = SimpleType::arrows(params.iter().map(|b| b.ty.clone()), result);
        Def { ty, params, body }
    }

    pub fn width(&self) -> usize {
        self.params.len()
    }

    pub fn as_lambda(&self) -> Term {
        Term::lam(self.params.clone(), self.body.clone())
    }

    pub fn param_vars(&self) -> Vec<super::Var> {
        self.params.iter().map(|b| b.var.clone()).collect()
    }

    /// The body instantiated at `args`.
    pub fn instantiate(&self, args: &[super::Var]) -> Result<Term, TermError> {
        self.body.rename(&self.param_vars(), args)
    }

    pub fn rename_recs(&self, map: &HashMap<RecId, RecId>) -> Def {
        Def {
            ty: self.ty.clone(),
            params: self.params.clone(),
            body: self.body.rename_recs(map),
        }
    }
}

/// An unordered pair of terms of the same class.
#[derive(Clone, Debug)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    /// Orientation-independent α-canonical key.
    pub fn key(&self) -> (String, String) {
        let (a, b) = (self.lhs.key(), self.rhs.key());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Deterministic orientation for printing.
    pub fn canonical(&self) -> Equation {
        if self.lhs.key() <= self.rhs.key() {
            self.clone()
        } else {
            Equation::new(self.rhs.clone(), self.lhs.clone())
        }
    }

    pub fn rename_recs(&self, map: &HashMap<RecId, RecId>) -> Equation {
        Equation::new(self.lhs.rename_recs(map), self.rhs.rename_recs(map))
    }
}

impl PartialEq for Equation {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Equation {}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≐ {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MetaInfo {
    pub mode: Mode,
    pub ty: SimpleType,
}

impl MetaInfo {
    pub fn width(&self) -> usize {
        self.ty.arity()
    }
}

/// A unification context: equations, recursive definitions and the
/// contradiction flag.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnifContext {
    pub eqs: Vec<Equation>,
    pub defs: IndexMap<RecId, Def>,
    pub metas: IndexMap<MetaId, MetaInfo>,
    pub contra: bool,
}

impl UnifContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an equation unless an α-equivalent one (either orientation)
    /// is present. Returns whether it was new.
    pub fn add_equation(&mut self, eq: Equation) -> bool {
        let k = eq.key();
        if self.eqs.iter().any(|e| e.key() == k) {
            return false;
        }
        self.eqs.push(eq);
        true
    }

    /// Metavariables occurring in equations or definitions.
    pub fn uv(&self) -> Vec<MetaId> {
        let mut out: Vec<MetaId> = Vec::new();
        let mut push = |t: &Term| {
            for (m, _, _) in t.metas() {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        };
        for e in &self.eqs {
            push(&e.lhs);
            push(&e.rhs);
        }
        for d in self.defs.values() {
            push(&d.body);
        }
        out
    }

    pub fn mentioned_recs(&self) -> Vec<RecId> {
        let mut out: Vec<RecId> = Vec::new();
        let mut push = |t: &Term| {
            for r in t.recs() {
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        };
        for e in &self.eqs {
            push(&e.lhs);
            push(&e.rhs);
        }
        for d in self.defs.values() {
            push(&d.body);
        }
        out
    }

    /// Checks the structural invariants of a flattened context: closed,
    /// contractive definitions; defined recursion constants; class-uniform
    /// equations; consistent metavariable widths.
    pub fn check_well_formed(&self) -> Result<(), TermError> {
        for (r, d) in &self.defs {
            if !d.as_lambda().is_closed() {
                return Err(TermError::OpenDef(r.clone()));
            }
            if !d.body.is_flat_contractive() {
                return Err(TermError::NonContractiveDef(r.clone()));
            }
        }
        for r in self.mentioned_recs() {
            if !self.defs.contains_key(&r) {
                return Err(TermError::UndefinedRec(r));
            }
        }
        for e in &self.eqs {
            let flat = |t: &Term| t.is_flat_contractive() || t.is_flat_recursive();
            if e.lhs.class() != e.rhs.class() || !flat(&e.lhs) || !flat(&e.rhs) {
                return Err(TermError::MixedEquation(e.to_string()));
            }
        }
        self.check_widths()
    }

    pub fn check_widths(&self) -> Result<(), TermError> {
        let check = |t: &Term| -> Result<(), TermError> {
            for (m, _, w) in t.metas() {
                if let Some(info) = self.metas.get(&m) {
                    if info.width() != w {
                        return Err(TermError::WidthMismatch {
                            meta: m,
                            expected: info.width(),
                            found: w,
                        });
                    }
                }
            }
            Ok(())
        };
        for e in &self.eqs {
            check(&e.lhs)?;
            check(&e.rhs)?;
        }
        for d in self.defs.values() {
            check(&d.body)?;
        }
        Ok(())
    }

    pub fn rename_recs(&self, map: &HashMap<RecId, RecId>) -> UnifContext {
        UnifContext {
            eqs: self.eqs.iter().map(|e| e.rename_recs(map)).collect(),
            defs: self
                .defs
                .iter()
                .map(|(r, d)| {
                    (
                        map.get(r).cloned().unwrap_or_else(|| r.clone()),
                        d.rename_recs(map),
                    )
                })
                .collect(),
            metas: self.metas.clone(),
            contra: self.contra,
        }
    }

    /// True when no binders and no pattern arguments occur anywhere.
    pub fn is_first_order(&self) -> bool {
        let fo = |t: &Term| {
            !t.has_binders_anywhere() && {
                let mut ok = true;
                t.visit_bodies(&mut |b| match b {
                    Body::Meta { args, .. } | Body::Rec { args, .. } if !args.is_empty() => {
                        ok = false
                    }
                    _ => {}
                });
                ok
            }
        };
        self.eqs.iter().all(|e| fo(&e.lhs) && fo(&e.rhs))
            && self.defs.values().all(|d| d.params.is_empty() && fo(&d.body))
    }
}

/// Renaming for the recursion constants of `defs` that collide with
/// `taken`, choosing primed names that avoid both.
pub fn rename_apart<'a>(
    defs: impl IntoIterator<Item = &'a RecId>,
    taken: &HashSet<RecId>,
) -> HashMap<RecId, RecId> {
    let ours: Vec<RecId> = defs.into_iter().cloned().collect();
    let mut used: HashSet<String> = taken.iter().map(|r| r.as_str().to_string()).collect();
    used.extend(ours.iter().map(|r| r.as_str().to_string()));
    let mut map = HashMap::new();
    for r in ours {
        if taken.contains(&r) {
            let fresh = primed(r.as_str(), |s| used.contains(s));
            used.insert(fresh.clone());
            map.insert(r, RecId::new(&fresh));
        }
    }
    map
}

/// Union of two contexts; recursion constants of `d2` that clash with
/// `d1` are renamed consistently throughout `d2`.
pub fn join_contexts(d1: &UnifContext, d2: &UnifContext) -> UnifContext {
    let taken: HashSet<RecId> = d1.defs.keys().cloned().collect();
    let map = rename_apart(d2.defs.keys(), &taken);
    let d2 = d2.rename_recs(&map);
    let mut out = d1.clone();
    for e in d2.eqs {
        out.add_equation(e);
    }
    for (r, d) in d2.defs {
        out.defs.insert(r, d);
    }
    for (m, info) in d2.metas {
        out.metas.entry(m).or_insert(info);
    }
    out.contra |= d2.contra;
    out
}
