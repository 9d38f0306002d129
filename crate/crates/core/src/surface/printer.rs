//! Rendering back to the concrete syntax.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::term_core::{primed, Body, Def, Head, Kind, MetaId, RecId, Signature, SubstEntry, Sym, Term, Var};

use super::{term_type, ConcreteContext};

/// Assigns every generated name a printable one that clashes with no user
/// name. Metavariable names are kept capitalized.
#[derive(Default)]
pub struct Namer {
    taken: HashSet<String>,
    chosen: HashMap<Sym, String>,
}

impl Namer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves the user-written names occurring in `t`.
    pub fn reserve_term(&mut self, t: &Term) {
        for b in &t.binders {
            self.reserve(&b.var.0);
        }
        match &t.body {
            Body::Rigid { head, args } => {
                match head {
                    Head::Const(c) => self.reserve(&c.0),
                    Head::Var(v) => self.reserve(&v.0),
                }
                args.iter().for_each(|a| self.reserve_term(a));
            }
            Body::Meta { meta, args, .. } => {
                self.reserve(&meta.0);
                args.iter().for_each(|v| self.reserve(&v.0));
            }
            Body::Rec { rec, args } => {
                self.reserve(&rec.0);
                args.iter().for_each(|v| self.reserve(&v.0));
            }
        }
    }

    pub fn reserve_sig(&mut self, sig: &Signature) {
        for t in sig.types.keys() {
            self.reserve(&t.0);
        }
        for c in sig.consts.keys() {
            self.reserve(&c.0);
        }
    }

    pub fn reserve_def(&mut self, name: &RecId, d: &Def) {
        self.reserve(&name.0);
        self.reserve_term(&d.as_lambda());
    }

    fn reserve(&mut self, s: &Sym) {
        if !s.is_generated() {
            self.taken.insert(s.as_str().to_string());
        }
    }

    fn name(&mut self, s: &Sym, capital: bool) -> String {
        if !s.is_generated() {
            return s.as_str().to_string();
        }
        if let Some(n) = self.chosen.get(s) {
            return n.clone();
        }
        let mut base = s.display_name().to_string();
        if capital && !base.starts_with(char::is_uppercase) {
            base = format!("M{base}");
        }
        if !capital && base.starts_with(char::is_uppercase) {
            base = format!("v{base}");
        }
        let name = if self.taken.contains(&base) {
            primed(&base, |c| self.taken.contains(c))
        } else {
            base
        };
        self.taken.insert(name.clone());
        self.chosen.insert(s.clone(), name.clone());
        name
    }

    fn is_atomic(t: &Term) -> bool {
        t.binders.is_empty()
            && match &t.body {
                Body::Rigid { args, .. } => args.is_empty(),
                Body::Meta { args, .. } | Body::Rec { args, .. } => args.is_empty(),
            }
    }

    /// Surface syntax for `t`; binders carry type annotations when
    /// `annotate` is set.
    pub fn term(&mut self, t: &Term, annotate: bool) -> String {
        let mut out = String::new();
        for b in &t.binders {
            let v = self.name(&b.var.0, false);
            if annotate {
                let _ = write!(out, "[{v}:{}] ", b.ty);
            } else {
                let _ = write!(out, "[{v}] ");
            }
        }
        match &t.body {
            Body::Rigid { head, args } => {
                out.push_str(&match head {
                    Head::Const(c) => self.name(&c.0, false),
                    Head::Var(v) => self.name(&v.0, false),
                });
                for a in args {
                    let s = self.term(a, annotate);
                    if Self::is_atomic(a) {
                        let _ = write!(out, " {s}");
                    } else {
                        let _ = write!(out, " ({s})");
                    }
                }
            }
            Body::Meta { meta, args, .. } => {
                out.push_str(&self.name(&meta.0, true));
                for v in args {
                    let _ = write!(out, " {}", self.name(&v.0, false));
                }
            }
            Body::Rec { rec, args } => {
                out.push_str(&self.name(&rec.0, false));
                for v in args {
                    let _ = write!(out, " {}", self.name(&v.0, false));
                }
            }
        }
        out
    }

    pub fn def(&mut self, name: &RecId, d: &Def, annotate: bool) -> String {
        let n = self.name(&name.0, false);
        format!("{n} : {} = {}.", d.ty, self.term(&d.as_lambda(), annotate))
    }

    pub fn assignment(&mut self, meta: &MetaId, e: &SubstEntry, annotate: bool) -> String {
        let m = self.name(&meta.0, true);
        format!("{m} := {}.", self.term(&e.as_lambda(), annotate))
    }

    pub fn meta(&mut self, meta: &MetaId) -> String {
        self.name(&meta.0, true)
    }

    pub fn rec(&mut self, rec: &RecId) -> String {
        self.name(&rec.0, false)
    }

    pub fn var(&mut self, v: &Var) -> String {
        self.name(&v.0, false)
    }
}

pub fn print_term(t: &Term) -> String {
    let mut n = Namer::new();
    n.reserve_term(t);
    n.term(t, false)
}

/// A whole problem file. Binders are annotated so the output re-parses to
/// the same context.
pub fn print_problem(sig: &Signature, ctx: &ConcreteContext) -> String {
    let mut n = Namer::new();
    n.reserve_sig(sig);
    for (r, d) in &ctx.defs {
        n.reserve_def(r, d);
    }
    for e in &ctx.eqs {
        n.reserve_term(&e.lhs);
        n.reserve_term(&e.rhs);
    }
    let mut out = String::new();
    for (t, k) in &sig.types {
        let k = match k {
            Kind::Type => "type",
            Kind::Cotype => "cotype",
        };
        let _ = writeln!(out, "{t} : {k}.");
    }
    for (c, ty) in &sig.consts {
        let _ = writeln!(out, "{c} : {ty}.");
    }
    for (r, d) in &ctx.defs {
        let _ = writeln!(out, "{}", n.def(r, d, true));
    }
    let env = ctx.type_env(sig);
    for e in &ctx.eqs {
        let mut l = n.term(&e.lhs, true);
        let flex = |t: &Term| matches!(t.body, Body::Meta { .. });
        if flex(&e.lhs) && flex(&e.rhs) {
            if let Some(ty) = term_type(&env, &e.lhs) {
                l = format!("({l} : {ty})");
            }
        }
        let r = n.term(&e.rhs, true);
        let _ = writeln!(out, "?- {l} = {r}.");
    }
    out
}

/// `H := TERM.` lines followed by the definitions they use.
pub fn print_substitution(
    entries: &IndexMap<MetaId, SubstEntry>,
    defs: &IndexMap<RecId, Def>,
    namer: &mut Namer,
) -> String {
    for (m, e) in entries {
        namer.reserve(&m.0);
        namer.reserve_term(&e.as_lambda());
    }
    for (r, d) in defs {
        namer.reserve_def(r, d);
    }
    let mut out = String::new();
    for (m, e) in entries {
        let _ = writeln!(out, "{}", namer.assignment(m, e, false));
    }
    for (r, d) in defs {
        let _ = writeln!(out, "{}", namer.def(r, d, false));
    }
    out
}
