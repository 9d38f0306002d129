use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::names::{primed, ConstName, MetaId, RecId, Var};
use super::types::SimpleType;

/// Metavariable mode: contractive metavariables stand for terms with a
/// constructor or variable head, recursive ones for recursion constants.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "CON")]
    Con,
    #[serde(rename = "REC")]
    Rec,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Con => "CON",
            Mode::Rec => "REC",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Binder {
    pub var: Var,
    pub ty: SimpleType,
}

impl Binder {
    pub fn new(var: Var, ty: SimpleType) -> Self {
        Binder { var, ty }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Head {
    Const(ConstName),
    Var(Var),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Body {
    /// `h N1 .. Nn` with a constructor or variable head.
    Rigid { head: Head, args: Vec<Term> },
    /// `H y1 .. yn`: arguments are distinct variables.
    Meta {
        meta: MetaId,
        mode: Mode,
        args: Vec<Var>,
    },
    /// `r y1 .. yn`.
    Rec { rec: RecId, args: Vec<Var> },
}

/// `λx̄. body` in β-normal, η-long form.
///
/// The same representation carries concrete terms (arbitrarily nested) and
/// flattened terms; [`Term::class`] and the `is_flat_*` predicates tell them
/// apart.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub binders: Vec<Binder>,
    pub body: Body,
}

/// Which grammar class a term belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TermClass {
    Contractive,
    Recursive,
}

impl Term {
    pub fn rigid(head: Head, args: Vec<Term>) -> Self {
        Term {
            binders: Vec::new(),
            body: Body::Rigid { head, args },
        }
    }

    pub fn constant(c: ConstName, args: Vec<Term>) -> Self {
        Term::rigid(Head::Const(c), args)
    }

    pub fn var(v: Var, args: Vec<Term>) -> Self {
        Term::rigid(Head::Var(v), args)
    }

    pub fn meta(meta: MetaId, mode: Mode, args: Vec<Var>) -> Self {
        Term {
            binders: Vec::new(),
            body: Body::Meta { meta, mode, args },
        }
    }

    pub fn rec(rec: RecId, args: Vec<Var>) -> Self {
        Term {
            binders: Vec::new(),
            body: Body::Rec { rec, args },
        }
    }

    /// Prepends binders, merging with any binders already present.
    pub fn lam(mut binders: Vec<Binder>, t: Term) -> Self {
        binders.extend(t.binders);
        Term {
            binders,
            body: t.body,
        }
    }

    /// The term without its λ-prefix.
    pub fn strip(&self) -> Term {
        Term {
            binders: Vec::new(),
            body: self.body.clone(),
        }
    }

    pub fn class(&self) -> TermClass {
        match &self.body {
            Body::Rigid { .. } => TermClass::Contractive,
            Body::Meta { mode: Mode::Con, .. } => TermClass::Contractive,
            Body::Meta { mode: Mode::Rec, .. } | Body::Rec { .. } => TermClass::Recursive,
        }
    }

    /// Flattened contractive term: `λx̄. h N̄` with recursive arguments, or
    /// `λx̄. H^CON ȳ`.
    pub fn is_flat_contractive(&self) -> bool {
        match &self.body {
            Body::Rigid { args, .. } => args.iter().all(Term::is_flat_recursive),
            Body::Meta { mode, args, .. } => *mode == Mode::Con && distinct(args),
            Body::Rec { .. } => false,
        }
    }

    /// Flattened recursive term: `λx̄. r ȳ` or `λx̄. H^REC ȳ`.
    pub fn is_flat_recursive(&self) -> bool {
        match &self.body {
            Body::Meta { mode, args, .. } => *mode == Mode::Rec && distinct(args),
            Body::Rec { args, .. } => distinct(args),
            Body::Rigid { .. } => false,
        }
    }

    /// True when every metavariable and recursion constant is applied to
    /// pairwise distinct variables.
    pub fn is_pattern_clean(&self) -> bool {
        match &self.body {
            Body::Rigid { args, .. } => args.iter().all(Term::is_pattern_clean),
            Body::Meta { args, .. } | Body::Rec { args, .. } => distinct(args),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut bound = Vec::new();
        self.collect_fv(&mut bound, &mut seen, &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<Var>, seen: &mut HashSet<Var>, out: &mut Vec<Var>) {
        let mark = bound.len();
        bound.extend(self.binders.iter().map(|b| b.var.clone()));
        let mut visit = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        };
        match &self.body {
            Body::Rigid { head, args } => {
                if let Head::Var(v) = head {
                    visit(v, bound);
                }
                for a in args {
                    a.collect_fv(bound, seen, out);
                }
            }
            Body::Meta { args, .. } | Body::Rec { args, .. } => {
                for v in args {
                    visit(v, bound);
                }
            }
        }
        bound.truncate(mark);
    }

    pub fn free_var_set(&self) -> HashSet<Var> {
        self.free_vars().into_iter().collect()
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Metavariables with their mode and width, first occurrence first.
    pub fn metas(&self) -> Vec<(MetaId, Mode, usize)> {
        let mut out: Vec<(MetaId, Mode, usize)> = Vec::new();
        self.visit_bodies(&mut |b| {
            if let Body::Meta { meta, mode, args } = b {
                if !out.iter().any(|(m, _, _)| m == meta) {
                    out.push((meta.clone(), *mode, args.len()));
                }
            }
        });
        out
    }

    pub fn recs(&self) -> Vec<RecId> {
        let mut out: Vec<RecId> = Vec::new();
        self.visit_bodies(&mut |b| {
            if let Body::Rec { rec, .. } = b {
                if !out.contains(rec) {
                    out.push(rec.clone());
                }
            }
        });
        out
    }

    pub fn has_binders_anywhere(&self) -> bool {
        if !self.binders.is_empty() {
            return true;
        }
        match &self.body {
            Body::Rigid { args, .. } => args.iter().any(Term::has_binders_anywhere),
            _ => false,
        }
    }

    pub fn visit_bodies(&self, f: &mut impl FnMut(&Body)) {
        f(&self.body);
        if let Body::Rigid { args, .. } = &self.body {
            for a in args {
                a.visit_bodies(f);
            }
        }
    }

    /// Capture-avoiding simultaneous renaming `[to/from]`.
    pub fn rename(&self, from: &[Var], to: &[Var]) -> Result<Term, super::TermError> {
        if from.len() != to.len() {
            return Err(super::TermError::ArityMismatch {
                expected: from.len(),
                found: to.len(),
            });
        }
        let map: HashMap<Var, Var> = from.iter().cloned().zip(to.iter().cloned()).collect();
        Ok(self.rename_map(&map))
    }

    /// Capture-avoiding renaming of free variables by `map`. Binders that
    /// would capture an image variable are freshened with primes.
    pub fn rename_map(&self, map: &HashMap<Var, Var>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        let fv = self.free_var_set();
        let live: HashMap<Var, Var> = map
            .iter()
            .filter(|(k, v)| fv.contains(*k) && k != v)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if live.is_empty() {
            return self.clone();
        }
        self.rename_live(live, &fv)
    }

    fn rename_live(&self, mut map: HashMap<Var, Var>, fv: &HashSet<Var>) -> Term {
        let mut binders = Vec::with_capacity(self.binders.len());
        for b in &self.binders {
            map.remove(&b.var);
            let clashes = map.values().any(|v| *v == b.var);
            if clashes {
                let taken = |s: &str| {
                    map.values().any(|v| v.as_str() == s)
                        || fv.iter().any(|v| v.as_str() == s)
                        || self.binders.iter().any(|o| o.var.as_str() == s)
                };
                let fresh = Var::new(&primed(b.var.as_str(), taken));
                map.insert(b.var.clone(), fresh.clone());
                binders.push(Binder::new(fresh, b.ty.clone()));
            } else {
                binders.push(b.clone());
            }
        }
        let rn = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let body = match &self.body {
            Body::Rigid { head, args } => Body::Rigid {
                head: match head {
                    Head::Var(v) => Head::Var(rn(v)),
                    h => h.clone(),
                },
                args: args.iter().map(|a| a.rename_map(&map)).collect(),
            },
            Body::Meta { meta, mode, args } => Body::Meta {
                meta: meta.clone(),
                mode: *mode,
                args: args.iter().map(rn).collect(),
            },
            Body::Rec { rec, args } => Body::Rec {
                rec: rec.clone(),
                args: args.iter().map(rn).collect(),
            },
        };
        Term { binders, body }
    }

    /// Renames recursion constants (not variables).
    pub fn rename_recs(&self, map: &HashMap<RecId, RecId>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        let body = match &self.body {
            Body::Rigid { head, args } => Body::Rigid {
                head: head.clone(),
                args: args.iter().map(|a| a.rename_recs(map)).collect(),
            },
            Body::Rec { rec, args } => Body::Rec {
                rec: map.get(rec).cloned().unwrap_or_else(|| rec.clone()),
                args: args.clone(),
            },
            b => b.clone(),
        };
        Term {
            binders: self.binders.clone(),
            body,
        }
    }

    /// Canonical key: equal keys iff α-equivalent.
    pub fn key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s, &mut Vec::new(), false);
        s
    }

    /// Shape key: like [`Term::key`] but free variables, metavariables and
    /// recursion constants are abstracted away. Used to index candidates
    /// for schema matching.
    pub fn skeleton(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s, &mut Vec::new(), true);
        s
    }

    fn write_key(&self, out: &mut String, bound: &mut Vec<Var>, abstracted: bool) {
        let mark = bound.len();
        for b in &self.binders {
            out.push('\\');
            bound.push(b.var.clone());
        }
        let var = |out: &mut String, bound: &Vec<Var>, v: &Var| {
            match bound.iter().rposition(|b| b == v) {
                Some(i) => {
                    let _ = write!(out, "#{i}");
                }
                None if abstracted => out.push('*'),
                None => {
                    let _ = write!(out, "v:{}", v.as_str());
                }
            }
        };
        match &self.body {
            Body::Rigid { head, args } => {
                out.push('(');
                match head {
                    Head::Const(c) => {
                        let _ = write!(out, "c:{}", c.as_str());
                    }
                    Head::Var(v) => var(out, bound, v),
                }
                for a in args {
                    out.push(' ');
                    a.write_key(out, bound, abstracted);
                }
                out.push(')');
            }
            Body::Meta { meta, mode, args } => {
                out.push('(');
                if abstracted {
                    let _ = write!(out, "?{mode}");
                } else {
                    let _ = write!(out, "m:{}", meta.as_str());
                }
                for v in args {
                    out.push(' ');
                    var(out, bound, v);
                }
                out.push(')');
            }
            Body::Rec { rec, args } => {
                out.push('(');
                if abstracted {
                    out.push('#');
                } else {
                    let _ = write!(out, "r:{}", rec.as_str());
                }
                for v in args {
                    out.push(' ');
                    var(out, bound, v);
                }
                out.push(')');
            }
        }
        bound.truncate(mark);
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.key() == other.key()
    }

    /// Total nodes, for size bounds in tests and generators.
    pub fn size(&self) -> usize {
        match &self.body {
            Body::Rigid { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }
}

pub(crate) fn distinct(vs: &[Var]) -> bool {
    let set: HashSet<&Var> = vs.iter().collect();
    set.len() == vs.len()
}

/// Set-based `xs ⊆ ys`.
pub fn subset(xs: &[Var], ys: &[Var]) -> bool {
    xs.iter().all(|x| ys.contains(x))
}

/// Set-based proper subset.
pub fn proper_subset(xs: &[Var], ys: &[Var]) -> bool {
    subset(xs, ys) && !subset(ys, xs)
}

/// `xs ∩ ys`, keeping the order of `xs`.
pub fn intersect(xs: &[Var], ys: &[Var]) -> Vec<Var> {
    xs.iter().filter(|x| ys.contains(x)).cloned().collect()
}

pub fn same_set(xs: &[Var], ys: &[Var]) -> bool {
    subset(xs, ys) && subset(ys, xs)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.binders {
            write!(f, "λ{}. ", b.var)?;
        }
        let atom = |f: &mut fmt::Formatter<'_>, a: &Term| -> fmt::Result {
            let simple = a.binders.is_empty()
                && match &a.body {
                    Body::Rigid { args, .. } => args.is_empty(),
                    Body::Meta { args, .. } | Body::Rec { args, .. } => args.is_empty(),
                };
            if simple {
                write!(f, " {a}")
            } else {
                write!(f, " ({a})")
            }
        };
        match &self.body {
            Body::Rigid { head, args } => {
                match head {
                    Head::Const(c) => write!(f, "{c}")?,
                    Head::Var(v) => write!(f, "{v}")?,
                }
                for a in args {
                    atom(f, a)?;
                }
                Ok(())
            }
            Body::Meta { meta, args, .. } => {
                write!(f, "{meta}")?;
                for v in args {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
            Body::Rec { rec, args } => {
                write!(f, "{rec}")?;
                for v in args {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn e() -> SimpleType {
        SimpleType::base("element")
    }

    fn s_xy(x: &str, y: &str) -> Term {
        Term::meta(MetaId::new("S"), Mode::Rec, vec![v(x), v(y)])
    }

    fn get(arg: Term) -> Term {
        Term::constant(ConstName::new("get"), vec![arg])
    }

    #[test]
    fn identity_renaming() {
        let t = Term::meta(MetaId::new("H"), Mode::Rec, vec![v("x"), v("y")]);
        assert_eq!(t.rename(&[v("x"), v("y")], &[v("x"), v("y")]).unwrap(), t);
    }

    #[test]
    fn rename_under_binder() {
        let t = get(Term::lam(vec![Binder::new(v("y"), e())], s_xy("x", "y")));
        let r = t.rename(&[v("x")], &[v("z")]).unwrap();
        let want = get(Term::lam(vec![Binder::new(v("y"), e())], s_xy("z", "y")));
        assert_eq!(r, want);
    }

    #[test]
    fn rename_freshens_capturing_binder() {
        let t = Term::lam(
            vec![Binder::new(v("y"), e())],
            Term::meta(MetaId::new("H"), Mode::Rec, vec![v("x"), v("y")]),
        );
        let r = t.rename(&[v("x")], &[v("y")]).unwrap();
        assert_eq!(r.binders[0].var.as_str(), "y'");
        assert_eq!(r.free_vars(), vec![v("y")]);
        match &r.body {
            Body::Meta { args, .. } => assert_eq!(args, &vec![v("y"), v("y'")]),
            _ => panic!(),
        }
    }

    #[test]
    fn rename_arity_mismatch() {
        let t = s_xy("x", "y");
        assert!(t.rename(&[v("x")], &[]).is_err());
    }

    #[test]
    fn alpha_keys() {
        let a = Term::lam(vec![Binder::new(v("x"), e())], s_xy("x", "z"));
        let b = Term::lam(vec![Binder::new(v("w"), e())], s_xy("w", "z"));
        let c = Term::lam(vec![Binder::new(v("w"), e())], s_xy("w", "q"));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
        assert_eq!(a.skeleton(), c.skeleton());
    }

    #[test]
    fn free_vars_first_occurrence() {
        let t = Term::constant(
            ConstName::new("put"),
            vec![
                Term::var(v("b"), vec![]),
                Term::lam(vec![Binder::new(v("a"), e())], s_xy("a", "c")),
            ],
        );
        assert_eq!(t.free_vars(), vec![v("b"), v("c")]);
    }

    #[test]
    fn set_operations() {
        let xs = [v("a"), v("b"), v("c")];
        let ys = [v("c"), v("a")];
        assert_eq!(intersect(&xs, &ys), vec![v("a"), v("c")]);
        assert!(proper_subset(&ys, &xs));
        assert!(!proper_subset(&xs, &xs));
    }
}
