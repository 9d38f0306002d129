//! β-normal, η-long forms with the pattern restriction checked.

use std::collections::HashSet;

use crate::term_core::{primed, Binder, Body, Head, Mode, NameSupply, SimpleType, Term, Var};

use super::elab::{Tm, TypeEnv};
use super::lexer::Pos;
use super::SurfaceError;

fn free_names(t: &Tm, bound: &mut Vec<String>, out: &mut HashSet<String>) {
    match t {
        Tm::Var(n, _) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        Tm::App(f, a) => {
            free_names(f, bound, out);
            free_names(a, bound, out);
        }
        Tm::Lam { var, body, .. } => {
            bound.push(var.clone());
            free_names(body, bound, out);
            bound.pop();
        }
        Tm::Ascribe(t, _, _) => free_names(t, bound, out),
        _ => {}
    }
}

fn fv(t: &Tm) -> HashSet<String> {
    let mut out = HashSet::new();
    free_names(t, &mut Vec::new(), &mut out);
    out
}

/// Capture-avoiding `[a/x]t` on surface names.
fn subst(t: &Tm, x: &str, a: &Tm, fv_a: &HashSet<String>) -> Tm {
    match t {
        Tm::Var(n, _) if n == x => a.clone(),
        Tm::App(f, b) => Tm::app(subst(f, x, a, fv_a), subst(b, x, a, fv_a)),
        Tm::Ascribe(inner, ty, pos) => Tm::Ascribe(Box::new(subst(inner, x, a, fv_a)), ty.clone(), *pos),
        Tm::Lam { var, ty, body, pos } => {
            if var == x {
                return t.clone();
            }
            let fv_body = fv(body);
            if !fv_body.contains(x) {
                return t.clone();
            }
            let (var, body) = if fv_a.contains(var) {
                let fresh = primed(var, |s| fv_a.contains(s) || fv_body.contains(s) || s == x);
                let renamed = subst(body, var, &Tm::Var(fresh.clone(), *pos), &HashSet::from([fresh.clone()]));
                (fresh, renamed)
            } else {
                (var.clone(), (**body).clone())
            };
            Tm::Lam {
                var,
                ty: ty.clone(),
                body: Box::new(subst(&body, x, a, fv_a)),
                pos: *pos,
            }
        }
        leaf => leaf.clone(),
    }
}

/// `Some(y)` when `t` is the η-expansion of the variable `y`.
pub fn eta_contract_var(t: &Term) -> Option<Var> {
    let Body::Rigid {
        head: Head::Var(y),
        args,
    } = &t.body
    else {
        return None;
    };
    let n = t.binders.len();
    if args.len() != n || t.binders.iter().any(|b| &b.var == y) {
        return None;
    }
    for (a, b) in args.iter().zip(&t.binders) {
        if eta_contract_var(a).as_ref() != Some(&b.var) {
            return None;
        }
    }
    Some(y.clone())
}

struct Scope {
    entries: Vec<(String, Var, SimpleType)>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<&(String, Var, SimpleType)> {
        self.entries.iter().rev().find(|(n, _, _)| n == name)
    }

    /// Binds `surface`; the variable is primed if another binder in scope
    /// already uses the name, and the caller renames the body to match.
    fn bind(&mut self, surface: &str, ty: SimpleType) -> Var {
        let taken = |s: &str| self.entries.iter().any(|(_, v, _)| v.as_str() == s);
        let actual = if taken(surface) {
            Var::new(&primed(surface, taken))
        } else {
            Var::new(surface)
        };
        self.entries.push((actual.as_str().to_string(), actual.clone(), ty));
        actual
    }
}

pub struct Normalizer<'a> {
    env: &'a TypeEnv,
    supply: NameSupply,
}

impl<'a> Normalizer<'a> {
    pub fn new(env: &'a TypeEnv) -> Self {
        Normalizer {
            env,
            supply: NameSupply::new(),
        }
    }

    /// Normal form of a closed term at type `ty`.
    pub fn normalize(&mut self, t: &Tm, ty: &SimpleType) -> Result<Term, SurfaceError> {
        let mut scope = Scope { entries: Vec::new() };
        self.norm(t, ty, &mut scope)
    }

    fn norm(&mut self, t: &Tm, ty: &SimpleType, scope: &mut Scope) -> Result<Term, SurfaceError> {
        let (arg_tys, base) = ty.uncurry();
        let mark = scope.entries.len();
        let mut cur = t.clone();
        let mut binders = Vec::new();
        let mut extra = Vec::new();
        for aty in arg_tys {
            while let Tm::Ascribe(inner, _, _) = cur {
                cur = *inner;
            }
            match cur {
                Tm::Lam { var, body, .. } => {
                    let actual = scope.bind(&var, aty.clone());
                    binders.push(Binder::new(actual.clone(), aty));
                    cur = if actual.as_str() == var {
                        *body
                    } else {
                        subst(&body, &var, &Tm::Var(actual.as_str().to_string(), Pos::default()), &HashSet::from([actual.as_str().to_string()]))
                    };
                }
                other => {
                    let w = self.supply.fresh_var("w");
                    scope.entries.push((w.as_str().to_string(), w.clone(), aty.clone()));
                    binders.push(Binder::new(w.clone(), aty));
                    extra.push(Tm::Var(w.as_str().to_string(), other.pos()));
                    cur = other;
                }
            }
        }
        let body = self.norm_base(cur, extra, &SimpleType::Base(base), scope);
        scope.entries.truncate(mark);
        Ok(Term::lam(binders, body?))
    }

    fn head_type(&self, t: &Tm, scope: &Scope) -> Result<SimpleType, SurfaceError> {
        Ok(match t {
            Tm::Var(n, pos) => scope
                .lookup(n)
                .map(|e| e.2.clone())
                .ok_or_else(|| SurfaceError::Unknown {
                    pos: *pos,
                    name: n.clone(),
                })?,
            Tm::Const(c, _) => self.env.sig.consts[c].clone(),
            Tm::Rec(r, _) => self.env.recs[r].clone(),
            Tm::Meta(m, pos) => self.env.metas.get(m).cloned().ok_or_else(|| SurfaceError::Ambiguous {
                pos: *pos,
                name: m.to_string(),
            })?,
            _ => unreachable!("heads are atoms"),
        })
    }

    fn norm_base(
        &mut self,
        t: Tm,
        extra: Vec<Tm>,
        base: &SimpleType,
        scope: &mut Scope,
    ) -> Result<Term, SurfaceError> {
        let mut head = t;
        let mut args = extra;
        loop {
            match head {
                Tm::App(f, a) => {
                    args.insert(0, *a);
                    head = *f;
                }
                Tm::Ascribe(inner, _, _) => head = *inner,
                Tm::Lam { var, body, .. } if !args.is_empty() => {
                    let a = args.remove(0);
                    let fv_a = fv(&a);
                    head = subst(&body, &var, &a, &fv_a);
                }
                _ => break,
            }
        }
        let pos = head.pos();
        if matches!(head, Tm::Lam { .. }) {
            return Err(SurfaceError::TypeClash {
                pos,
                msg: format!("abstraction where {base} is expected"),
            });
        }
        let hty = self.head_type(&head, scope)?;
        let (arg_tys, _) = hty.uncurry();
        if arg_tys.len() != args.len() {
            return Err(SurfaceError::TypeClash {
                pos,
                msg: format!("expected {} arguments, found {}", arg_tys.len(), args.len()),
            });
        }
        let mut nargs = Vec::with_capacity(args.len());
        for (a, aty) in args.iter().zip(&arg_tys) {
            nargs.push((self.norm(a, aty, scope)?, a.pos()));
        }
        let vars_of = |what: &str, nargs: &[(Term, Pos)]| -> Result<Vec<Var>, SurfaceError> {
            nargs
                .iter()
                .map(|(a, p)| {
                    eta_contract_var(a).ok_or_else(|| SurfaceError::NonPattern {
                        pos: *p,
                        msg: format!("argument of {what} must be a bound variable"),
                    })
                })
                .collect()
        };
        Ok(match head {
            Tm::Var(n, _) => {
                let actual = scope.lookup(&n).expect("looked up above").1.clone();
                Term::var(actual, nargs.into_iter().map(|a| a.0).collect())
            }
            Tm::Const(c, _) => Term::constant(c, nargs.into_iter().map(|a| a.0).collect()),
            Tm::Meta(m, _) => {
                let vars = vars_of(&format!("metavariable {m}"), &nargs)?;
                for (i, v) in vars.iter().enumerate() {
                    if vars[..i].contains(v) {
                        return Err(SurfaceError::NonPattern {
                            pos: nargs[i].1,
                            msg: format!("variable {v} repeated under metavariable {m}"),
                        });
                    }
                }
                Term::meta(m, Mode::Rec, vars)
            }
            Tm::Rec(r, _) => {
                let vars = vars_of(&format!("recursion constant {r}"), &nargs)?;
                Term::rec(r, vars)
            }
            _ => unreachable!(),
        })
    }
}

/// Converts a term back to resolved syntax, for renormalization.
pub fn to_tm(t: &Term) -> Tm {
    let p = Pos::default();
    let var = |v: &Var| Tm::Var(v.as_str().to_string(), p);
    let spine = |head: Tm, args: Vec<Tm>| args.into_iter().fold(head, Tm::app);
    let body = match &t.body {
        Body::Rigid { head, args } => {
            let h = match head {
                Head::Const(c) => Tm::Const(c.clone(), p),
                Head::Var(v) => var(v),
            };
            spine(h, args.iter().map(to_tm).collect())
        }
        Body::Meta { meta, args, .. } => spine(Tm::Meta(meta.clone(), p), args.iter().map(var).collect()),
        Body::Rec { rec, args } => spine(Tm::Rec(rec.clone(), p), args.iter().map(var).collect()),
    };
    t.binders.iter().rev().fold(body, |acc, b| Tm::Lam {
        var: b.var.as_str().to_string(),
        ty: Some(b.ty.clone()),
        body: Box::new(acc),
        pos: p,
    })
}
