//! Name resolution and simple-type inference.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use indexmap::IndexMap;

use crate::term_core::{ConstName, MetaId, RecId, Signature, SimpleType, TypeName};

use super::lexer::Pos;
use super::syntax::{DeclBody, Item, RawTerm, RawType};
use super::SurfaceError;

/// A term after name resolution. Bound variables keep their surface names.
#[derive(Clone, Debug, PartialEq)]
pub enum Tm {
    Var(String, Pos),
    Const(ConstName, Pos),
    Rec(RecId, Pos),
    Meta(MetaId, Pos),
    App(Box<Tm>, Box<Tm>),
    Lam {
        var: String,
        ty: Option<SimpleType>,
        body: Box<Tm>,
        pos: Pos,
    },
    Ascribe(Box<Tm>, SimpleType, Pos),
}

impl Tm {
    pub fn pos(&self) -> Pos {
        match self {
            Tm::Var(_, p) | Tm::Const(_, p) | Tm::Rec(_, p) | Tm::Meta(_, p) => *p,
            Tm::Ascribe(_, _, p) | Tm::Lam { pos: p, .. } => *p,
            Tm::App(f, _) => f.pos(),
        }
    }

    pub fn app(f: Tm, a: Tm) -> Tm {
        Tm::App(Box::new(f), Box::new(a))
    }
}

#[derive(Clone, Debug)]
pub struct ParsedDef {
    pub ty: SimpleType,
    pub body: Tm,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct ParsedEquation {
    pub lhs: Tm,
    pub rhs: Tm,
    pub pos: Pos,
}

/// Types of everything a term may mention.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    pub sig: Signature,
    pub recs: IndexMap<RecId, SimpleType>,
    pub metas: IndexMap<MetaId, SimpleType>,
}

/// A resolved file. `metas` lists metavariables in order of first
/// occurrence, with the types known so far.
#[derive(Clone, Debug, Default)]
pub struct ParsedProblem {
    pub env: TypeEnv,
    pub defs: IndexMap<RecId, ParsedDef>,
    pub eqs: Vec<ParsedEquation>,
    pub assigns: Vec<(MetaId, Tm, Pos)>,
    pub meta_pos: IndexMap<MetaId, Pos>,
}

/// Result of type inference: every binder annotated, every metavariable
/// typed, every equation paired with its type.
#[derive(Clone, Debug, Default)]
pub struct TypedProblem {
    pub env: TypeEnv,
    pub defs: IndexMap<RecId, ParsedDef>,
    pub eqs: Vec<(ParsedEquation, SimpleType)>,
    pub assigns: Vec<(MetaId, Tm, Pos)>,
}

fn is_meta_name(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn resolve_type(sig: &Signature, t: &RawType) -> Result<SimpleType, SurfaceError> {
    match t {
        RawType::Base(n, pos) => {
            let name = TypeName::new(n);
            if !sig.has_type(&name) {
                return Err(SurfaceError::Unknown {
                    pos: *pos,
                    name: n.clone(),
                });
            }
            Ok(SimpleType::Base(name))
        }
        RawType::Arrow(a, r) => Ok(SimpleType::arrow(resolve_type(sig, a)?, resolve_type(sig, r)?)),
    }
}

/// Where free capitalized identifiers may become metavariables.
#[derive(Clone, Copy, PartialEq, Eq)]
enum MetaScope {
    QueriesOnly,
    Everywhere,
}

struct Resolver<'a> {
    env: &'a TypeEnv,
    known_metas: &'a IndexMap<MetaId, SimpleType>,
    meta_pos: IndexMap<MetaId, Pos>,
    allow_metas: bool,
}

impl Resolver<'_> {
    fn term(&mut self, t: &RawTerm, bound: &mut Vec<String>) -> Result<Tm, SurfaceError> {
        Ok(match t {
            RawTerm::Ident(n, pos) => {
                if bound.iter().any(|b| b == n) {
                    Tm::Var(n.clone(), *pos)
                } else if self.env.sig.consts.contains_key(&ConstName::new(n)) {
                    Tm::Const(ConstName::new(n), *pos)
                } else if self.env.recs.contains_key(&RecId::new(n)) {
                    Tm::Rec(RecId::new(n), *pos)
                } else if self.known_metas.contains_key(&MetaId::new(n))
                    || (self.allow_metas && is_meta_name(n))
                {
                    let m = MetaId::new(n);
                    self.meta_pos.entry(m.clone()).or_insert(*pos);
                    Tm::Meta(m, *pos)
                } else {
                    return Err(SurfaceError::Unknown {
                        pos: *pos,
                        name: n.clone(),
                    });
                }
            }
            RawTerm::App(f, a) => Tm::app(self.term(f, bound)?, self.term(a, bound)?),
            RawTerm::Lam { var, ann, body, pos } => {
                let ty = ann.as_ref().map(|a| resolve_type(&self.env.sig, a)).transpose()?;
                bound.push(var.clone());
                let body = self.term(body, bound);
                bound.pop();
                Tm::Lam {
                    var: var.clone(),
                    ty,
                    body: Box::new(body?),
                    pos: *pos,
                }
            }
            RawTerm::Ascribe(t, ty, pos) => {
                Tm::Ascribe(Box::new(self.term(t, bound)?), resolve_type(&self.env.sig, ty)?, *pos)
            }
        })
    }
}

/// Builds the signature and resolves every identifier. `base` supplies the
/// signature and recursion constants already in scope, `known_metas` the
/// metavariables whose types are fixed in advance.
fn resolve_items(
    items: &[Item],
    base: &TypeEnv,
    known_metas: &IndexMap<MetaId, SimpleType>,
    scope: MetaScope,
) -> Result<ParsedProblem, SurfaceError> {
    let mut env = base.clone();
    env.metas.extend(known_metas.iter().map(|(m, t)| (m.clone(), t.clone())));
    let mut seen: HashSet<String> = env
        .sig
        .types
        .keys()
        .map(|t| t.as_str().to_string())
        .chain(env.sig.consts.keys().map(|c| c.as_str().to_string()))
        .chain(env.recs.keys().map(|r| r.as_str().to_string()))
        .collect();
    let mut claim = |name: &str, pos: Pos| {
        if seen.insert(name.to_string()) {
            Ok(())
        } else {
            Err(SurfaceError::Duplicate {
                pos,
                name: name.to_string(),
            })
        }
    };
    for item in items {
        if let Item::Decl {
            name,
            pos,
            body: DeclBody::Kind(k),
        } = item
        {
            claim(name, *pos)?;
            env.sig.types.insert(TypeName::new(name), *k);
        }
    }
    let mut def_src = Vec::new();
    for item in items {
        match item {
            Item::Decl {
                name,
                pos,
                body: DeclBody::Const(ty),
            } => {
                claim(name, *pos)?;
                env.sig.consts.insert(ConstName::new(name), resolve_type(&env.sig, ty)?);
            }
            Item::Decl {
                name,
                pos,
                body: DeclBody::Def(ty, body),
            } => {
                claim(name, *pos)?;
                let ty = resolve_type(&env.sig, ty)?;
                env.recs.insert(RecId::new(name), ty.clone());
                def_src.push((RecId::new(name), ty, body, *pos));
            }
            _ => {}
        }
    }
    let mut r = Resolver {
        env: &env,
        known_metas,
        meta_pos: IndexMap::new(),
        allow_metas: scope == MetaScope::Everywhere,
    };
    let mut defs = IndexMap::new();
    for (name, ty, body, pos) in def_src {
        let body = r.term(body, &mut Vec::new())?;
        defs.insert(name, ParsedDef { ty, body, pos });
    }
    r.allow_metas = true;
    let mut eqs = Vec::new();
    let mut assigns = Vec::new();
    for item in items {
        match item {
            Item::Equation { lhs, rhs, pos } => eqs.push(ParsedEquation {
                lhs: r.term(lhs, &mut Vec::new())?,
                rhs: r.term(rhs, &mut Vec::new())?,
                pos: *pos,
            }),
            Item::Assign { name, pos, value } => {
                let m = MetaId::new(name);
                if !is_meta_name(name) && !known_metas.contains_key(&m) {
                    return Err(SurfaceError::Invalid {
                        pos: *pos,
                        msg: format!("`{name}` is not a metavariable"),
                    });
                }
                if assigns.iter().any(|(n, _, _)| n == &m) {
                    return Err(SurfaceError::Duplicate {
                        pos: *pos,
                        name: name.clone(),
                    });
                }
                assigns.push((m, r.term(value, &mut Vec::new())?, *pos));
            }
            Item::Decl { .. } => {}
        }
    }
    let meta_pos = r.meta_pos;
    Ok(ParsedProblem {
        env,
        defs,
        eqs,
        assigns,
        meta_pos,
    })
}

/// Resolves a problem file: declarations, definitions and queries.
pub fn resolve_problem(items: &[Item]) -> Result<ParsedProblem, SurfaceError> {
    if let Some(Item::Assign { pos, .. }) = items.iter().find(|i| matches!(i, Item::Assign { .. })) {
        return Err(SurfaceError::Invalid {
            pos: *pos,
            msg: "assignments are only allowed in substitutions".into(),
        });
    }
    resolve_items(items, &TypeEnv::default(), &IndexMap::new(), MetaScope::QueriesOnly)
}

/// Resolves a substitution file against the signature of its problem.
pub fn resolve_substitution(
    items: &[Item],
    sig: &Signature,
    metas: &IndexMap<MetaId, SimpleType>,
) -> Result<ParsedProblem, SurfaceError> {
    for item in items {
        match item {
            Item::Equation { pos, .. }
            | Item::Decl {
                pos,
                body: DeclBody::Kind(_) | DeclBody::Const(_),
                ..
            } => {
                return Err(SurfaceError::Invalid {
                    pos: *pos,
                    msg: "a substitution holds only assignments and definitions".into(),
                })
            }
            _ => {}
        }
    }
    let base = TypeEnv {
        sig: sig.clone(),
        ..TypeEnv::default()
    };
    resolve_items(items, &base, metas, MetaScope::Everywhere)
}

#[derive(Clone, Debug)]
enum Ty {
    Var(usize),
    Base(TypeName),
    Arrow(Rc<Ty>, Rc<Ty>),
}

impl Ty {
    fn from_simple(t: &SimpleType) -> Ty {
        match t {
            SimpleType::Base(b) => Ty::Base(b.clone()),
            SimpleType::Arrow(a, r) => Ty::Arrow(Rc::new(Ty::from_simple(a)), Rc::new(Ty::from_simple(r))),
        }
    }
}

/// First-order unification over simple types with type variables.
#[derive(Default)]
struct TypeSolver {
    binding: Vec<Option<Ty>>,
}

impl TypeSolver {
    fn fresh(&mut self) -> Ty {
        self.binding.push(None);
        Ty::Var(self.binding.len() - 1)
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut cur = t.clone();
        while let Ty::Var(v) = cur {
            match &self.binding[v] {
                Some(b) => cur = b.clone(),
                None => return Ty::Var(v),
            }
        }
        cur
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Base(_) => false,
            Ty::Arrow(a, r) => self.occurs(v, &a) || self.occurs(v, &r),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        match (self.shallow(a), self.shallow(b)) {
            (Ty::Var(x), Ty::Var(y)) if x == y => true,
            (Ty::Var(x), t) | (t, Ty::Var(x)) => {
                if self.occurs(x, &t) {
                    return false;
                }
                self.binding[x] = Some(t);
                true
            }
            (Ty::Base(x), Ty::Base(y)) => x == y,
            (Ty::Arrow(a1, r1), Ty::Arrow(a2, r2)) => self.unify(&a1, &a2) && self.unify(&r1, &r2),
            _ => false,
        }
    }

    fn zonk(&self, t: &Ty) -> Option<SimpleType> {
        match self.shallow(t) {
            Ty::Var(_) => None,
            Ty::Base(b) => Some(SimpleType::Base(b)),
            Ty::Arrow(a, r) => Some(SimpleType::arrow(self.zonk(&a)?, self.zonk(&r)?)),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.shallow(t) {
            Ty::Var(v) => format!("?{v}"),
            Ty::Base(b) => b.to_string(),
            Ty::Arrow(a, r) => match self.shallow(&a) {
                Ty::Arrow(..) => format!("({}) -> {}", self.show(&a), self.show(&r)),
                _ => format!("{} -> {}", self.show(&a), self.show(&r)),
            },
        }
    }
}

struct Inference<'a> {
    env: &'a TypeEnv,
    solver: TypeSolver,
    metas: HashMap<MetaId, Ty>,
    lam_slots: Vec<(Ty, Pos, String)>,
}

impl Inference<'_> {
    fn meta_ty(&mut self, m: &MetaId) -> Ty {
        if let Some(t) = self.metas.get(m) {
            return t.clone();
        }
        let t = match self.env.metas.get(m) {
            Some(known) => Ty::from_simple(known),
            None => self.solver.fresh(),
        };
        self.metas.insert(m.clone(), t.clone());
        t
    }

    fn clash(&self, pos: Pos, expected: &Ty, found: &Ty) -> SurfaceError {
        SurfaceError::TypeClash {
            pos,
            msg: format!(
                "expected {}, found {}",
                self.solver.show(expected),
                self.solver.show(found)
            ),
        }
    }

    fn expect(&mut self, pos: Pos, expected: &Ty, found: &Ty) -> Result<(), SurfaceError> {
        if self.solver.unify(expected, found) {
            Ok(())
        } else {
            Err(self.clash(pos, expected, found))
        }
    }

    fn infer(&mut self, t: &Tm, scope: &mut Vec<(String, Ty)>) -> Result<Ty, SurfaceError> {
        match t {
            Tm::Var(n, pos) => scope
                .iter()
                .rev()
                .find(|(b, _)| b == n)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| SurfaceError::Unknown {
                    pos: *pos,
                    name: n.clone(),
                }),
            Tm::Const(c, _) => Ok(Ty::from_simple(&self.env.sig.consts[c])),
            Tm::Rec(r, _) => Ok(Ty::from_simple(&self.env.recs[r])),
            Tm::Meta(m, _) => Ok(self.meta_ty(m)),
            Tm::App(f, a) => {
                let tf = self.infer(f, scope)?;
                let ta = self.infer(a, scope)?;
                let res = self.solver.fresh();
                let want = Ty::Arrow(Rc::new(ta.clone()), Rc::new(res.clone()));
                if self.solver.unify(&tf, &want) {
                    return Ok(res);
                }
                match self.solver.shallow(&tf) {
                    Ty::Arrow(dom, _) => Err(self.clash(a.pos(), &dom, &ta)),
                    _ => Err(SurfaceError::TypeClash {
                        pos: f.pos(),
                        msg: format!("{} is not a function type", self.solver.show(&tf)),
                    }),
                }
            }
            Tm::Lam { var, ty, body, pos } => {
                let tx = match ty {
                    Some(t) => Ty::from_simple(t),
                    None => self.solver.fresh(),
                };
                self.lam_slots.push((tx.clone(), *pos, var.clone()));
                scope.push((var.clone(), tx.clone()));
                let tb = self.infer(body, scope);
                scope.pop();
                Ok(Ty::Arrow(Rc::new(tx), Rc::new(tb?)))
            }
            Tm::Ascribe(inner, ty, pos) => {
                let found = self.infer(inner, scope)?;
                let want = Ty::from_simple(ty);
                self.expect(*pos, &want, &found)?;
                Ok(want)
            }
        }
    }

    /// Writes solved binder types back, visiting lambdas in inference order.
    fn fill(&self, t: &Tm, next: &mut usize) -> Result<Tm, SurfaceError> {
        Ok(match t {
            Tm::App(f, a) => {
                let f = self.fill(f, next)?;
                Tm::app(f, self.fill(a, next)?)
            }
            Tm::Lam { var, body, pos, .. } => {
                let (slot, _, _) = &self.lam_slots[*next];
                *next += 1;
                let ty = self.solver.zonk(slot).ok_or_else(|| SurfaceError::Ambiguous {
                    pos: *pos,
                    name: var.clone(),
                })?;
                Tm::Lam {
                    var: var.clone(),
                    ty: Some(ty),
                    body: Box::new(self.fill(body, next)?),
                    pos: *pos,
                }
            }
            Tm::Ascribe(inner, ty, pos) => Tm::Ascribe(Box::new(self.fill(inner, next)?), ty.clone(), *pos),
            leaf => leaf.clone(),
        })
    }
}

/// Simple-type inference over a whole resolved file.
pub fn infer_types(p: &ParsedProblem) -> Result<TypedProblem, SurfaceError> {
    let mut inf = Inference {
        env: &p.env,
        solver: TypeSolver::default(),
        metas: HashMap::new(),
        lam_slots: Vec::new(),
    };
    let mut roots: Vec<&Tm> = Vec::new();
    for d in p.defs.values() {
        let found = inf.infer(&d.body, &mut Vec::new())?;
        inf.expect(d.body.pos(), &Ty::from_simple(&d.ty), &found)?;
        roots.push(&d.body);
    }
    let mut eq_tys = Vec::new();
    for e in &p.eqs {
        let l = inf.infer(&e.lhs, &mut Vec::new())?;
        let r = inf.infer(&e.rhs, &mut Vec::new())?;
        inf.expect(e.rhs.pos(), &l, &r)?;
        eq_tys.push((l, e.pos));
        roots.push(&e.lhs);
        roots.push(&e.rhs);
    }
    for (m, value, pos) in &p.assigns {
        let want = inf.meta_ty(m);
        let found = inf.infer(value, &mut Vec::new())?;
        inf.expect(*pos, &want, &found)?;
        roots.push(value);
    }

    let mut next = 0;
    let mut filled = roots.iter().map(|t| inf.fill(t, &mut next)).collect::<Result<Vec<_>, _>>()?.into_iter();

    let mut env = p.env.clone();
    let mut meta_order: Vec<(MetaId, Pos)> = p.meta_pos.iter().map(|(m, pos)| (m.clone(), *pos)).collect();
    for (m, pos, ..) in p.assigns.iter().map(|(m, _, pos)| (m, pos)) {
        if !meta_order.iter().any(|(n, _)| n == m) {
            meta_order.push((m.clone(), *pos));
        }
    }
    for (m, pos) in meta_order {
        let t = inf.meta_ty(&m);
        let ty = inf.solver.zonk(&t).ok_or_else(|| SurfaceError::Ambiguous {
            pos,
            name: m.to_string(),
        })?;
        env.metas.insert(m, ty);
    }

    let mut defs = IndexMap::new();
    for (name, d) in &p.defs {
        defs.insert(
            name.clone(),
            ParsedDef {
                ty: d.ty.clone(),
                body: filled.next().expect("one filled root per definition"),
                pos: d.pos,
            },
        );
    }
    let mut eqs = Vec::new();
    for (e, (t, pos)) in p.eqs.iter().zip(eq_tys) {
        let ty = inf.solver.zonk(&t).ok_or_else(|| SurfaceError::Ambiguous {
            pos,
            name: "equation".into(),
        })?;
        let lhs = filled.next().expect("filled lhs");
        let rhs = filled.next().expect("filled rhs");
        eqs.push((ParsedEquation { lhs, rhs, pos: e.pos }, ty));
    }
    let assigns = p
        .assigns
        .iter()
        .map(|(m, _, pos)| (m.clone(), filled.next().expect("filled assignment"), *pos))
        .collect();
    Ok(TypedProblem {
        env,
        defs,
        eqs,
        assigns,
    })
}
