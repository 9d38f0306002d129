//! Seeded random problems, produced as surface text and loaded through
//! the ordinary front end.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::surface::{load_problem, ConcreteContext};
use crate::term_core::Signature;

use super::OracleError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    FirstOrder,
    /// Stream processors over `get`/`put`, with pattern metavariables.
    HigherOrder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub mode: GenMode,
    pub max_constructors: usize,
    pub max_depth: usize,
    pub max_metavars: usize,
    /// Allow recursive definitions.
    pub cyclic: bool,
}

impl GenConfig {
    pub fn new(mode: GenMode, cyclic: bool) -> Self {
        GenConfig {
            mode,
            max_constructors: 4,
            max_depth: 3,
            max_metavars: 3,
            cyclic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedProblem {
    pub text: String,
    pub sig: Signature,
    pub ctx: ConcreteContext,
}

#[derive(Clone, Debug, PartialEq)]
enum Tree {
    App(String, Vec<Tree>),
    Lam(String, Box<Tree>),
    Var(String),
    Meta(usize, Vec<String>),
}

impl Tree {
    fn atom(&self) -> bool {
        match self {
            Tree::Var(_) => true,
            Tree::App(_, args) => args.is_empty(),
            Tree::Meta(_, args) => args.is_empty(),
            Tree::Lam(..) => false,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Tree::Var(x) => out.push_str(x),
            Tree::Meta(i, args) => {
                let _ = write!(out, "H{i}");
                for a in args {
                    let _ = write!(out, " {a}");
                }
            }
            Tree::Lam(x, body) => {
                let _ = write!(out, "[{x}] ");
                body.write(out);
            }
            Tree::App(h, args) => {
                out.push_str(h);
                for a in args {
                    out.push(' ');
                    if a.atom() {
                        a.write(out);
                    } else {
                        out.push('(');
                        a.write(out);
                        out.push(')');
                    }
                }
            }
        }
    }

    fn free_vars(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Tree::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Tree::Meta(_, args) => {
                for x in args {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
            }
            Tree::Lam(x, body) => {
                bound.push(x.clone());
                body.free_vars(bound, out);
                bound.pop();
            }
            Tree::App(_, args) => args.iter().for_each(|a| a.free_vars(bound, out)),
        }
    }
}

struct Gen<'c> {
    cfg: &'c GenConfig,
    rng: ChaCha8Rng,
    /// Constructor names with their arity (first order only).
    ctors: Vec<(String, usize)>,
    defs: Vec<String>,
    /// Pattern width of each metavariable, fixed on first use.
    widths: Vec<Option<usize>>,
    fresh: usize,
}

const ELEMENT_CONST: &str = "e0";

impl Gen<'_> {
    fn leaf(&mut self) -> Tree {
        let defs = self.defs.len();
        let n = match self.cfg.mode {
            GenMode::FirstOrder => self.ctors.iter().filter(|(_, a)| *a == 0).count(),
            GenMode::HigherOrder => 1,
        };
        let i = self.rng.gen_range(0..n + defs);
        if i >= n {
            return Tree::App(self.defs[i - n].clone(), vec![]);
        }
        match self.cfg.mode {
            GenMode::FirstOrder => {
                let name = self.ctors.iter().filter(|(_, a)| *a == 0).nth(i).unwrap().0.clone();
                Tree::App(name, vec![])
            }
            GenMode::HigherOrder => Tree::App("nil".into(), vec![]),
        }
    }

    /// A meta-free term of the main type whose root is a constructor.
    fn node(&mut self, depth: usize, scope: &mut Vec<String>) -> Tree {
        match self.cfg.mode {
            GenMode::FirstOrder => {
                let ctors: Vec<(String, usize)> = self.ctors.iter().filter(|(_, a)| *a > 0).cloned().collect();
                let Some((name, arity)) = ctors.choose(&mut self.rng).cloned() else {
                    return self.leaf();
                };
                let args = (0..arity).map(|_| self.tree(depth - 1, scope)).collect();
                Tree::App(name, args)
            }
            GenMode::HigherOrder => {
                let kinds = self.cfg.max_constructors.clamp(2, 3);
                match self.rng.gen_range(0..kinds) {
                    0 => {
                        let x = format!("x{}", self.fresh);
                        self.fresh += 1;
                        scope.push(x.clone());
                        let body = self.tree(depth - 1, scope);
                        scope.pop();
                        Tree::App("get".into(), vec![Tree::Lam(x, Box::new(body))])
                    }
                    1 => {
                        let e = match scope.choose(&mut self.rng) {
                            Some(x) if self.rng.gen_bool(0.8) => Tree::Var(x.clone()),
                            _ => Tree::App(ELEMENT_CONST.into(), vec![]),
                        };
                        Tree::App("put".into(), vec![e, self.tree(depth - 1, scope)])
                    }
                    _ => Tree::App("skip".into(), vec![self.tree(depth - 1, scope)]),
                }
            }
        }
    }

    fn tree(&mut self, depth: usize, scope: &mut Vec<String>) -> Tree {
        if depth == 0 || self.rng.gen_bool(0.3) {
            self.leaf()
        } else {
            self.node(depth, scope)
        }
    }

    fn pattern_for(&mut self, meta: usize, wanted: &[String], scope: &[String]) -> Option<Vec<String>> {
        let width = match self.widths[meta] {
            Some(w) => w,
            None => {
                let w = if self.rng.gen_bool(0.7) { wanted.len() } else { self.rng.gen_range(0..=scope.len()) };
                self.widths[meta] = Some(w);
                w
            }
        };
        if width > scope.len() {
            return None;
        }
        let mut pool: Vec<String> = wanted.iter().filter(|x| scope.contains(x)).cloned().collect();
        pool.shuffle(&mut self.rng);
        let mut rest: Vec<String> = scope.iter().filter(|x| !pool.contains(x)).cloned().collect();
        rest.shuffle(&mut self.rng);
        pool.extend(rest);
        pool.truncate(width);
        pool.shuffle(&mut self.rng);
        Some(pool)
    }

    /// Replaces random subterms by metavariables.
    fn punch(&mut self, t: &Tree, root: bool, scope: &mut Vec<String>) -> Tree {
        let candidate = match t {
            Tree::App(h, _) => h != ELEMENT_CONST,
            Tree::Meta(..) => true,
            _ => false,
        };
        let p = if root { 0.15 } else { 0.3 };
        if candidate && self.rng.gen_bool(p) {
            let meta = self.rng.gen_range(0..self.widths.len());
            let mut fv = Vec::new();
            t.free_vars(&mut Vec::new(), &mut fv);
            if let Some(args) = self.pattern_for(meta, &fv, scope) {
                return Tree::Meta(meta, args);
            }
        }
        match t {
            Tree::App(h, args) => Tree::App(h.clone(), args.iter().map(|a| self.punch(a, false, scope)).collect()),
            Tree::Lam(x, body) => {
                scope.push(x.clone());
                let b = self.punch(body, false, scope);
                scope.pop();
                Tree::Lam(x.clone(), Box::new(b))
            }
            other => other.clone(),
        }
    }

    fn equation(&mut self, out: &mut String) {
        let prefix = match self.cfg.mode {
            GenMode::HigherOrder if self.rng.gen_bool(0.4) => Some("y0".to_string()),
            _ => None,
        };
        let mut scope: Vec<String> = prefix.iter().cloned().collect();
        let depth = self.cfg.max_depth.max(1);
        let base = self.node(depth, &mut scope);
        let left = self.punch(&base, true, &mut scope);
        let other = if self.rng.gen_bool(0.2) { self.node(depth, &mut scope) } else { base };
        let mut right = self.punch(&other, !matches!(left, Tree::Meta(..)), &mut scope);
        if matches!(left, Tree::Meta(..)) && matches!(right, Tree::Meta(..)) {
            right = other;
        }
        for (i, side) in [left, right].iter().enumerate() {
            if i == 1 {
                out.push_str(" = ");
            }
            if let Some(y) = &prefix {
                let _ = write!(out, "[{y}:element] ");
            }
            let mut s = String::new();
            side.write(&mut s);
            if side.atom() || prefix.is_none() {
                out.push_str(&s);
            } else {
                let _ = write!(out, "({s})");
            }
        }
        out.push('.');
    }

    fn problem(&mut self) -> String {
        let mut out = String::new();
        match self.cfg.mode {
            GenMode::FirstOrder => {
                out.push_str("d : cotype.\n");
                for (name, arity) in &self.ctors {
                    let ty = vec!["d"; arity + 1].join(" -> ");
                    let _ = writeln!(out, "{name} : {ty}.");
                }
            }
            GenMode::HigherOrder => {
                out.push_str("sp : cotype.\nelement : type.\n");
                let _ = writeln!(out, "{ELEMENT_CONST} : element.");
                out.push_str("nil : sp.\nget : (element -> sp) -> sp.\nput : element -> sp -> sp.\n");
                if self.cfg.max_constructors >= 3 {
                    out.push_str("skip : sp -> sp.\n");
                }
            }
        }
        let has_node = self.cfg.mode == GenMode::HigherOrder || self.ctors.iter().any(|(_, a)| *a > 0);
        if self.cfg.cyclic && has_node {
            let n = self.rng.gen_range(1..=2);
            self.defs = (0..n).map(|i| format!("r{i}")).collect();
            let ty = match self.cfg.mode {
                GenMode::FirstOrder => "d",
                GenMode::HigherOrder => "sp",
            };
            out.push('\n');
            for name in self.defs.clone() {
                let depth = self.cfg.max_depth.max(1);
                let body = self.node(depth, &mut Vec::new());
                let mut s = String::new();
                body.write(&mut s);
                let _ = writeln!(out, "{name} : {ty} = {s}.");
            }
        }
        out.push_str("\n?-");
        let eqs = self.rng.gen_range(1..=2);
        for _ in 0..eqs {
            out.push(' ');
            self.equation(&mut out);
        }
        out.push('\n');
        out
    }
}

/// A well-typed problem determined by `cfg` and `seed`.
pub fn gen_problem(cfg: &GenConfig, seed: u64) -> Result<GeneratedProblem, OracleError> {
    let ctors = (0..cfg.max_constructors.max(1)).map(|i| (format!("k{i}"), i % 3)).collect();
    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(seed),
        ctors,
        defs: Vec::new(),
        widths: vec![None; cfg.max_metavars.max(1)],
        fresh: 0,
    };
    let text = g.problem();
    let (sig, ctx) = load_problem(&text).map_err(OracleError::Generated)?;
    Ok(GeneratedProblem { text, sig, ctx })
}
