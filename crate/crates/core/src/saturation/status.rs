//! Resolved metavariables, pruned recursion constants and the
//! termination measure.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::term_core::{proper_subset, subset, Body, Equation, MetaId, Mode, RecId, Term, UnifContext};

use super::closure::Closure;

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    /// With a witnessing resolution equation `H ȳ ≐ ...`.
    Resolved(Equation),
    Unresolved,
}

impl Status {
    pub fn is_resolved(&self) -> bool {
        matches!(self, Status::Resolved(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RecStatus {
    Pruned(Equation),
    Unpruned,
}

/// `Some(H)` when `flex ≐ other` is a resolution equation for the
/// metavariable heading `flex`.
pub fn resolution_for(flex: &Term, other: &Term) -> Option<MetaId> {
    if !flex.binders.is_empty() || !other.binders.is_empty() {
        return None;
    }
    let Body::Meta { meta, mode, args: ys } = &flex.body else {
        return None;
    };
    let ok = match (mode, &other.body) {
        (Mode::Con, Body::Rigid { .. }) => subset(&other.free_vars(), ys),
        (Mode::Rec, Body::Rec { args, .. }) => subset(args, ys),
        (m, Body::Meta { mode: n, args: ws, .. }) if m == n => proper_subset(ws, ys),
        _ => false,
    };
    ok.then(|| meta.clone())
}

/// `Some(r)` when `a ≐ b` is `r x̄ ≐ s ȳ` with `ȳ ⊊ x̄`.
pub fn pruning_for(a: &Term, b: &Term) -> Option<RecId> {
    match (&a.body, &b.body) {
        (Body::Rec { rec, args: xs }, Body::Rec { args: ys, .. })
            if a.binders.is_empty() && b.binders.is_empty() && proper_subset(ys, xs) =>
        {
            Some(rec.clone())
        }
        _ => None,
    }
}

pub fn status_metavar(ctx: &UnifContext, meta: &MetaId) -> Status {
    let c = Closure::of_context(ctx);
    for a in c.ids() {
        for &b in c.class(a) {
            if resolution_for(c.term(a), c.term(b)).as_ref() == Some(meta) {
                return Status::Resolved(Equation::new(c.term(a).clone(), c.term(b).clone()));
            }
        }
    }
    Status::Unresolved
}

pub fn status_recconst(ctx: &UnifContext, rec: &RecId) -> RecStatus {
    let c = Closure::of_context(ctx);
    for a in c.ids() {
        for &b in c.class(a) {
            if pruning_for(c.term(a), c.term(b)).as_ref() == Some(rec) {
                return RecStatus::Pruned(Equation::new(c.term(a).clone(), c.term(b).clone()));
            }
        }
    }
    RecStatus::Unpruned
}

/// A finite multiset of naturals under the multiset extension of `<`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Multiset(BTreeMap<usize, usize>);

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, n: usize) {
        *self.0.entry(n).or_insert(0) += 1;
    }

    pub fn remove(&mut self, n: usize) -> bool {
        match self.0.get_mut(&n) {
            Some(c) => {
                *c -= 1;
                if *c == 0 {
                    self.0.remove(&n);
                }
                true
            }
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Elements in descending order.
    pub fn elements(&self) -> Vec<usize> {
        self.0.iter().rev().flat_map(|(&n, &c)| std::iter::repeat_n(n, c)).collect()
    }
}

impl FromIterator<usize> for Multiset {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut m = Multiset::new();
        for n in it {
            m.insert(n);
        }
        m
    }
}

impl Ord for Multiset {
    /// `X < Y` iff at the largest element whose multiplicities differ,
    /// `Y` has more copies.
    fn cmp(&self, other: &Self) -> Ordering {
        let keys: std::collections::BTreeSet<usize> = self.0.keys().chain(other.0.keys()).copied().collect();
        for k in keys.into_iter().rev() {
            let (a, b) = (self.0.get(&k).unwrap_or(&0), other.0.get(&k).unwrap_or(&0));
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Multiset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let els: Vec<String> = self.elements().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", els.join(","))
    }
}

/// `⟨A, B, C⟩`, ordered lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    /// Widths of unpruned recursion constants.
    pub a: Multiset,
    /// Widths of unresolved contractive metavariables.
    pub b: Multiset,
    /// Widths of unresolved recursive metavariables.
    pub c: Multiset,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.a, self.b, self.c)
    }
}

/// Metavariables occurring in `ctx` with their mode and width.
fn occurring_metas(ctx: &UnifContext) -> HashMap<MetaId, (Mode, usize)> {
    let mut out = HashMap::new();
    let mut add = |t: &Term| {
        for (m, mode, w) in t.metas() {
            out.entry(m).or_insert((mode, w));
        }
    };
    for e in &ctx.eqs {
        add(&e.lhs);
        add(&e.rhs);
    }
    for d in ctx.defs.values() {
        add(&d.body);
    }
    out
}

pub fn measure(ctx: &UnifContext) -> Measure {
    let c = Closure::of_context(ctx);
    let mut resolved = HashSet::new();
    let mut pruned = HashSet::new();
    for a in c.ids() {
        for &b in c.class(a) {
            if let Some(m) = resolution_for(c.term(a), c.term(b)) {
                resolved.insert(m);
            }
            if let Some(r) = pruning_for(c.term(a), c.term(b)) {
                pruned.insert(r);
            }
        }
    }
    let mut out = Measure::default();
    for (r, d) in &ctx.defs {
        if !pruned.contains(r) {
            out.a.insert(d.width());
        }
    }
    for (m, (mode, w)) in occurring_metas(ctx) {
        if resolved.contains(&m) {
            continue;
        }
        match mode {
            Mode::Con => out.b.insert(w),
            Mode::Rec => out.c.insert(w),
        }
    }
    out
}
