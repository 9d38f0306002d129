//! Equivalence closure of a set of equations: interned terms, union-find
//! classes and an edge graph for recovering derivations.

use std::collections::{HashMap, VecDeque};

use crate::term_core::{Term, UnifContext};

use super::trace::ItemNo;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct TermId(pub usize);

#[derive(Clone, Debug, Default)]
pub struct Closure {
    terms: Vec<Term>,
    ids: HashMap<String, TermId>,
    parent: Vec<usize>,
    /// Members of each class, valid at roots, in interning order.
    members: Vec<Vec<TermId>>,
    skeletons: HashMap<String, Vec<TermId>>,
    /// Recorded equations incident to each term.
    adj: Vec<Vec<(TermId, ItemNo)>>,
}

impl Closure {
    pub fn new() -> Self {
        Self::default()
    }

    /// The closure of a context's equations, edges numbered by position.
    pub fn of_context(ctx: &UnifContext) -> Self {
        let mut c = Closure::new();
        for (i, e) in ctx.eqs.iter().enumerate() {
            let a = c.intern(&e.lhs);
            let b = c.intern(&e.rhs);
            c.add_edge(a, b, ItemNo(i + 1));
            c.union(a, b);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.terms.len()).map(TermId)
    }

    pub fn lookup(&self, t: &Term) -> Option<TermId> {
        self.ids.get(&t.key()).copied()
    }

    /// Returns the id of `t` and whether it was new.
    pub fn intern_new(&mut self, t: &Term) -> (TermId, bool) {
        let key = t.key();
        if let Some(&id) = self.ids.get(&key) {
            return (id, false);
        }
        let id = TermId(self.terms.len());
        self.terms.push(t.clone());
        self.ids.insert(key, id);
        self.parent.push(id.0);
        self.members.push(vec![id]);
        self.skeletons.entry(t.skeleton()).or_default().push(id);
        self.adj.push(Vec::new());
        (id, true)
    }

    pub fn intern(&mut self, t: &Term) -> TermId {
        self.intern_new(t).0
    }

    pub fn find(&self, id: TermId) -> TermId {
        let mut i = id.0;
        while self.parent[i] != i {
            i = self.parent[i];
        }
        TermId(i)
    }

    fn find_compress(&mut self, id: TermId) -> usize {
        let root = self.find(id).0;
        let mut i = id.0;
        while self.parent[i] != root {
            let next = self.parent[i];
            self.parent[i] = root;
            i = next;
        }
        root
    }

    pub fn same(&self, a: TermId, b: TermId) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn class(&self, id: TermId) -> &[TermId] {
        &self.members[self.find(id).0]
    }

    /// Merges the classes of `a` and `b`; returns the pairs that became
    /// equal, each once.
    pub fn union(&mut self, a: TermId, b: TermId) -> Vec<(TermId, TermId)> {
        let (ra, rb) = (self.find_compress(a), self.find_compress(b));
        if ra == rb {
            return Vec::new();
        }
        let (big, small) = if self.members[ra].len() >= self.members[rb].len() {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let moved = std::mem::take(&mut self.members[small]);
        let mut pairs = Vec::with_capacity(moved.len() * self.members[big].len());
        for &x in &self.members[big] {
            for &y in &moved {
                pairs.push((x, y));
            }
        }
        self.parent[small] = big;
        self.members[big].extend(moved);
        pairs
    }

    pub fn add_edge(&mut self, a: TermId, b: TermId, n: ItemNo) {
        self.adj[a.0].push((b, n));
        if a != b {
            self.adj[b.0].push((a, n));
        }
    }

    /// Terms whose skeleton is `key`.
    pub fn with_skeleton(&self, key: &str) -> &[TermId] {
        self.skeletons.get(key).map_or(&[], Vec::as_slice)
    }

    /// A shortest chain of recorded equations from `a` to `b`, as
    /// `(item, term reached)` steps.
    pub fn path(&self, a: TermId, b: TermId) -> Option<Vec<(ItemNo, TermId)>> {
        if a == b {
            return Some(Vec::new());
        }
        let mut prev: HashMap<TermId, (TermId, ItemNo)> = HashMap::new();
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            for &(y, n) in &self.adj[x.0] {
                if y == a || prev.contains_key(&y) {
                    continue;
                }
                prev.insert(y, (x, n));
                if y == b {
                    let mut out = Vec::new();
                    let mut cur = b;
                    while cur != a {
                        let (p, n) = prev[&cur];
                        out.push((n, cur));
                        cur = p;
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back(y);
            }
        }
        None
    }

    /// Some recorded equation mentioning `a`.
    pub fn any_edge(&self, a: TermId) -> Option<(TermId, ItemNo)> {
        self.adj[a.0].first().copied()
    }

    pub fn neighbours(&self, a: TermId) -> &[(TermId, ItemNo)] {
        &self.adj[a.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_core::RecId;

    fn r(s: &str) -> Term {
        Term::rec(RecId::new(s), vec![])
    }

    #[test]
    fn union_reports_each_new_pair_once() {
        let mut c = Closure::new();
        let (a, b, d, e) = (c.intern(&r("a")), c.intern(&r("b")), c.intern(&r("d")), c.intern(&r("e")));
        assert_eq!(c.union(a, b).len(), 1);
        assert_eq!(c.union(d, e).len(), 1);
        assert_eq!(c.union(b, d).len(), 4);
        assert!(c.union(a, e).is_empty());
        assert_eq!(c.class(e).len(), 4);
    }

    #[test]
    fn paths_follow_recorded_edges() {
        let mut c = Closure::new();
        let (a, b, d) = (c.intern(&r("a")), c.intern(&r("b")), c.intern(&r("d")));
        c.add_edge(a, b, ItemNo(1));
        c.add_edge(d, b, ItemNo(2));
        let p = c.path(a, d).unwrap();
        assert_eq!(p, vec![(ItemNo(1), b), (ItemNo(2), d)]);
        assert_eq!(c.intern(&r("a")), a);
    }
}
