//! The worklist engine applying the rule sets to a fixpoint.

use std::collections::{HashMap, HashSet, VecDeque};

use indexmap::IndexMap;

use crate::term_core::{
    intersect, subset, Binder, Body, Def, Equation, Head, MetaId, MetaInfo, Mode, NameSupply, RecId, SimpleType,
    Term, TermClass, TypeName, UnifContext, Var,
};

use super::closure::{Closure, TermId};
use super::schema::{matches_in, Hole, Schema};
use super::status::{pruning_for, resolution_for, Measure};
use super::trace::{ItemNo, RuleId, SatTrace, TraceItem, TraceStep};
use super::{MeasureViolation, SatConfig, SatError, SatMode, Saturation, Schedule};

enum Work {
    Pair(TermId, TermId),
    /// An occurrence `H x̄` against the `i`-th agreement source of `H`.
    Agree(TermId, MetaId, usize),
}

enum Premise {
    /// An equation between two terms of one class; `true` when the rule
    /// reads it in this orientation.
    Pair(TermId, TermId, bool),
    Edge(ItemNo),
    Def(RecId),
}

enum Concl {
    Eq(Term, Term),
    Def(RecId, Def),
    Contra,
}

pub(super) struct Engine {
    cfg: SatConfig,
    supply: NameSupply,
    closure: Closure,
    defs: IndexMap<RecId, Def>,
    metas: IndexMap<MetaId, MetaInfo>,
    eqs: Vec<Equation>,
    eq_keys: HashSet<(String, String)>,
    contra: bool,
    trace: SatTrace,
    next_item: usize,
    def_items: HashMap<RecId, ItemNo>,
    edge_ends: HashMap<ItemNo, (TermId, TermId)>,
    queue: VecDeque<Work>,
    resolved: HashSet<MetaId>,
    pruned: HashSet<RecId>,
    /// Metavariables counted in the measure (those occurring so far).
    occurring: HashSet<MetaId>,
    measure: Measure,
    occurrences: HashMap<MetaId, Vec<TermId>>,
    sources: HashMap<MetaId, Vec<(TermId, TermId)>>,
    violations: Vec<MeasureViolation>,
    work: usize,
}

fn class_rule(t: &Term, u: RuleId, n: RuleId) -> RuleId {
    match t.class() {
        TermClass::Contractive => u,
        TermClass::Recursive => n,
    }
}

impl Engine {
    pub(super) fn new(ctx: &UnifContext, cfg: SatConfig, mut supply: NameSupply) -> Result<Self, SatError> {
        if cfg.mode == SatMode::FirstOrder && !ctx.is_first_order() {
            return Err(SatError::NotFirstOrder);
        }
        reserve_names(&mut supply, ctx);
        let mut e = Engine {
            cfg,
            supply,
            closure: Closure::new(),
            defs: IndexMap::new(),
            metas: ctx.metas.clone(),
            eqs: Vec::new(),
            eq_keys: HashSet::new(),
            contra: false,
            trace: SatTrace::default(),
            next_item: 0,
            def_items: HashMap::new(),
            edge_ends: HashMap::new(),
            queue: VecDeque::new(),
            resolved: HashSet::new(),
            pruned: HashSet::new(),
            occurring: HashSet::new(),
            measure: Measure::default(),
            occurrences: HashMap::new(),
            sources: HashMap::new(),
            violations: Vec::new(),
            work: 0,
        };
        for m in ctx.uv() {
            if !e.metas.contains_key(&m) {
                return Err(SatError::UnknownMeta(m));
            }
        }
        for eq in &ctx.eqs {
            let n = e.alloc();
            e.trace.given.push((n, TraceItem::Eq(eq.clone())));
            e.add_eq(&eq.lhs, &eq.rhs, n);
        }
        for (r, d) in &ctx.defs {
            let n = e.alloc();
            e.trace.given.push((n, TraceItem::Def(r.clone(), d.clone())));
            e.add_def(r, d, n);
        }
        if ctx.contra {
            let n = e.alloc();
            e.trace.given.push((n, TraceItem::Contra));
            e.contra = true;
        }
        Ok(e)
    }

    fn alloc(&mut self) -> ItemNo {
        self.next_item += 1;
        ItemNo(self.next_item)
    }

    fn note_metas(&mut self, t: &Term) {
        for (m, mode, w) in t.metas() {
            if self.occurring.insert(m.clone()) && !self.resolved.contains(&m) {
                match mode {
                    Mode::Con => self.measure.b.insert(w),
                    Mode::Rec => self.measure.c.insert(w),
                }
            }
        }
    }

    fn mark_resolved(&mut self, m: MetaId) {
        if !self.resolved.insert(m.clone()) || !self.occurring.contains(&m) {
            return;
        }
        let info = &self.metas[&m];
        let w = info.width();
        match info.mode {
            Mode::Con => self.measure.b.remove(w),
            Mode::Rec => self.measure.c.remove(w),
        };
    }

    fn mark_pruned(&mut self, r: RecId) {
        if self.pruned.insert(r.clone()) {
            if let Some(d) = self.defs.get(&r) {
                self.measure.a.remove(d.width());
            }
        }
    }

    fn intern(&mut self, t: &Term) -> TermId {
        let (id, fresh) = self.closure.intern_new(t);
        if fresh {
            self.note_metas(t);
            if self.cfg.mode == SatMode::HigherOrder && t.binders.is_empty() {
                if let Body::Meta { meta, .. } = &t.body {
                    let n = self.sources.get(meta).map_or(0, Vec::len);
                    for i in 0..n {
                        self.queue.push_back(Work::Agree(id, meta.clone(), i));
                    }
                    self.occurrences.entry(meta.clone()).or_default().push(id);
                }
            }
        }
        id
    }

    fn add_def(&mut self, r: &RecId, d: &Def, n: ItemNo) {
        self.note_metas(&d.body);
        if !self.pruned.contains(r) {
            self.measure.a.insert(d.width());
        }
        self.defs.insert(r.clone(), d.clone());
        self.def_items.insert(r.clone(), n);
    }

    fn record_eq(&mut self, a: TermId, b: TermId, n: ItemNo) {
        self.closure.add_edge(a, b, n);
        self.edge_ends.insert(n, (a, b));
        let eq = Equation::new(self.closure.term(a).clone(), self.closure.term(b).clone());
        if self.eq_keys.insert(eq.key()) {
            self.eqs.push(eq);
        }
    }

    fn add_eq(&mut self, lhs: &Term, rhs: &Term, n: ItemNo) {
        let a = self.intern(lhs);
        let b = self.intern(rhs);
        self.record_eq(a, b, n);
        for (x, y) in self.closure.union(a, b) {
            self.on_pair(x, y);
        }
    }

    fn on_pair(&mut self, x: TermId, y: TermId) {
        for (p, q) in [(x, y), (y, x)] {
            let (tp, tq) = (self.closure.term(p), self.closure.term(q));
            let res = resolution_for(tp, tq);
            let pr = pruning_for(tp, tq);
            let src = match (&tp.body, tp.binders.is_empty()) {
                (Body::Meta { meta, args, .. }, true)
                    if self.cfg.mode == SatMode::HigherOrder && subset(&tq.free_vars(), args) =>
                {
                    Some(meta.clone())
                }
                _ => None,
            };
            if let Some(m) = res {
                self.mark_resolved(m);
            }
            if let Some(r) = pr {
                self.mark_pruned(r);
            }
            if let Some(m) = src {
                let list = self.sources.entry(m.clone()).or_default();
                list.push((p, q));
                let i = list.len() - 1;
                for &o in self.occurrences.get(&m).map_or(&[][..], Vec::as_slice) {
                    self.queue.push_back(Work::Agree(o, m.clone(), i));
                }
            }
        }
        self.queue.push_back(Work::Pair(x, y));
    }

    pub(super) fn run(mut self) -> Result<Saturation, SatError> {
        while !(self.contra && self.cfg.stop_on_contra) {
            let next = match self.cfg.schedule {
                Schedule::Fifo => self.queue.pop_front(),
                Schedule::Lifo => self.queue.pop_back(),
            };
            let Some(w) = next else { break };
            self.work += 1;
            if self.work > self.cfg.max_steps {
                return Err(SatError::Budget(self.cfg.max_steps));
            }
            match w {
                Work::Pair(x, y) => self.pair(x, y)?,
                Work::Agree(o, m, i) => self.agree(o, &m, i)?,
            }
        }
        Ok(Saturation {
            context: UnifContext {
                eqs: self.eqs,
                defs: self.defs,
                metas: self.metas,
                contra: self.contra,
            },
            trace: self.trace,
            violations: self.violations,
            supply: self.supply,
            work: self.work,
        })
    }

    /// Item number of the equation `a ≐ b`, recording the symmetry and
    /// transitivity steps that derive it when it is only implied.
    fn premise_pair(&mut self, a: TermId, b: TermId, oriented: bool) -> Result<ItemNo, SatError> {
        let direct = self
            .closure
            .neighbours(a)
            .iter()
            .find(|&&(u, n)| u == b && (!oriented || self.edge_ends[&n] == (a, b)))
            .map(|&(_, n)| n);
        if let Some(n) = direct {
            return Ok(n);
        }
        let path = self
            .closure
            .path(a, b)
            .ok_or_else(|| SatError::Internal("premise terms are not connected".into()))?;
        let ta = self.closure.term(a).clone();
        let (sym, trans) = (
            class_rule(&ta, RuleId::USym, RuleId::NSym),
            class_rule(&ta, RuleId::UTrans, RuleId::NTrans),
        );
        let mut it = path.into_iter();
        let (mut cur, _) = it.next().ok_or_else(|| SatError::Internal("empty premise path".into()))?;
        let mut rest = it.peekable();
        if rest.peek().is_none() {
            if oriented && self.edge_ends[&cur] == (b, a) {
                let n = self.alloc();
                let eq = Equation::new(ta, self.closure.term(b).clone());
                self.record_eq(a, b, n);
                self.trace.steps.push(TraceStep {
                    rule: sym,
                    premises: vec![cur],
                    produced: vec![(n, TraceItem::Eq(eq))],
                    new_metas: Vec::new(),
                });
                return Ok(n);
            }
            return Ok(cur);
        }
        for (edge, reached) in rest {
            let n = self.alloc();
            let eq = Equation::new(ta.clone(), self.closure.term(reached).clone());
            self.record_eq(a, reached, n);
            self.trace.steps.push(TraceStep {
                rule: trans,
                premises: vec![cur, edge],
                produced: vec![(n, TraceItem::Eq(eq))],
                new_metas: Vec::new(),
            });
            cur = n;
        }
        Ok(cur)
    }

    fn is_new(&self, c: &Concl) -> bool {
        match c {
            Concl::Eq(l, r) => match (self.closure.lookup(l), self.closure.lookup(r)) {
                (Some(a), Some(b)) => !self.closure.same(a, b),
                _ => true,
            },
            Concl::Def(r, _) => !self.defs.contains_key(r),
            Concl::Contra => !self.contra,
        }
    }

    fn fire(
        &mut self,
        rule: RuleId,
        premises: Vec<Premise>,
        concls: Vec<Concl>,
        new_metas: Vec<(MetaId, MetaInfo)>,
    ) -> Result<(), SatError> {
        let concls: Vec<Concl> = concls.into_iter().filter(|c| self.is_new(c)).collect();
        if concls.is_empty() {
            return Ok(());
        }
        let before = self.measure.clone();
        let mut ids = Vec::with_capacity(premises.len());
        for p in premises {
            ids.push(match p {
                Premise::Pair(a, b, o) => self.premise_pair(a, b, o)?,
                Premise::Edge(n) => n,
                Premise::Def(r) => self.def_items[&r],
            });
        }
        for (m, info) in &new_metas {
            self.metas.insert(m.clone(), info.clone());
        }
        let mut produced = Vec::with_capacity(concls.len());
        for c in concls {
            let n = self.alloc();
            match c {
                Concl::Eq(l, r) => {
                    self.add_eq(&l, &r, n);
                    produced.push((n, TraceItem::Eq(Equation::new(l, r))));
                }
                Concl::Def(r, d) => {
                    self.add_def(&r, &d, n);
                    produced.push((n, TraceItem::Def(r, d)));
                }
                Concl::Contra => {
                    self.contra = true;
                    produced.push((n, TraceItem::Contra));
                }
            }
        }
        self.trace.steps.push(TraceStep {
            rule,
            premises: ids,
            produced,
            new_metas,
        });
        let after = &self.measure;
        let bad = if rule.creates_symbols() {
            *after >= before
        } else {
            *after > before
        };
        if bad {
            self.violations.push(MeasureViolation {
                step: self.trace.steps.len() - 1,
                rule,
                before,
                after: after.clone(),
            });
        }
        Ok(())
    }

    fn meta_info(&self, m: &MetaId) -> Result<&MetaInfo, SatError> {
        self.metas.get(m).ok_or_else(|| SatError::UnknownMeta(m.clone()))
    }

    /// Types of the variables `vs`, read off the positions where they
    /// occur in `pattern` for a metavariable of type `ty`.
    fn pattern_types(ty: &SimpleType, pattern: &[Var], vs: &[Var]) -> Result<Vec<SimpleType>, SatError> {
        let (params, _) = ty.uncurry();
        vs.iter()
            .map(|v| {
                pattern
                    .iter()
                    .position(|p| p == v)
                    .and_then(|i| params.get(i).cloned())
                    .ok_or_else(|| SatError::Internal(format!("variable {v} is not in the pattern")))
            })
            .collect()
    }

    fn base_of(&self, t: &Term) -> Result<TypeName, SatError> {
        match &t.body {
            Body::Rec { rec, .. } => self
                .defs
                .get(rec)
                .map(|d| d.ty.result_base())
                .ok_or_else(|| SatError::Internal(format!("undefined recursion constant {rec}"))),
            Body::Meta { meta, .. } => Ok(self.meta_info(meta)?.ty.result_base()),
            Body::Rigid { .. } => Err(SatError::Internal(format!("nested rigid argument {t}"))),
        }
    }

    fn subsumed(&self, holes: Vec<Hole>, eqs: Vec<Equation>, defs: Vec<(RecId, Def)>) -> bool {
        match Schema::new(holes, eqs, defs) {
            Ok(s) => matches_in(&self.closure, &self.defs, &self.metas, &s),
            Err(_) => false,
        }
    }

    fn pair(&mut self, x: TermId, y: TermId) -> Result<(), SatError> {
        let (tx, ty) = (self.closure.term(x).clone(), self.closure.term(y).clone());
        let ho = self.cfg.mode == SatMode::HigherOrder;
        if !tx.binders.is_empty() || !ty.binders.is_empty() {
            return if ho { self.inst(x, y, &tx, &ty) } else { Ok(()) };
        }
        match (&tx.body, &ty.body) {
            (Body::Rigid { head: hx, args: ax }, Body::Rigid { head: hy, args: ay }) => {
                let clash = match (hx, hy) {
                    (Head::Const(c), Head::Const(d)) if c != d => Some(if ho { RuleId::SimpF3 } else { RuleId::SimpF }),
                    (Head::Var(_), Head::Const(_)) | (Head::Const(_), Head::Var(_)) => Some(RuleId::SimpF1),
                    (Head::Var(a), Head::Var(b)) if a != b => Some(RuleId::SimpF2),
                    _ => None,
                };
                let oriented = matches!((hx, hy), (Head::Const(_), Head::Var(_)));
                match clash {
                    Some(rule) => {
                        let p = if oriented { Premise::Pair(y, x, true) } else { Premise::Pair(x, y, true) };
                        self.fire(rule, vec![p], vec![Concl::Contra], Vec::new())
                    }
                    None => {
                        let concls = ax.iter().zip(ay).map(|(a, b)| Concl::Eq(a.clone(), b.clone())).collect();
                        self.fire(RuleId::Simp, vec![Premise::Pair(x, y, false)], concls, Vec::new())
                    }
                }
            }
            (Body::Rec { .. }, Body::Rec { .. }) => self.rec_exp(x, y, &tx, &ty),
            _ if !ho => Ok(()),
            (Body::Meta { mode: Mode::Con, .. }, Body::Rigid { .. }) => self.flex_rigid(x, y, &tx, &ty),
            (Body::Rigid { .. }, Body::Meta { mode: Mode::Con, .. }) => self.flex_rigid(y, x, &ty, &tx),
            (Body::Meta { mode: m1, .. }, Body::Meta { mode: m2, .. }) if m1 == m2 => self.flex_flex(x, y, &tx, &ty),
            (Body::Meta { mode: Mode::Rec, .. }, Body::Rec { .. }) => self.prune(x, y, &tx, &ty),
            (Body::Rec { .. }, Body::Meta { mode: Mode::Rec, .. }) => self.prune(y, x, &ty, &tx),
            _ => Ok(()),
        }
    }

    fn inst(&mut self, x: TermId, y: TermId, tx: &Term, ty: &Term) -> Result<(), SatError> {
        if tx.binders.len() != ty.binders.len() {
            return Err(SatError::Internal(format!("λ-prefixes differ in {tx} ≐ {ty}")));
        }
        let fresh: Vec<Var> = tx.binders.iter().map(|_| self.supply.fresh_var("z")).collect();
        let open = |t: &Term| {
            let from: Vec<Var> = t.binders.iter().map(|b| b.var.clone()).collect();
            t.strip().rename(&from, &fresh)
        };
        let (ux, uy) = (open(tx)?, open(ty)?);
        // Equations are universally closed over their free variables, so a
        // renaming of all of them is redundant, not just of the fresh ones.
        let mut vars = ux.free_vars();
        for v in uy.free_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let holes = vars.into_iter().map(Hole::Var).collect();
        if self.subsumed(holes, vec![Equation::new(ux.clone(), uy.clone())], Vec::new()) {
            return Ok(());
        }
        let rule = class_rule(&ux, RuleId::UInst, RuleId::NInst);
        self.fire(rule, vec![Premise::Pair(x, y, false)], vec![Concl::Eq(ux, uy)], Vec::new())
    }

    fn rec_exp(&mut self, x: TermId, y: TermId, tx: &Term, ty: &Term) -> Result<(), SatError> {
        let (Body::Rec { rec: r, args: xs }, Body::Rec { rec: s, args: ys }) = (&tx.body, &ty.body) else {
            return Ok(());
        };
        let dr = self.defs.get(r).ok_or_else(|| SatError::Internal(format!("undefined {r}")))?;
        let ds = self.defs.get(s).ok_or_else(|| SatError::Internal(format!("undefined {s}")))?;
        let (u1, u2) = (dr.instantiate(xs)?, ds.instantiate(ys)?);
        let rule = if self.cfg.mode == SatMode::FirstOrder { RuleId::RExp } else { RuleId::RecExp };
        self.fire(
            rule,
            vec![Premise::Pair(x, y, false), Premise::Def(r.clone()), Premise::Def(s.clone())],
            vec![Concl::Eq(u1, u2)],
            Vec::new(),
        )
    }

    /// `H ȳ ≐ h N̄` with `H` contractive: PROJ-F, PROJ or IMIT.
    fn flex_rigid(&mut self, x: TermId, y: TermId, tx: &Term, ty: &Term) -> Result<(), SatError> {
        let (Body::Meta { meta, args: ys, .. }, Body::Rigid { head, args }) = (&tx.body, &ty.body) else {
            return Ok(());
        };
        let rule = match head {
            Head::Var(z) if !ys.contains(z) => {
                return self.fire(RuleId::ProjF, vec![Premise::Pair(x, y, true)], vec![Concl::Contra], Vec::new());
            }
            _ if self.resolved.contains(meta) => return Ok(()),
            Head::Var(_) => RuleId::Proj,
            Head::Const(_) => RuleId::Imit,
        };
        let h_ty = self.meta_info(meta)?.ty.clone();
        let (y_tys, _) = h_ty.uncurry();
        let mut new_metas = Vec::new();
        let mut new_args = Vec::with_capacity(args.len());
        for a in args {
            let arg_ty = SimpleType::arrows(a.binders.iter().map(|b| b.ty.clone()), SimpleType::Base(self.base_of(a)?));
            let g = self.supply.fresh_meta("G");
            let g_ty = SimpleType::arrows(y_tys.iter().cloned(), arg_ty.clone());
            new_metas.push((
                g.clone(),
                MetaInfo {
                    mode: Mode::Rec,
                    ty: g_ty,
                },
            ));
            let (ws, _) = arg_ty.uncurry();
            let binders: Vec<Binder> = ws.into_iter().map(|t| Binder::new(self.supply.fresh_var("w"), t)).collect();
            let mut full = ys.clone();
            full.extend(binders.iter().map(|b| b.var.clone()));
            new_args.push(Term::lam(binders, Term::meta(g, Mode::Rec, full)));
        }
        let rhs = Term::rigid(head.clone(), new_args);
        let holes = new_metas.iter().map(|(g, _)| Hole::Meta(g.clone())).collect();
        if self.subsumed(holes, vec![Equation::new(tx.clone(), rhs.clone())], Vec::new()) {
            return Ok(());
        }
        self.fire(rule, vec![Premise::Pair(x, y, true)], vec![Concl::Eq(tx.clone(), rhs)], new_metas)
    }

    fn flex_flex(&mut self, x: TermId, y: TermId, tx: &Term, ty: &Term) -> Result<(), SatError> {
        let (Body::Meta { meta: g, mode, args: xs }, Body::Meta { meta: h, args: ys, .. }) = (&tx.body, &ty.body) else {
            return Ok(());
        };
        let (rule, zs) = if g != h {
            let guard = !subset(xs, ys)
                && !subset(ys, xs)
                && (!self.resolved.contains(g) || !self.resolved.contains(h));
            if !guard {
                return Ok(());
            }
            (RuleId::FfD, intersect(xs, ys))
        } else {
            if xs == ys {
                return Ok(());
            }
            let zs = xs.iter().zip(ys).filter(|(a, b)| a == b).map(|(a, _)| a.clone()).collect();
            (RuleId::FfS, zs)
        };
        let g_ty = self.meta_info(g)?.ty.clone();
        let z_tys = Self::pattern_types(&g_ty, xs, &zs)?;
        let f = self.supply.fresh_meta("F");
        let info = MetaInfo {
            mode: *mode,
            ty: SimpleType::arrows(z_tys, SimpleType::Base(g_ty.result_base())),
        };
        let fz = Term::meta(f.clone(), *mode, zs);
        let eqs = vec![Equation::new(tx.clone(), fz.clone()), Equation::new(ty.clone(), fz.clone())];
        if self.subsumed(vec![Hole::Meta(f.clone())], eqs, Vec::new()) {
            return Ok(());
        }
        self.fire(
            rule,
            vec![Premise::Pair(x, y, true)],
            vec![Concl::Eq(tx.clone(), fz.clone()), Concl::Eq(ty.clone(), fz)],
            vec![(f, info)],
        )
    }

    /// `H ȳ ≐ r x̄` with `x̄ ⊄ ȳ`.
    fn prune(&mut self, x: TermId, y: TermId, tx: &Term, ty: &Term) -> Result<(), SatError> {
        let (Body::Meta { meta, args: ys, .. }, Body::Rec { args: xs, .. }) = (&tx.body, &ty.body) else {
            return Ok(());
        };
        if subset(xs, ys) || self.resolved.contains(meta) {
            return Ok(());
        }
        let ws = intersect(xs, ys);
        let h_ty = self.meta_info(meta)?.ty.clone();
        let w_tys = Self::pattern_types(&h_ty, ys, &ws)?;
        let base = self.base_of(ty)?;
        let t = self.supply.fresh_rec("t");
        let g = self.supply.fresh_meta("G");
        let params: Vec<Binder> = w_tys.iter().map(|ty| Binder::new(self.supply.fresh_var("w"), ty.clone())).collect();
        let body = Term::meta(g.clone(), Mode::Con, params.iter().map(|b| b.var.clone()).collect());
        let def = Def::new(params, body, SimpleType::Base(base.clone()));
        let info = MetaInfo {
            mode: Mode::Con,
            ty: def.ty.clone(),
        };
        let tw = Term::rec(t.clone(), ws);
        let eqs = vec![Equation::new(tx.clone(), tw.clone()), Equation::new(ty.clone(), tw.clone())];
        if self.subsumed(
            vec![Hole::Rec(t.clone()), Hole::Meta(g.clone())],
            eqs,
            vec![(t.clone(), def.clone())],
        ) {
            return Ok(());
        }
        self.fire(
            RuleId::Prune,
            vec![Premise::Pair(x, y, true)],
            vec![
                Concl::Eq(tx.clone(), tw.clone()),
                Concl::Eq(ty.clone(), tw),
                Concl::Def(t, def),
            ],
            vec![(g, info)],
        )
    }

    /// `H x̄` and `H ȳ ≐ U₂` with `FV(U₂) ⊆ ȳ` give `H x̄ ≐ [x̄/ȳ]U₂`.
    fn agree(&mut self, o: TermId, meta: &MetaId, i: usize) -> Result<(), SatError> {
        let (sf, so) = self.sources[meta][i];
        if sf == o {
            return Ok(());
        }
        let (to, tsf, tso) = (
            self.closure.term(o).clone(),
            self.closure.term(sf).clone(),
            self.closure.term(so).clone(),
        );
        let (Body::Meta { args: xs, mode, .. }, Body::Meta { args: ys, .. }) = (&to.body, &tsf.body) else {
            return Ok(());
        };
        let renamed = tso.rename(ys, xs)?;
        if let Some(r) = self.closure.lookup(&renamed) {
            if self.closure.same(r, o) {
                return Ok(());
            }
        }
        // Prefer a recorded partner of `H x̄` that itself satisfies the
        // variable condition, to mirror the two-equation form.
        let partner = self
            .closure
            .neighbours(o)
            .iter()
            .find(|(u, _)| *u != o && subset(&self.closure.term(*u).free_vars(), xs))
            .copied();
        let (left, first) = match partner {
            Some((u, n)) => (self.closure.term(u).clone(), Premise::Edge(n)),
            None => match self.closure.any_edge(o) {
                Some((_, n)) => (to.clone(), Premise::Edge(n)),
                None => return Ok(()),
            },
        };
        let rule = match mode {
            Mode::Con => RuleId::UAgree,
            Mode::Rec => RuleId::NAgree,
        };
        self.fire(
            rule,
            vec![first, Premise::Pair(sf, so, true)],
            vec![Concl::Eq(left, renamed)],
            Vec::new(),
        )
    }
}

fn reserve_names(supply: &mut NameSupply, ctx: &UnifContext) {
    fn term(supply: &mut NameSupply, t: &Term) {
        for b in &t.binders {
            supply.reserve(&b.var.0);
        }
        match &t.body {
            Body::Rigid { head, args } => {
                if let Head::Var(v) = head {
                    supply.reserve(&v.0);
                }
                for a in args {
                    term(supply, a);
                }
            }
            Body::Meta { meta, args, .. } => {
                supply.reserve(&meta.0);
                args.iter().for_each(|v| supply.reserve(&v.0));
            }
            Body::Rec { rec, args } => {
                supply.reserve(&rec.0);
                args.iter().for_each(|v| supply.reserve(&v.0));
            }
        }
    }
    for e in &ctx.eqs {
        term(supply, &e.lhs);
        term(supply, &e.rhs);
    }
    for (r, d) in &ctx.defs {
        supply.reserve(&r.0);
        term(supply, &d.as_lambda());
    }
    for m in ctx.metas.keys() {
        supply.reserve(&m.0);
    }
}
