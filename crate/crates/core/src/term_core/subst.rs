use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;

use super::context::{rename_apart, Def, Equation, MetaInfo, UnifContext};
use super::names::{MetaId, NameSupply, RecId};
use super::term::{distinct, Binder, Body, Mode, Term};
use super::types::SimpleType;
use super::TermError;

/// `H x̄ ≐ value`: `H` stands for `λx̄. value`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubstEntry {
    pub mode: Mode,
    pub ty: SimpleType,
    pub pattern: Vec<Binder>,
    pub value: Term,
}

impl SubstEntry {
    pub fn new(mode: Mode, ty: SimpleType, pattern: Vec<Binder>, value: Term) -> Self {
        SubstEntry {
            mode,
            ty,
            pattern,
            value,
        }
    }

    pub fn pattern_vars(&self) -> Vec<super::Var> {
        self.pattern.iter().map(|b| b.var.clone()).collect()
    }

    /// `λx̄. value`.
    pub fn as_lambda(&self) -> Term {
        Term::lam(self.pattern.clone(), self.value.clone())
    }

    /// The left-hand side `H x̄`.
    pub fn lhs(&self, meta: &MetaId) -> Term {
        Term::meta(meta.clone(), self.mode, self.pattern_vars())
    }
}

/// A contradiction-free context of substitution equations with unique
/// left-hand metavariables, plus recursive definitions.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Substitution {
    pub entries: IndexMap<MetaId, SubstEntry>,
    pub defs: IndexMap<RecId, Def>,
    /// Mode and type of metavariables occurring free in values or defs.
    pub free_metas: IndexMap<MetaId, MetaInfo>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn domain(&self) -> Vec<MetaId> {
        self.entries.keys().cloned().collect()
    }

    pub fn get(&self, meta: &MetaId) -> Option<&SubstEntry> {
        self.entries.get(meta)
    }

    /// Metavariables occurring free in right-hand sides and definitions.
    pub fn range_metas(&self) -> Vec<(MetaId, Mode, usize)> {
        let mut out: Vec<(MetaId, Mode, usize)> = Vec::new();
        let mut push = |t: &Term| {
            for m in t.metas() {
                if !out.iter().any(|(o, _, _)| *o == m.0) {
                    out.push(m);
                }
            }
        };
        for e in self.entries.values() {
            push(&e.value);
        }
        for d in self.defs.values() {
            push(&d.body);
        }
        out
    }

    pub fn rename_recs(&self, map: &std::collections::HashMap<RecId, RecId>) -> Substitution {
        if map.is_empty() {
            return self.clone();
        }
        Substitution {
            entries: self
                .entries
                .iter()
                .map(|(m, e)| {
                    let mut e = e.clone();
                    e.value = e.value.rename_recs(map);
                    (m.clone(), e)
                })
                .collect(),
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
            free_metas: self.free_metas.clone(),
        }
    }

    /// Unique, distinct patterns; `FV(value) ⊆ pattern`; values of the
    /// matching class without top-level binders; closed definitions.
    pub fn check_well_formed(&self) -> Result<(), TermError> {
        for (m, e) in &self.entries {
            let bad = |reason: &str| TermError::BadEntry {
                meta: m.clone(),
                reason: reason.to_string(),
            };
            let pv = e.pattern_vars();
            if !distinct(&pv) {
                return Err(bad("pattern variables are not distinct"));
            }
            if !e.value.binders.is_empty() {
                return Err(bad("value has top-level binders"));
            }
            if !e.value.free_vars().iter().all(|v| pv.contains(v)) {
                return Err(bad("value has variables outside the pattern"));
            }
            let class_ok = match e.mode {
                Mode::Con => e.value.is_flat_contractive(),
                Mode::Rec => e.value.is_flat_recursive(),
            };
            if !class_ok {
                return Err(bad("value is not a flat term of the metavariable's class"));
            }
        }
        for (r, d) in &self.defs {
            if !d.as_lambda().is_closed() {
                return Err(TermError::OpenDef(r.clone()));
            }
            if !d.body.is_flat_contractive() {
                return Err(TermError::NonContractiveDef(r.clone()));
            }
            for rr in d.body.recs() {
                if !self.defs.contains_key(&rr) {
                    return Err(TermError::UndefinedRec(rr));
                }
            }
        }
        for e in self.entries.values() {
            for rr in e.value.recs() {
                if !self.defs.contains_key(&rr) {
                    return Err(TermError::UndefinedRec(rr));
                }
            }
        }
        Ok(())
    }

    /// The substitution as a unification context of `H x̄ ≐ value`
    /// equations and its definitions.
    pub fn to_context(&self) -> UnifContext {
        let mut c = UnifContext::new();
        for (m, e) in &self.entries {
            c.add_equation(Equation::new(e.lhs(m), e.value.clone()));
            c.metas.insert(
                m.clone(),
                MetaInfo {
                    mode: e.mode,
                    ty: e.ty.clone(),
                },
            );
        }
        c.defs = self.defs.clone();
        for (m, i) in &self.free_metas {
            c.metas.entry(m.clone()).or_insert_with(|| i.clone());
        }
        c
    }

    fn retain_free_metas(&mut self, pool: &[&IndexMap<MetaId, MetaInfo>]) {
        let mut out = IndexMap::new();
        for (m, _, _) in self.range_metas() {
            if let Some(i) = pool.iter().find_map(|p| p.get(&m)) {
                out.insert(m, i.clone());
            }
        }
        self.free_metas = out;
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = Vec::new();
        for (m, e) in &self.entries {
            items.push(format!("{} ≐ {}", e.lhs(m), e.value));
        }
        for (r, d) in &self.defs {
            items.push(format!("{r} =_d {}", d.as_lambda()));
        }
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// `M[Γ]`.
pub fn apply_subst_term(t: &Term, g: &Substitution) -> Result<Term, TermError> {
    match &t.body {
        Body::Rigid { head, args } => {
            let args = args
                .iter()
                .map(|a| apply_subst_term(a, g))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term {
                binders: t.binders.clone(),
                body: Body::Rigid {
                    head: head.clone(),
                    args,
                },
            })
        }
        Body::Meta { meta, args, .. } => match g.entries.get(meta) {
            None => Ok(t.clone()),
            Some(e) => {
                if e.pattern.len() != args.len() {
                    return Err(TermError::WidthMismatch {
                        meta: meta.clone(),
                        expected: e.pattern.len(),
                        found: args.len(),
                    });
                }
                let v = e.value.rename(&e.pattern_vars(), args)?;
                Ok(Term::lam(t.binders.clone(), v))
            }
        },
        Body::Rec { .. } => Ok(t.clone()),
    }
}

/// `Δ[Γ]`: Γ's definitions are renamed apart from Δ's first.
pub fn apply_subst_context(d: &UnifContext, g: &Substitution) -> Result<UnifContext, TermError> {
    let taken: HashSet<RecId> = d.defs.keys().cloned().collect();
    let map = rename_apart(g.defs.keys(), &taken);
    let g = g.rename_recs(&map);
    let mut out = UnifContext::new();
    for e in &d.eqs {
        out.eqs.push(Equation::new(
            apply_subst_term(&e.lhs, &g)?,
            apply_subst_term(&e.rhs, &g)?,
        ));
    }
    for (r, def) in &d.defs {
        out.defs.insert(
            r.clone(),
            Def {
                ty: def.ty.clone(),
                params: def.params.clone(),
                body: apply_subst_term(&def.body, &g)?,
            },
        );
    }
    for (r, def) in &g.defs {
        out.defs.insert(r.clone(), def.clone());
    }
    for (m, i) in &d.metas {
        if !g.entries.contains_key(m) {
            out.metas.insert(m.clone(), i.clone());
        }
    }
    for (m, i) in &g.free_metas {
        out.metas.entry(m.clone()).or_insert_with(|| i.clone());
    }
    out.contra = d.contra;
    Ok(out)
}

/// `Γ1 ∘ Γ2`: apply Γ1, then Γ2.
pub fn compose(g1: &Substitution, g2: &Substitution) -> Result<Substitution, TermError> {
    let taken: HashSet<RecId> = g1.defs.keys().cloned().collect();
    let map = rename_apart(g2.defs.keys(), &taken);
    let g2 = g2.rename_recs(&map);
    let mut out = Substitution::new();
    for (m, e) in &g1.entries {
        let mut e = e.clone();
        e.value = apply_subst_term(&e.value, &g2)?;
        out.entries.insert(m.clone(), e);
    }
    for (m, e) in &g2.entries {
        if !g1.entries.contains_key(m) {
            out.entries.insert(m.clone(), e.clone());
        }
    }
    for (r, def) in &g1.defs {
        out.defs.insert(
            r.clone(),
            Def {
                ty: def.ty.clone(),
                params: def.params.clone(),
                body: apply_subst_term(&def.body, &g2)?,
            },
        );
    }
    for (r, def) in &g2.defs {
        out.defs.insert(r.clone(), def.clone());
    }
    out.retain_free_metas(&[&g2.free_metas, &g1.free_metas]);
    Ok(out)
}

/// `Γ|_S`: drops equations for metavariables outside `keep`; keeps defs.
pub fn restrict(g: &Substitution, keep: &[MetaId]) -> Substitution {
    let mut out = g.clone();
    out.entries.retain(|m, _| keep.contains(m));
    out.retain_free_metas(&[&g.free_metas]);
    out
}

/// Top-level η-expansion of metavariable applications against the
/// argument positions of `head_type`: `G ȳ` at a position of type
/// `τ̄ -> b` becomes `λw̄. G ȳ w̄` with fresh `w̄`.
pub fn eta_expand(
    args: &[Term],
    head_type: &SimpleType,
    supply: &mut NameSupply,
) -> Result<Vec<Term>, TermError> {
    let (positions, _) = head_type.uncurry();
    if positions.len() != args.len() {
        return Err(TermError::ArityMismatch {
            expected: positions.len(),
            found: args.len(),
        });
    }
    args.iter()
        .zip(positions.iter())
        .map(|(a, ty)| match (&a.body, a.binders.is_empty()) {
            (Body::Meta { meta, mode, args }, true) => {
                let (ws, _) = ty.uncurry();
                let binders: Vec<Binder> = ws
                    .into_iter()
                    .map(|t| Binder::new(supply.fresh_var("w"), t))
                    .collect();
                let mut full = args.clone();
                full.extend(binders.iter().map(|b| b.var.clone()));
                Ok(Term::lam(binders, Term::meta(meta.clone(), *mode, full)))
            }
            _ => Err(TermError::Type(format!(
                "cannot η-expand non-metavariable argument {a}"
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::names::{ConstName, Var};
    use super::*;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn el() -> SimpleType {
        SimpleType::base("element")
    }

    fn sp() -> SimpleType {
        SimpleType::base("sp")
    }

    fn s_entry() -> Substitution {
        let mut g = Substitution::new();
        g.entries.insert(
            MetaId::new("S"),
            SubstEntry::new(
                Mode::Rec,
                SimpleType::arrows([el(), el()], sp()),
                vec![Binder::new(v("z"), el()), Binder::new(v("w"), el())],
                Term::rec(RecId::new("r3"), vec![v("w")]),
            ),
        );
        g
    }

    #[test]
    fn rec_case_is_identity() {
        let t = Term::rec(RecId::new("r"), vec![v("x")]);
        assert_eq!(apply_subst_term(&t, &s_entry()).unwrap(), t);
    }

    #[test]
    fn renames_pattern_to_occurrence() {
        let t = Term::lam(
            vec![Binder::new(v("x"), el())],
            Term::meta(MetaId::new("S"), Mode::Rec, vec![v("x"), v("y")]),
        );
        let got = apply_subst_term(&t, &s_entry()).unwrap();
        let want = Term::lam(
            vec![Binder::new(v("x"), el())],
            Term::rec(RecId::new("r3"), vec![v("y")]),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn out_of_domain_untouched() {
        let t = Term::meta(MetaId::new("H"), Mode::Rec, vec![]);
        assert_eq!(apply_subst_term(&t, &s_entry()).unwrap(), t);
    }

    #[test]
    fn width_mismatch_is_reported() {
        let t = Term::meta(MetaId::new("S"), Mode::Rec, vec![v("x")]);
        assert!(matches!(
            apply_subst_term(&t, &s_entry()),
            Err(TermError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn eta_expansion_by_position_type() {
        let mut supply = NameSupply::new();
        let get = SimpleType::arrow(SimpleType::arrow(el(), sp()), sp());
        let g = Term::meta(MetaId::new("G"), Mode::Rec, vec![v("y")]);
        let out = eta_expand(std::slice::from_ref(&g), &get, &mut supply).unwrap();
        assert_eq!(out[0].binders.len(), 1);
        match &out[0].body {
            Body::Meta { args, .. } => assert_eq!(args.len(), 2),
            _ => panic!(),
        }
        let put = SimpleType::arrows([el(), sp()], sp());
        let both = eta_expand(&[g.clone(), g.clone()], &put, &mut supply).unwrap();
        assert_eq!(both[0], g);
        assert_eq!(both[1], g);
    }

    #[test]
    fn restrict_and_compose_units() {
        let g = s_entry();
        assert_eq!(restrict(&g, &g.domain()), g);
        assert_eq!(compose(&g, &Substitution::new()).unwrap(), g);
        assert!(restrict(&Substitution::new(), &[MetaId::new("S")])
            .entries
            .is_empty());
    }

    #[test]
    fn compose_maps_through_second() {
        let mut g1 = Substitution::new();
        g1.entries.insert(
            MetaId::new("H"),
            SubstEntry::new(
                Mode::Con,
                SimpleType::arrow(el(), sp()),
                vec![Binder::new(v("x"), el())],
                Term::meta(MetaId::new("G"), Mode::Con, vec![v("x")]),
            ),
        );
        let mut g2 = Substitution::new();
        let c = ConstName::new("c");
        g2.entries.insert(
            MetaId::new("G"),
            SubstEntry::new(
                Mode::Con,
                SimpleType::arrow(el(), sp()),
                vec![Binder::new(v("y"), el())],
                Term::constant(c.clone(), vec![Term::rec(RecId::new("r"), vec![v("y")])]),
            ),
        );
        let out = compose(&g1, &g2).unwrap();
        let h = &out.entries[&MetaId::new("H")];
        assert_eq!(
            h.value,
            Term::constant(c, vec![Term::rec(RecId::new("r"), vec![v("x")])])
        );
        assert!(out.entries.contains_key(&MetaId::new("G")));
    }
}
