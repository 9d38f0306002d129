use proptest::prelude::*;

use super::*;
use crate::expansion::{first_divergence, DEFAULT_DEPTH};
use crate::fixtures;
use crate::surface::load_problem;
use crate::term_core::{ConstName, MetaId};

fn flat(name: &str) -> (ConcreteContext, UnifContext, Vec<Equation>) {
    let (sig, ctx) = load_problem(fixtures::get(name)).unwrap();
    let (out, images) = flatten_with_images(&sig, &ctx, &mut NameSupply::new()).unwrap();
    (ctx, out, images)
}

fn def_str(ctx: &UnifContext, r: &str) -> String {
    ctx.defs[&RecId::new(r)].as_lambda().to_string()
}

#[test]
fn conat_flattening() {
    let (_, d, _) = flat("conat");
    assert_eq!(d.defs.len(), 3);
    assert_eq!(def_str(&d, "omega"), "cosucc omega");
    assert_eq!(def_str(&d, "$r1"), "cosucc r2");
    assert_eq!(def_str(&d, "$r2"), "cosucc H");
    assert_eq!(d.eqs.len(), 1);
    assert_eq!(d.eqs[0].to_string(), "omega ≐ r1");
    d.check_well_formed().unwrap();
}

#[test]
fn stream_flattening_matches_the_worked_example() {
    let (_, d, _) = flat("stream");
    assert_eq!(def_str(&d, "$r1"), "get (λx. r2 x)");
    assert_eq!(def_str(&d, "$r2"), "λx. get (λy. S x y)");
    assert_eq!(def_str(&d, "odd"), "get (λx. even)");
    assert_eq!(def_str(&d, "even"), "get (λx. r3 x)");
    assert_eq!(def_str(&d, "$r3"), "λx. put (r4 x) odd");
    assert_eq!(def_str(&d, "$r4"), "λx. x");
    assert_eq!(d.eqs[0].to_string(), "r1 ≐ odd");
    d.check_well_formed().unwrap();
}

#[test]
fn producer_flattening() {
    let (_, d, _) = flat("producer");
    assert_eq!(d.eqs[0].to_string(), "λx. r1 x ≐ λx. H x");
    assert_eq!(def_str(&d, "$r1"), "λx. put (r2 x) (H x)");
    assert_eq!(def_str(&d, "$r2"), "λx. x");
}

#[test]
fn empty_context() {
    let sig = Signature::new();
    let d = flatten(&sig, &ConcreteContext::default()).unwrap();
    assert!(d.eqs.is_empty() && d.defs.is_empty());
}

#[test]
fn metavariable_passes_through() {
    let sig = Signature::new();
    let mut supply = NameSupply::new();
    let mut f = Flattener::new(&sig, &IndexMap::new(), &mut supply);
    let el = SimpleType::base("element");
    let t = Term::lam(
        vec![Binder::new(Var::new("x"), el)],
        Term::meta(MetaId::new("H"), Mode::Rec, vec![Var::new("x")]),
    );
    assert_eq!(f.flatten_rec(&t, &mut Vec::new()).unwrap(), t);
    assert!(f.finish().is_empty());
}

#[test]
fn flatten_con_rejects_flexible_heads() {
    let sig = Signature::new();
    let mut supply = NameSupply::new();
    let mut f = Flattener::new(&sig, &IndexMap::new(), &mut supply);
    let t = Term::meta(MetaId::new("H"), Mode::Rec, vec![]);
    assert!(matches!(f.flatten_con(&t, &mut Vec::new()), Err(FlattenError::NotContractive(_))));
}

fn collapse_problem(arity: usize) -> String {
    let tys = vec!["a"; arity + 1].join(" -> ");
    let params: String = (0..arity).map(|i| format!("[y{i}] ")).collect();
    let body_args: String = (0..arity).map(|i| format!(" y{i}")).collect();
    let xs = vec!["x"; arity].join(" ");
    format!(
        "a : type. c : {tys}.\nr : {tys} = {params}c{body_args}.\n?- [x] r {xs} = [x] c {xs}."
    )
}

#[test]
fn repeated_arguments_are_collapsed() {
    for arity in [2, 3] {
        let (sig, ctx) = load_problem(&collapse_problem(arity)).unwrap();
        let (d, images) = flatten_with_images(&sig, &ctx, &mut NameSupply::new()).unwrap();
        d.check_well_formed().unwrap();
        assert!(d.eqs.iter().all(|e| e.lhs.is_pattern_clean() && e.rhs.is_pattern_clean()));
        let t = d.defs.get(&RecId::new("$t1")).expect("collapsed definition");
        assert_eq!(t.width(), 1);
        let lhs = &ctx.eqs[0].lhs;
        let got = first_divergence(&ctx.defs, lhs, &d.defs, &images[0].lhs, 10).unwrap();
        assert_eq!(got, None);
    }
}

#[test]
fn already_a_pattern_is_unchanged() {
    let sig = Signature::new();
    let mut supply = NameSupply::new();
    let mut f = Flattener::new(&sig, &IndexMap::new(), &mut supply);
    let args = vec![Var::new("x"), Var::new("y")];
    assert_eq!(f.patternize(&RecId::new("r"), &args).unwrap(), (RecId::new("r"), args));
}

#[test]
fn cyclic_collapse_reuses_the_collapsed_constant() {
    let src = "a : type. c : a -> a.\nr : a -> a -> a = [y] [z] c (r z y).\n?- [x] r x x = [x] c (r x x).";
    let (sig, ctx) = load_problem(src).unwrap();
    let (d, images) = flatten_with_images(&sig, &ctx, &mut NameSupply::new()).unwrap();
    d.check_well_formed().unwrap();
    let collapsed = d.defs.keys().filter(|r| r.as_str().starts_with("$t")).count();
    assert_eq!(collapsed, 1);
    for (e, img) in ctx.eqs.iter().zip(&images) {
        assert_eq!(first_divergence(&ctx.defs, &e.lhs, &d.defs, &img.lhs, DEFAULT_DEPTH).unwrap(), None);
        assert_eq!(first_divergence(&ctx.defs, &e.rhs, &d.defs, &img.rhs, DEFAULT_DEPTH).unwrap(), None);
    }
}

/// Each concrete definition `r`, seen as `λz̄. r z̄`.
fn rec_as_term(r: &RecId, d: &Def) -> Term {
    Term::lam(d.params.clone(), Term::rec(r.clone(), d.param_vars()))
}

#[test]
fn expansions_are_preserved_on_fixtures() {
    for (name, _) in fixtures::ALL {
        let (ctx, d, images) = flat(name);
        d.check_well_formed().unwrap_or_else(|e| panic!("{name}: {e}"));
        for (e, img) in ctx.eqs.iter().zip(&images) {
            for (c, f) in [(&e.lhs, &img.lhs), (&e.rhs, &img.rhs)] {
                let got = first_divergence(&ctx.defs, c, &d.defs, f, DEFAULT_DEPTH).unwrap();
                assert_eq!(got, None, "{name}: {c} vs {f}");
            }
        }
        for (r, def) in &ctx.defs {
            let t = rec_as_term(r, def);
            assert_eq!(first_divergence(&ctx.defs, &t, &d.defs, &t, DEFAULT_DEPTH).unwrap(), None, "{name}: {r}");
        }
    }
}

#[test]
fn flattening_is_deterministic() {
    for (name, _) in fixtures::ALL {
        let (_, a, _) = flat(name);
        let (_, b, _) = flat(name);
        assert_eq!(a, b, "{name}");
    }
}

/// Random nested first-order terms over `z/0`, `s/1`, `p/2` with
/// metavariables `H0..H2` and a cyclic definition `q`.
fn arb_concrete() -> impl Strategy<Value = Term> {
    let c = |n: &str, args| Term::constant(ConstName::new(n), args);
    let leaf = prop_oneof![
        Just(c("z", vec![])),
        Just(Term::rec(RecId::new("q"), vec![])),
        (0..3usize).prop_map(|i| Term::meta(MetaId::new(&format!("H{i}")), Mode::Rec, vec![])),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(move |a| c("s", vec![a])),
            (inner.clone(), inner).prop_map(move |(a, b)| c("p", vec![a, b])),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_terms_keep_their_expansion(l in arb_concrete(), r in arb_concrete()) {
        let nat = SimpleType::base("nat");
        let mut sig = Signature::new();
        sig.types.insert(TypeName::new("nat"), crate::term_core::Kind::Type);
        sig.consts.insert(ConstName::new("z"), nat.clone());
        sig.consts.insert(ConstName::new("s"), SimpleType::arrow(nat.clone(), nat.clone()));
        sig.consts.insert(ConstName::new("p"), SimpleType::arrows([nat.clone(), nat.clone()], nat.clone()));
        let mut ctx = ConcreteContext::default();
        let q = Term::constant(ConstName::new("s"), vec![Term::constant(ConstName::new("p"), vec![Term::rec(RecId::new("q"), vec![]), Term::constant(ConstName::new("z"), vec![])])]);
        ctx.defs.insert(RecId::new("q"), Def::new(vec![], q, nat));
        ctx.eqs.push(Equation::new(l.clone(), r.clone()));
        let (d, images) = flatten_with_images(&sig, &ctx, &mut NameSupply::new()).unwrap();
        prop_assert!(d.check_well_formed().is_ok());
        prop_assert_eq!(first_divergence(&ctx.defs, &l, &d.defs, &images[0].lhs, DEFAULT_DEPTH).unwrap(), None);
        prop_assert_eq!(first_divergence(&ctx.defs, &r, &d.defs, &images[0].rhs, DEFAULT_DEPTH).unwrap(), None);
    }
}
