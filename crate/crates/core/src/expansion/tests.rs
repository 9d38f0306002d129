use proptest::prelude::*;

use super::*;
use crate::term_core::{Binder, ConstName, MetaId, Mode, SimpleType};

fn c(name: &str, args: Vec<Term>) -> Term {
    Term::constant(ConstName::new(name), args)
}

fn rec(name: &str) -> Term {
    Term::rec(RecId::new(name), vec![])
}

fn conat() -> SimpleType {
    SimpleType::base("conat")
}

fn defs_of(items: Vec<(&str, Term)>) -> Defs {
    items
        .into_iter()
        .map(|(n, body)| (RecId::new(n), Def::new(vec![], body, conat())))
        .collect()
}

fn omega_defs() -> Defs {
    defs_of(vec![("omega", c("cosucc", vec![rec("omega")]))])
}

#[test]
fn depth_zero_is_bottom() {
    assert_eq!(expand(&omega_defs(), &rec("omega"), 0).unwrap(), BotTerm::Bot);
}

#[test]
fn omega_at_depth_two() {
    let node = |arg| BotTerm::Node {
        lams: 0,
        head: BotHead::Const(ConstName::new("cosucc")),
        args: vec![arg],
    };
    let want = node(node(BotTerm::Bot));
    assert_eq!(expand(&omega_defs(), &rec("omega"), 2).unwrap(), want);
    assert_eq!(want.to_string(), "cosucc (cosucc ⊥)");
}

#[test]
fn metavariable_is_a_leaf() {
    let el = SimpleType::base("element");
    let t = Term::lam(
        vec![Binder::new(Var::new("x"), el.clone()), Binder::new(Var::new("y"), el)],
        Term::meta(MetaId::new("H"), Mode::Rec, vec![Var::new("y")]),
    );
    let got = expand(&Defs::new(), &t, 3).unwrap();
    assert_eq!(
        got,
        BotTerm::Leaf {
            lams: 2,
            meta: MetaId::new("H"),
            mode: Mode::Rec,
            args: vec![Atom::Bound(1)],
        }
    );
}

#[test]
fn undefined_rec_is_an_error() {
    assert!(matches!(
        expand(&Defs::new(), &rec("nope"), 1),
        Err(ExpandError::UndefinedRec(_))
    ));
}

#[test]
fn loops_of_different_period_are_equal() {
    let flat = defs_of(vec![
        ("r", c("c", vec![rec("r")])),
        ("s", c("c", vec![rec("s1")])),
        ("s1", c("c", vec![rec("s")])),
    ]);
    assert!(equal_rational_in(&flat, &rec("r"), &flat, &rec("s")).unwrap());
    let nested = defs_of(vec![
        ("r", c("c", vec![rec("r")])),
        ("s", c("c", vec![c("c", vec![rec("s")])])),
    ]);
    assert!(equal_rational_in(&nested, &rec("r"), &nested, &rec("s")).unwrap());
}

#[test]
fn reflexive() {
    let d = omega_defs();
    assert!(equal_rational_in(&d, &rec("omega"), &d, &rec("omega")).unwrap());
}

#[test]
fn omega_differs_from_successor_of_meta() {
    let d = omega_defs();
    let h = Term::meta(MetaId::new("H"), Mode::Rec, vec![]);
    let other = c("cosucc", vec![h]);
    assert!(!equal_rational_in(&d, &rec("omega"), &d, &other).unwrap());
    assert_eq!(
        first_divergence(&d, &rec("omega"), &d, &other, 25).unwrap(),
        Some(2)
    );
}

#[test]
fn distinct_nullary_constructors() {
    let d = Defs::new();
    let mut ctx = UnifContext::new();
    ctx.defs = d;
    let eq = Equation::new(c("c", vec![]), c("d", vec![]));
    assert!(!equation_holds(&ctx, &eq).unwrap());
}

#[test]
fn binders_compare_up_to_alpha() {
    let el = SimpleType::base("element");
    let x = Var::new("x");
    let y = Var::new("y");
    let body = |v: &Var| c("put", vec![Term::var(v.clone(), vec![]), rec("k")]);
    let d = defs_of(vec![("k", c("stop", vec![]))]);
    let l = c("get", vec![Term::lam(vec![Binder::new(x.clone(), el.clone())], body(&x))]);
    let r = c("get", vec![Term::lam(vec![Binder::new(y.clone(), el)], body(&y))]);
    assert!(equal_rational_in(&d, &l, &d, &r).unwrap());
    assert_eq!(expand(&d, &l, 4).unwrap(), expand(&d, &r, 4).unwrap());
}

/// Random closed FO definitions over `z/0`, `s/1`, `p/2`, each body one or
/// two constructor levels deep.
fn arb_defs(n: usize) -> impl Strategy<Value = Defs> {
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let leaf = {
        let names = names.clone();
        prop_oneof![
            Just(c("z", vec![])),
            (0..n).prop_map(move |i| rec(&names[i])),
        ]
    };
    let shallow = leaf.prop_recursive(1, 4, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| c("s", vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| c("p", vec![a, b])),
        ]
    });
    let body = prop_oneof![
        Just(c("z", vec![])),
        shallow.clone().prop_map(|a| c("s", vec![a])),
        (shallow.clone(), shallow).prop_map(|(a, b)| c("p", vec![a, b])),
    ];
    proptest::collection::vec(body, n).prop_map(move |bodies| {
        bodies
            .into_iter()
            .enumerate()
            .map(|(i, b)| (RecId::new(&names[i]), Def::new(vec![], b, conat())))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rational_equality_matches_bounded_check(defs in arb_defs(4), i in 0usize..4, j in 0usize..4) {
        let l = rec(&format!("q{i}"));
        let r = rec(&format!("q{j}"));
        let coinductive = equal_rational_in(&defs, &l, &defs, &r).unwrap();
        let bounded = first_divergence(&defs, &l, &defs, &r, DEFAULT_DEPTH).unwrap().is_none();
        prop_assert_eq!(coinductive, bounded);
    }

    #[test]
    fn refinement_is_monotone(defs in arb_defs(3), i in 0usize..3, k in 0usize..8) {
        let t = rec(&format!("q{i}"));
        let deeper = expand(&defs, &t, k + 1).unwrap();
        prop_assert_eq!(deeper.truncate(k), expand(&defs, &t, k).unwrap());
    }

    #[test]
    fn equality_is_an_equivalence(defs in arb_defs(4), i in 0usize..4, j in 0usize..4, m in 0usize..4) {
        let t = |n: usize| rec(&format!("q{n}"));
        let eq = |a: usize, b: usize| equal_rational_in(&defs, &t(a), &defs, &t(b)).unwrap();
        prop_assert!(eq(i, i));
        prop_assert_eq!(eq(i, j), eq(j, i));
        if eq(i, j) && eq(j, m) {
            prop_assert!(eq(i, m));
        }
    }

    #[test]
    fn expansion_ignores_equations(defs in arb_defs(3), i in 0usize..3) {
        let mut ctx = UnifContext::new();
        ctx.defs = defs.clone();
        let t = rec(&format!("q{i}"));
        let before = expand(&ctx.defs, &t, 6).unwrap();
        ctx.add_equation(Equation::new(rec("q0"), rec("q1")));
        prop_assert_eq!(before, expand(&ctx.defs, &t, 6).unwrap());
    }
}
