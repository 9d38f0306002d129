use proptest::prelude::*;

use super::*;
use crate::expansion::{subst_equal, DEFAULT_DEPTH};
use crate::fixtures;
use crate::flatten::flatten;
use crate::mgu_extract::{mediate, mgu};
use crate::saturation::{saturate, SatMode};
use crate::surface::{load_problem, parse_substitution, print_problem, ConcreteContext};
use crate::term_core::{compose, restrict, ConstName, MetaId, Signature, Substitution, UnifContext};

fn subst(text: &str, sig: &Signature, ctx: &ConcreteContext) -> Substitution {
    let g = parse_substitution(text, sig, &ctx.metas).unwrap();
    Substitution {
        entries: g.entries,
        defs: g.defs,
        free_metas: g.free_metas,
    }
}

struct Run {
    saturated: UnifContext,
    unifier: Option<Substitution>,
}

fn engine(sig: &Signature, ctx: &ConcreteContext) -> Run {
    let flat = flatten(sig, ctx).unwrap();
    let mode = if flat.is_first_order() { SatMode::FirstOrder } else { SatMode::HigherOrder };
    let (saturated, _) = saturate(&flat, mode).unwrap();
    let unifier = (!saturated.contra).then(|| mgu(&saturated, Some(&flat.uv())).unwrap());
    Run { saturated, unifier }
}

const FO_SIG: &str = "d : cotype.\nc : d -> d.\ne : d -> d.\na : d.\n";

#[test]
fn conat_unifier_holds_to_depth_25() {
    let (sig, ctx) = load_problem(fixtures::get("conat")).unwrap();
    let g = subst("H := omega.\nomega : conat = cosucc omega.\n", &sig, &ctx);
    let report = verify_concrete(&ctx, &g, DEFAULT_DEPTH).unwrap();
    assert!(report.holds(), "{report:?}");
    assert_eq!(report.equations.len(), 1);
    assert_eq!(report.first_failure(), None);
}

#[test]
fn wrong_stream_fails_at_the_first_differing_depth() {
    let (sig, ctx) = load_problem(fixtures::get("stream")).unwrap();
    // get (λx. get (λy. t)) against odd: the third level has get on the
    // left and put on the right.
    let g = subst("S := [z] [w] t.\nt : sp = get ([x] t).\n", &sig, &ctx);
    let report = verify_concrete(&ctx, &g, DEFAULT_DEPTH).unwrap();
    assert!(!report.holds());
    assert_eq!(report.first_failure(), Some(3));
    let EqCheck::FailsAt { left, right, .. } = &report.equations[0].1 else { panic!() };
    assert_ne!(left, right);
    assert_eq!(left.truncate(2), right.truncate(2));
    assert_eq!(left.depth(), 3);
}

#[test]
fn empty_context_is_vacuously_unified() {
    let report = verify_unifier(&UnifContext::new(), &Substitution::new(), DEFAULT_DEPTH).unwrap();
    assert!(report.holds());
    assert!(report.equations.is_empty());
}

#[test]
fn uncovered_metavariables_are_rejected() {
    let (sig, ctx) = load_problem(fixtures::get("conat")).unwrap();
    let flat = flatten(&sig, &ctx).unwrap();
    let err = verify_unifier(&flat, &Substitution::new(), 5).unwrap_err();
    assert_eq!(err, OracleError::NotCovered(MetaId::new("H")));
}

#[test]
fn engine_unifiers_of_fixtures_verify() {
    for (name, text) in fixtures::ALL {
        let (sig, ctx) = load_problem(text).unwrap();
        let run = engine(&sig, &ctx);
        let Some(g) = run.unifier else {
            assert_eq!(name, "no_solution");
            continue;
        };
        let report = verify_concrete(&ctx, &g, DEFAULT_DEPTH).unwrap();
        assert!(report.holds(), "{name}: {report:?}");
        assert!(run.saturated.check_well_formed().is_ok());
    }
}

#[test]
fn robinson_solves_a_simple_problem() {
    let (sig, ctx) = load_problem(&format!("{FO_SIG}?- c H = c (e a).\n")).unwrap();
    let RobinsonOutcome::Unifier(g) = robinson_acyclic(&ctx).unwrap() else { panic!() };
    assert!(subst_equal(&g, &subst("H := e a.", &sig, &ctx)).unwrap());
}

#[test]
fn robinson_binds_through_chains() {
    let (sig, ctx) = load_problem(&format!("{FO_SIG}?- c H = K. K = c (e L). L = a.\n")).unwrap();
    let RobinsonOutcome::Unifier(g) = robinson_acyclic(&ctx).unwrap() else { panic!() };
    let expected = subst("H := e a. K := c (e a). L := a.", &sig, &ctx);
    assert!(subst_equal(&g, &expected).unwrap(), "{g}");
    assert!(g.free_metas.is_empty());
}

#[test]
fn occurs_check_failure_has_a_cyclic_solution() {
    let (sig, ctx) = load_problem(&format!("{FO_SIG}?- H = c H.\n")).unwrap();
    assert_eq!(robinson_acyclic(&ctx).unwrap(), RobinsonOutcome::OccursFail(MetaId::new("H")));
    let g = engine(&sig, &ctx).unifier.unwrap();
    assert!(subst_equal(&g, &subst("H := r.\nr : d = c r.\n", &sig, &ctx)).unwrap(), "{g}");
}

#[test]
fn constructor_clash() {
    let (sig, ctx) = load_problem(&format!("{FO_SIG}?- c H = e K.\n")).unwrap();
    assert_eq!(
        robinson_acyclic(&ctx).unwrap(),
        RobinsonOutcome::Clash(ConstName::new("c"), ConstName::new("e"))
    );
    assert!(engine(&sig, &ctx).saturated.contra);
}

#[test]
fn a_clash_behind_an_occurs_failure_is_reported() {
    let (sig, ctx) = load_problem(&format!("{FO_SIG}?- c (c H) = c (c (c H)). H = a.\n")).unwrap();
    assert_eq!(
        robinson_acyclic(&ctx).unwrap(),
        RobinsonOutcome::Clash(ConstName::new("c"), ConstName::new("a"))
    );
    assert!(engine(&sig, &ctx).saturated.contra);
}

#[test]
fn robinson_inlines_plain_definitions_only() {
    let (_, ctx) = load_problem(&format!("{FO_SIG}b : d = c a.\n?- H = e b.\n")).unwrap();
    assert!(matches!(robinson_acyclic(&ctx).unwrap(), RobinsonOutcome::Unifier(_)));
    let (_, ctx) = load_problem(&format!("{FO_SIG}b : d = c b.\n?- H = e b.\n")).unwrap();
    assert!(matches!(robinson_acyclic(&ctx), Err(OracleError::Recursive(_))));
    let (_, ctx) = load_problem(fixtures::get("stream")).unwrap();
    assert!(robinson_acyclic(&ctx).is_err());
}

#[test]
fn generated_problems_are_reproducible() {
    for mode in [GenMode::FirstOrder, GenMode::HigherOrder] {
        let cfg = GenConfig::new(mode, true);
        for seed in 0..20 {
            let a = gen_problem(&cfg, seed).unwrap();
            let b = gen_problem(&cfg, seed).unwrap();
            assert_eq!(a.text, b.text);
            assert_eq!(print_problem(&a.sig, &a.ctx), print_problem(&b.sig, &b.ctx));
        }
    }
}

#[test]
fn higher_order_problems_use_patterns() {
    let cfg = GenConfig::new(GenMode::HigherOrder, false);
    let with_args = (0..50)
        .filter(|&s| {
            let p = gen_problem(&cfg, s).unwrap();
            p.ctx.metas.values().any(|i| i.width() > 0)
        })
        .count();
    assert!(with_args > 10, "{with_args}");
}

/// Engine against the occurs-check baseline on one acyclic problem.
fn differential(seed: u64) -> RobinsonOutcome {
    let p = gen_problem(&GenConfig::new(GenMode::FirstOrder, false), seed).unwrap();
    let outcome = robinson_acyclic(&p.ctx).unwrap();
    let run = engine(&p.sig, &p.ctx);
    match &outcome {
        RobinsonOutcome::Clash(..) => assert!(run.saturated.contra, "{}", p.text),
        RobinsonOutcome::OccursFail(_) => {
            let g = run.unifier.unwrap_or_else(|| panic!("{}", p.text));
            assert!(verify_concrete(&p.ctx, &g, DEFAULT_DEPTH).unwrap().holds(), "{}", p.text);
        }
        RobinsonOutcome::Unifier(g2) => {
            let g = run.unifier.unwrap_or_else(|| panic!("{}", p.text));
            assert!(verify_concrete(&p.ctx, &g, DEFAULT_DEPTH).unwrap().holds(), "{}", p.text);
            let m = mediate(&run.saturated, &g, g2).unwrap_or_else(|e| panic!("{e}\n{}", p.text));
            let back = restrict(&compose(&g, &m).unwrap(), &g2.domain());
            assert!(subst_equal(&back, g2).unwrap(), "{}\n{back}\nvs {g2}", p.text);
        }
    }
    outcome
}

#[test]
fn differential_against_the_baseline() {
    let mut kinds = [0usize; 3];
    for seed in 0..200 {
        kinds[match differential(seed) {
            RobinsonOutcome::Unifier(_) => 0,
            RobinsonOutcome::OccursFail(_) => 1,
            RobinsonOutcome::Clash(..) => 2,
        }] += 1;
    }
    assert!(kinds.iter().all(|&n| n > 0), "{kinds:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn acyclic_problems_suit_the_baseline(seed in any::<u64>()) {
        let p = gen_problem(&GenConfig::new(GenMode::FirstOrder, false), seed).unwrap();
        prop_assert!(robinson_acyclic(&p.ctx).is_ok());
        prop_assert!(p.ctx.defs.is_empty());
    }

    #[test]
    fn generated_problems_flatten(seed in any::<u64>(), ho in any::<bool>(), cyclic in any::<bool>()) {
        let mode = if ho { GenMode::HigherOrder } else { GenMode::FirstOrder };
        let p = gen_problem(&GenConfig::new(mode, cyclic), seed).unwrap();
        let (sig, ctx) = load_problem(&print_problem(&p.sig, &p.ctx)).unwrap();
        prop_assert!(ctx.alpha_eq(&p.ctx));
        let flat = flatten(&sig, &ctx).unwrap();
        prop_assert!(flat.check_well_formed().is_ok());
        if !ho {
            prop_assert!(flat.is_first_order());
        }
    }

    #[test]
    fn engine_unifiers_verify_at_every_depth(seed in any::<u64>(), ho in any::<bool>(), k in 0usize..=25) {
        let mode = if ho { GenMode::HigherOrder } else { GenMode::FirstOrder };
        let p = gen_problem(&GenConfig::new(mode, true), seed).unwrap();
        if let Some(g) = engine(&p.sig, &p.ctx).unifier {
            let report = verify_concrete(&p.ctx, &g, k).unwrap();
            prop_assert!(report.holds(), "{}\n{:?}", p.text, report);
        }
    }
}
