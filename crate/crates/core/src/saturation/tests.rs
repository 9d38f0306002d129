use std::collections::HashSet;

use super::*;
use crate::expansion::subst_equal;
use crate::fixtures;
use crate::flatten::flatten;
use crate::mgu_extract::mgu;
use crate::surface::{load_problem, Namer};
use crate::term_core::{Binder, Body, Def, Equation, MetaId, Mode, RecId, SimpleType, Term, Var};

fn flat(name: &str) -> UnifContext {
    let (sig, ctx) = load_problem(fixtures::get(name)).unwrap();
    flatten(&sig, &ctx).unwrap()
}

fn run_with(name: &str, cfg: &SatConfig) -> Saturation {
    saturate_with(&flat(name), cfg, NameSupply::new()).unwrap()
}

fn run(name: &str) -> Saturation {
    run_with(name, &SatConfig::new(SatMode::HigherOrder))
}

fn produced_rules(s: &Saturation) -> Vec<&'static str> {
    s.trace.rules().into_iter().map(RuleId::name).collect()
}

fn item_text(s: &Saturation, n: usize) -> String {
    match s.trace.item(ItemNo(n)).unwrap() {
        TraceItem::Eq(e) => e.to_string(),
        TraceItem::Def(r, d) => format!("{r} =_d {}", d.as_lambda()),
        TraceItem::Contra => "contra".into(),
    }
}

#[test]
fn conat_first_order_steps() {
    let s = run_with("conat", &SatConfig::new(SatMode::FirstOrder));
    assert_eq!(produced_rules(&s), ["R-EXP", "SIMP", "R-EXP", "SIMP"]);
    assert_eq!(item_text(&s, 8), "omega ≐ H");
    assert!(!s.context.contra);
}

#[test]
fn first_order_mode_rejects_binders() {
    let err = saturate(&flat("stream"), SatMode::FirstOrder).unwrap_err();
    assert_eq!(err, SatError::NotFirstOrder);
}

#[test]
fn stream_trace_follows_the_worked_example() {
    let s = run("stream");
    assert_eq!(
        produced_rules(&s),
        ["REC-EXP", "SIMP", "N-INST", "REC-EXP", "SIMP", "N-INST"]
    );
    assert_eq!(s.trace.steps[0].premises, vec![ItemNo(1), ItemNo(2), ItemNo(4)]);
    assert_eq!(s.trace.steps[3].premises, vec![ItemNo(10), ItemNo(3), ItemNo(5)]);
    assert_eq!(item_text(&s, 10), "r2 z1 ≐ even");
    assert_eq!(item_text(&s, 13), "S z1 z2 ≐ r3 z2");
}

#[test]
fn no_solution_ends_in_projection_failure() {
    let s = run("no_solution");
    assert!(s.context.contra);
    let last = s.trace.steps.last().unwrap();
    assert_eq!(last.rule, RuleId::ProjF);
    assert_eq!(last.produced, vec![(ItemNo(29), TraceItem::Contra)]);
    for r in [RuleId::Prune, RuleId::Imit, RuleId::UTrans] {
        assert!(s.trace.count(r) > 0, "{r}");
    }
}

#[test]
fn full_saturation_keeps_contra() {
    let mut cfg = SatConfig::new(SatMode::HigherOrder);
    cfg.stop_on_contra = false;
    let s = run_with("no_solution", &cfg);
    assert!(s.context.contra);
    assert!(s.trace.steps.len() >= run("no_solution").trace.steps.len());
}

#[test]
fn double_consumer_uses_flex_rules_and_pruning() {
    let s = run("double_consumer");
    for r in [RuleId::FfS, RuleId::NAgree, RuleId::Prune] {
        assert!(s.trace.count(r) > 0, "{r} missing from\n{}", s.trace.render(&mut Namer::new()));
    }
    let ffs = s.trace.steps.iter().position(|st| st.rule == RuleId::FfS).unwrap();
    let prune = s.trace.steps.iter().position(|st| st.rule == RuleId::Prune).unwrap();
    assert!(ffs < prune);
}

#[test]
fn variable_dependency_fires_one_flex_flex_step() {
    let s = run("var_dependency");
    assert_eq!(s.trace.count(RuleId::FfD), 1);
    assert_eq!(item_text(&s, 11), "H z1 ≐ S z2");
    let step = s.trace.producer(ItemNo(12)).unwrap();
    assert_eq!(step.rule, RuleId::FfD);
    assert_eq!(step.produced.len(), 2);
    assert_eq!(step.new_metas.len(), 1);
    assert_eq!(step.new_metas[0].1.ty, SimpleType::base("sp"));
}

#[test]
fn producer_and_consumer_need_one_instantiation() {
    for name in ["producer", "consumer"] {
        assert_eq!(produced_rules(&run(name)), ["N-INST"], "{name}");
    }
}

#[test]
fn replay_rebuilds_the_context() {
    for (name, _) in fixtures::ALL {
        let initial = flat(name);
        let s = run(name);
        let replayed = s.trace.replay(&initial);
        let keys = |c: &UnifContext| c.eqs.iter().map(Equation::key).collect::<HashSet<_>>();
        assert_eq!(keys(&replayed), keys(&s.context), "{name}");
        assert_eq!(replayed.defs, s.context.defs, "{name}");
        assert_eq!(replayed.contra, s.context.contra, "{name}");
        s.context.check_well_formed().unwrap();
    }
}

#[test]
fn statuses_are_monotone_along_traces() {
    for name in ["no_solution", "double_consumer", "var_dependency"] {
        let initial = flat(name);
        let s = run(name);
        let mut prefix = SatTrace {
            given: s.trace.given.clone(),
            steps: Vec::new(),
        };
        let mut resolved: HashSet<MetaId> = HashSet::new();
        let mut pruned: HashSet<RecId> = HashSet::new();
        for step in &s.trace.steps {
            prefix.steps.push(step.clone());
            let ctx = prefix.replay(&initial);
            let now: HashSet<MetaId> = ctx.uv().into_iter().filter(|m| status_metavar(&ctx, m).is_resolved()).collect();
            let now_pruned: HashSet<RecId> = ctx
                .defs
                .keys()
                .filter(|r| matches!(status_recconst(&ctx, r), RecStatus::Pruned(_)))
                .cloned()
                .collect();
            assert!(resolved.is_subset(&now), "{name}");
            assert!(pruned.is_subset(&now_pruned), "{name}");
            resolved = now;
            pruned = now_pruned;
        }
    }
}

#[test]
fn measure_decreases_at_symbol_creation() {
    for (name, _) in fixtures::ALL {
        let s = run(name);
        if name == "double_consumer" {
            continue;
        }
        assert!(s.violations.is_empty(), "{name}: {:?}", s.violations);
        assert_eq!(measure(&s.context), {
            let initial = flat(name);
            let mut full = s.trace.replay(&initial);
            full.metas = s.context.metas.clone();
            measure(&full)
        });
    }
}

/// FF-S on a metavariable that a resolution already pins adds an
/// unresolved representative without removing anything.
#[test]
fn same_variable_step_on_a_resolved_metavariable_grows_the_measure() {
    let s = run("double_consumer");
    assert_eq!(s.violations.len(), 1);
    let v = &s.violations[0];
    assert_eq!(v.rule, RuleId::FfS);
    assert_eq!(v.before.a, v.after.a);
    assert_eq!(v.after.c.elements(), vec![0]);
}

#[test]
fn incremental_measure_matches_recomputation() {
    let s = run("no_solution");
    let before = measure(&flat("no_solution"));
    let after = measure(&s.context);
    assert!(after < before, "{before} -> {after}");
}

#[test]
fn schema_matching_on_the_stream_context() {
    let s = run("stream");
    let z = Var::new("$q");
    let r2z = Term::rec(RecId::new("$r2"), vec![z.clone()]);
    let even = Term::rec(RecId::new("even"), vec![]);
    let odd = Term::rec(RecId::new("odd"), vec![]);
    let schema = |rhs: &Term| Schema::new(vec![Hole::Var(z.clone())], vec![Equation::new(r2z.clone(), rhs.clone())], vec![]).unwrap();
    assert!(match_schema(&s.context, &schema(&even)));
    assert!(!match_schema(&s.context, &schema(&odd)));
    // Before the instantiation step only the λ-form is present.
    let mut before = SatTrace {
        given: s.trace.given.clone(),
        steps: s.trace.steps[..2].to_vec(),
    }
    .replay(&flat("stream"));
    assert!(!match_schema(&before, &schema(&even)));
    before.eqs.push(Equation::new(Term::rec(RecId::new("$r2"), vec![Var::new("u")]), even.clone()));
    assert!(match_schema(&before, &schema(&even)));
    assert!(Schema::new(vec![Hole::Var(z.clone()), Hole::Var(z.clone())], vec![], vec![]).is_err());
}

#[test]
fn schema_variable_holes_are_injective() {
    let mut ctx = UnifContext::new();
    let c = |a: &str, b: &str| {
        Term::constant(
            crate::term_core::ConstName::new("pair"),
            vec![Term::var(Var::new(a), vec![]), Term::var(Var::new(b), vec![])],
        )
    };
    let g = Term::meta(MetaId::new("G"), Mode::Con, vec![]);
    ctx.eqs.push(Equation::new(c("u", "u"), g.clone()));
    let holes = vec![Hole::Var(Var::new("x")), Hole::Var(Var::new("y"))];
    let s = Schema::new(holes, vec![Equation::new(c("x", "y"), g.clone())], vec![]).unwrap();
    assert!(!match_schema(&ctx, &s));
    ctx.eqs.push(Equation::new(c("u", "v"), g.clone()));
    assert!(match_schema(&ctx, &s));
}

#[test]
fn schema_definitions_match_up_to_their_holes() {
    let mut ctx = UnifContext::new();
    let e = SimpleType::base("e");
    let p = Binder::new(Var::new("p"), e.clone());
    let body = Term::meta(MetaId::new("K"), Mode::Con, vec![Var::new("p")]);
    ctx.defs.insert(RecId::new("t"), Def::new(vec![p.clone()], body.clone(), SimpleType::base("s")));
    let hole_body = Term::meta(MetaId::new("G"), Mode::Con, vec![Var::new("p")]);
    let def = Def::new(vec![p], hole_body, SimpleType::base("s"));
    let s = Schema::new(vec![Hole::Rec(RecId::new("u")), Hole::Meta(MetaId::new("G"))], vec![], vec![(RecId::new("u"), def.clone())]).unwrap();
    assert!(match_schema(&ctx, &s));
    let rigid = Schema::new(vec![Hole::Rec(RecId::new("u"))], vec![], vec![(RecId::new("u"), def)]).unwrap();
    assert!(!match_schema(&ctx, &rigid));
}

#[test]
fn reversed_schedule_gives_the_same_unifiers() {
    let mut lifo = SatConfig::new(SatMode::HigherOrder);
    lifo.schedule = Schedule::Lifo;
    for (name, _) in fixtures::ALL {
        let initial = flat(name);
        let a = run(name);
        let b = run_with(name, &lifo);
        assert_eq!(a.context.contra, b.context.contra, "{name}");
        if a.context.contra {
            continue;
        }
        let user = initial.uv();
        let ga = mgu(&a.context, Some(&user)).unwrap();
        let gb = mgu(&b.context, Some(&user)).unwrap();
        assert!(subst_equal(&ga, &gb).unwrap(), "{name}: {ga} vs {gb}");
    }
}

#[test]
fn step_budget_is_enforced() {
    let mut cfg = SatConfig::new(SatMode::HigherOrder);
    cfg.max_steps = 2;
    let err = saturate_with(&flat("stream"), &cfg, NameSupply::new()).unwrap_err();
    assert_eq!(err, SatError::Budget(2));
}

#[test]
fn unknown_metavariables_are_reported() {
    let mut ctx = flat("var_dependency");
    ctx.metas.clear();
    assert!(matches!(saturate(&ctx, SatMode::HigherOrder), Err(SatError::UnknownMeta(_))));
}

#[test]
fn fresh_names_avoid_the_input() {
    let s = run("no_solution");
    let given: HashSet<String> = s.trace.given.iter().filter_map(|(_, i)| match i {
        TraceItem::Def(r, _) => Some(r.as_str().to_string()),
        _ => None,
    }).collect();
    for st in &s.trace.steps {
        for (_, item) in &st.produced {
            if let TraceItem::Def(r, _) = item {
                assert!(!given.contains(r.as_str()));
            }
        }
    }
}

#[test]
fn rendered_trace_lists_every_item() {
    let s = run("no_solution");
    let text = s.trace.render(&mut Namer::new());
    assert_eq!(text.lines().count(), 29);
    assert!(text.lines().last().unwrap().starts_with("(29) contra"));
    assert!(text.contains("by PRUNE on (13)"));
}

#[test]
fn flex_flex_pattern_pair() {
    let s = run("pattern_pair");
    assert_eq!(produced_rules(&s), ["N-INST", "FF-D"]);
    let step = &s.trace.steps[1];
    let TraceItem::Eq(e) = &step.produced[0].1 else { panic!() };
    let Body::Meta { args, .. } = &e.rhs.body else { panic!() };
    assert_eq!(args.len(), 1);
}
