use super::*;
use crate::expansion::subst_equal;
use crate::fixtures;
use crate::flatten::flatten;
use crate::saturation::{saturate, SatMode};
use crate::surface::{load_problem, parse_substitution};
use crate::term_core::{compose, restrict, Signature};

struct Solved {
    sig: Signature,
    flat: UnifContext,
    saturated: UnifContext,
    user: Vec<MetaId>,
}

fn solve(name: &str) -> Solved {
    let (sig, ctx) = load_problem(fixtures::get(name)).unwrap();
    let flat = flatten(&sig, &ctx).unwrap();
    let (saturated, _) = saturate(&flat, SatMode::HigherOrder).unwrap();
    Solved {
        sig,
        user: flat.uv(),
        flat,
        saturated,
    }
}

impl Solved {
    fn mgu(&self) -> Substitution {
        mgu(&self.saturated, Some(&self.user)).unwrap()
    }

    fn parse(&self, text: &str) -> Substitution {
        let g = parse_substitution(text, &self.sig, &self.flat.metas).unwrap();
        Substitution {
            entries: g.entries,
            defs: g.defs,
            free_metas: g.free_metas,
        }
    }

    fn assert_mgu(&self, text: &str) {
        let got = self.mgu();
        assert!(subst_equal(&got, &self.parse(text)).unwrap(), "got {got}");
    }
}

const STREAM_DEFS: &str = "odd : sp = get ([x] even).\neven : sp = get ([x] put x odd).\n";

#[test]
fn conat_unifier() {
    let s = solve("conat");
    s.assert_mgu("H := omega.\nomega : conat = cosucc omega.\n");
    let g = s.mgu();
    assert_eq!(g.defs.len(), 1, "{g}");
}

#[test]
fn stream_unifier_keeps_only_reachable_definitions() {
    let s = solve("stream");
    s.assert_mgu(&format!("S := [z] [w] r3 w.\nr3 : element -> sp = [x] put x odd.\n{STREAM_DEFS}"));
    let g = s.mgu();
    let kept: Vec<&str> = g.defs.keys().map(RecId::as_str).collect();
    assert_eq!(kept.len(), 4, "{kept:?}");
    assert!(kept.contains(&"odd") && kept.contains(&"even"));
}

#[test]
fn producer_unifier() {
    solve("producer").assert_mgu(
        "H := [z] r1 z.\nr1 : element -> sp = [x] put (r2 x) (r1 x).\nr2 : element -> element = [x] x.\n",
    );
}

#[test]
fn consumer_unifier() {
    solve("consumer").assert_mgu("S := [z] r1 z.\nr1 : element -> sp = [x] get ([y] r1 y).\n");
}

#[test]
fn double_consumer_unifier() {
    solve("double_consumer").assert_mgu("S := [z] t.\nt : sp = get ([y] t).\n");
}

fn value_meta(g: &Substitution, m: &str) -> (MetaId, Vec<Var>) {
    match &g.entries[&MetaId::new(m)].value.body {
        Body::Meta { meta, args, .. } => (meta.clone(), args.clone()),
        other => panic!("{m} is mapped to {other:?}"),
    }
}

#[test]
fn variable_dependency_shares_an_argumentless_representative() {
    let g = solve("var_dependency").mgu();
    let (h, hargs) = value_meta(&g, "H");
    let (s, sargs) = value_meta(&g, "S");
    assert_eq!(h, s);
    assert!(hargs.is_empty() && sargs.is_empty());
}

#[test]
fn self_application_unifier() {
    solve("self_application").assert_mgu("F := [x] r x.\nr : (a -> a) -> a = [x] x (r x).\n");
}

#[test]
fn pattern_pair_keeps_only_the_shared_variable() {
    let g = solve("pattern_pair").mgu();
    let f = &g.entries[&MetaId::new("F")];
    let gg = &g.entries[&MetaId::new("G")];
    let (fm, fargs) = value_meta(&g, "F");
    let (gm, gargs) = value_meta(&g, "G");
    assert_eq!(fm, gm);
    // F x y keeps its second argument, G y z its first.
    assert_eq!(fargs, vec![f.pattern[1].var.clone()]);
    assert_eq!(gargs, vec![gg.pattern[0].var.clone()]);
}

#[test]
fn domain_is_every_metavariable() {
    for (name, _) in fixtures::ALL {
        let s = solve(name);
        if s.saturated.contra {
            assert_eq!(unif(&s.saturated), Err(UnifError::Contradictory));
            continue;
        }
        let g = unif(&s.saturated).unwrap();
        let mut dom = g.domain();
        let mut uv = s.saturated.uv();
        dom.sort();
        uv.sort();
        assert_eq!(dom, uv, "{name}");
        g.check_well_formed().unwrap();
        assert!(modes_consistent(&g), "{name}: {g}");
    }
}

#[test]
fn choice_policy_does_not_matter() {
    for (name, _) in fixtures::ALL {
        let s = solve(name);
        if s.saturated.contra {
            continue;
        }
        let a = gc_defs(&unif_with(&s.saturated, ChoicePolicy::First).unwrap());
        let b = gc_defs(&unif_with(&s.saturated, ChoicePolicy::Last).unwrap());
        assert!(subst_equal(&a, &b).unwrap(), "{name}: {a} vs {b}");
    }
}

#[test]
fn gc_keeps_the_meaning() {
    for (name, _) in fixtures::ALL {
        let s = solve(name);
        if s.saturated.contra {
            continue;
        }
        let g = unif(&s.saturated).unwrap();
        let small = gc_defs(&g);
        assert!(small.defs.len() <= g.defs.len());
        assert!(subst_equal(&g, &small).unwrap(), "{name}");
        assert_eq!(gc_defs(&Substitution::new()), Substitution::new());
    }
}

fn mediated(s: &Solved, g2: &Substitution) -> Substitution {
    let g = s.mgu();
    let m = mediate(&s.saturated, &g, g2).unwrap();
    let dom = g2.domain();
    restrict(&compose(&g, &m).unwrap(), &dom)
}

#[test]
fn mediation_reproduces_the_unifier_itself() {
    for name in ["conat", "stream", "double_consumer", "var_dependency", "pattern_pair"] {
        let s = solve(name);
        let g = s.mgu();
        let m = mediate(&s.saturated, &g, &g).unwrap();
        for (r, e) in &m.entries {
            assert!(matches!(&e.value.body, Body::Meta { meta, .. } if meta == r), "{name}");
        }
        assert!(subst_equal(&mediated(&s, &g), &g).unwrap(), "{name}");
    }
}

#[test]
fn mediation_towards_a_specific_unifier() {
    let s = solve("var_dependency");
    let g2 = s.parse("H := [x] t.\nS := [x] t.\nt : sp = get ([y] t).\n");
    assert!(subst_equal(&mediated(&s, &g2), &g2).unwrap());

    let s = solve("conat");
    let g2 = s.parse("H := omega.\nomega : conat = cosucc omega.\n");
    assert!(subst_equal(&mediated(&s, &g2), &g2).unwrap());
}

#[test]
fn mediation_rejects_a_non_instance() {
    let s = solve("var_dependency");
    let g2 = s.parse("H := [x] put x t.\nS := [x] t.\nt : sp = get ([y] t).\n");
    let g = s.mgu();
    assert!(mediate(&s.saturated, &g, &g2).is_err());
}

#[test]
fn equivalence_allows_renaming_the_range() {
    let s = solve("var_dependency");
    let g = s.mgu();
    let renamed = s.parse("H := [x] K.\nS := [x] K.\n");
    assert!(equivalent(&g, &renamed).unwrap());
    let split = s.parse("H := [x] K.\nS := [x] L.\n");
    assert!(!equivalent(&g, &split).unwrap());
    let narrower = s.parse("H := [x] t.\nS := [x] t.\nt : sp = get ([y] t).\n");
    assert!(!equivalent(&g, &narrower).unwrap());
}
