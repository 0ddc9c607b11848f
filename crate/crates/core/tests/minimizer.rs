use std::time::Duration;

use proptest::prelude::*;
use tempohorn::backend::{emit_smtlib, run_solver, Outcome, SolverConfig};
use tempohorn::chc::{parse_clauses, ClauseSet};
use tempohorn::fixtures;
use tempohorn::generate::{corpus, GenOptions};
use tempohorn::minimizer::{
    apply_renaming, bodies_equivalent, coarsest_cp_equivalence, minimize, natural_cmp, Partition,
};
use tempohorn::specializer::specialize;

fn listing() -> ClauseSet {
    parse_clauses(fixtures::REMOVAL_OUTPUT)
        .unwrap()
        .normalized()
}

fn solve(set: &ClauseSet) -> Outcome {
    let v = run_solver(
        &SolverConfig::from_env(Duration::from_secs(60)),
        &emit_smtlib(set),
    );
    assert!(v.outcome.is_definitive(), "{}: {}", v.solver, v.raw);
    v.outcome
}

fn sorted_classes(p: &Partition) -> Vec<Vec<String>> {
    let mut cs: Vec<Vec<String>> = p
        .classes()
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort();
            c
        })
        .collect();
    cs.sort();
    cs
}

#[test]
fn listing_partition_is_exact() {
    let set = listing();
    assert_eq!(set.len(), 51);
    let e = coarsest_cp_equivalence(&set).unwrap();
    let expected = Partition::new(
        [
            &["new44", "new17", "new11", "new10"][..],
            &["new7", "new6"],
            &["new5", "new4"],
            &["new37"],
            &["new21"],
            &["new3"],
            &["new2"],
            &["new1"],
        ]
        .iter()
        .map(|c| c.iter().map(|s| s.to_string()).collect())
        .collect(),
    );
    assert_eq!(sorted_classes(&e), sorted_classes(&expected));
    // representatives as in the minimized listing
    for (p, r) in [("new44", "new10"), ("new7", "new6"), ("new5", "new4")] {
        assert_eq!(e.representative(p), Some(r));
    }
}

#[test]
fn renamed_listing() {
    let set = listing();
    let m = minimize(&set).unwrap();
    assert!((33..=35).contains(&m.clauses.len()), "{}", m.clauses.len());
    // same clauses as the reference minimized listing, up to canonical form
    let reference = parse_clauses(fixtures::EQUIVALENCE_OUTPUT)
        .unwrap()
        .normalized();
    let mut ours: Vec<String> = m.clauses.clauses().iter().map(|c| c.to_string()).collect();
    let mut theirs: Vec<String> = reference.clauses().iter().map(|c| c.to_string()).collect();
    ours.sort();
    theirs.sort();
    assert_eq!(ours, theirs);
    assert_eq!(solve(&set), Outcome::Satisfiable);
    assert_eq!(solve(&m.clauses), Outcome::Satisfiable);
}

#[test]
fn classes_are_internally_equivalent() {
    let set = listing();
    let e = coarsest_cp_equivalence(&set).unwrap();
    for c in e.classes() {
        for p in c {
            for q in c {
                assert!(bodies_equivalent(p, q, &e, &set), "{p} {q}");
            }
        }
    }
}

#[test]
fn identity_partition_changes_nothing() {
    let set = listing();
    let id = Partition::new(set.predicates().map(|(p, _)| vec![p.to_string()]).collect());
    let out = apply_renaming(&set, &id).unwrap();
    assert_eq!(out.clauses(), set.clauses());
}

#[test]
fn representative_choice_does_not_matter() {
    let set = listing();
    let e = coarsest_cp_equivalence(&set).unwrap();
    let greatest =
        e.with_representatives(|c| c.iter().max_by(|a, b| natural_cmp(a, b)).unwrap().clone());
    let a = apply_renaming(&set, &e).unwrap();
    let b = apply_renaming(&set, &greatest).unwrap();
    assert_eq!(a.len(), b.len());
    assert_eq!(solve(&a), solve(&b));
}

#[test]
fn minimized_specializer_output() {
    for c in corpus(3, 6, &GenOptions::default()) {
        let out = specialize(&c.spec, &c.prop).unwrap();
        let m = minimize(&out.clauses).unwrap();
        assert!(m.clauses.len() <= out.clauses.len());
        assert_eq!(solve(&out.clauses), solve(&m.clauses), "seed {}", c.seed);
    }
}

/// A recursive predicate defined under two names with shuffled variable
/// names and conjunct order.
fn two_copies(k: i64, swap: bool) -> String {
    let (p, q) = if swap { ("q", "p") } else { ("p", "q") };
    format!(
        "{p}(A,B) :- A=0, B={k}.\n{p}(A,B) :- A>0, C=A-1, {p}(C,B).\n\
         {q}(X,Y) :- Y={k}, X=0.\n{q}(U,V) :- W=U-1, U>=1, {q}(W,V).\n\
         false :- A>0, B>{k}, {p}(A,B), {q}(A,B).\n"
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verbatim_copies_merge(k in -3i64..4, swap in any::<bool>()) {
        let set = parse_clauses(&two_copies(k, swap)).unwrap().normalized();
        let m = minimize(&set).unwrap();
        prop_assert_eq!(m.partition.classes().len(), 1);
        prop_assert_eq!(m.clauses.len(), 3);
        let again = minimize(&m.clauses).unwrap();
        prop_assert!(again.partition.is_discrete());
        prop_assert_eq!(&again.clauses, &m.clauses);
    }

    #[test]
    fn different_constants_stay_apart(k in -3i64..4, d in 1i64..3) {
        let text = two_copies(k, false).replace(&format!("Y={k}"), &format!("Y={}", k + d));
        let set = parse_clauses(&text).unwrap().normalized();
        let e = coarsest_cp_equivalence(&set).unwrap();
        prop_assert!(e.is_discrete());
    }
}
