//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempohorn::backend::{emit_smtlib, run_solver, Outcome, SolverConfig};
use tempohorn::chc::{
    parse_clauses, ClauseSet, Conjunct, LinExpr, LinearConstraint, Rel, Term, Var,
};
use tempohorn::fixtures;
use tempohorn::generate::{corpus, Case, GenOptions};
use tempohorn::minimizer::{coarsest_cp_equivalence, minimize};
use tempohorn::model::{parse_bps, BusinessProcessSpec, Kind, SpecBuilder};
use tempohorn::property::parse_property;
use tempohorn::semantics::{explore, Bounds, OracleVerdict};
use tempohorn::specializer::specialize;
use tempohorn::wellformed::{check_well_formed, Condition};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn po() -> BusinessProcessSpec {
    parse_bps(fixtures::PURCHASE_ORDER).unwrap()
}

fn solver() -> SolverConfig {
    SolverConfig::from_env(Duration::from_secs(60))
}

fn solve(set: &ClauseSet) -> Result<(Outcome, Duration), String> {
    let v = run_solver(&solver(), &emit_smtlib(set));
    if v.outcome.is_definitive() {
        Ok((v.outcome, v.elapsed))
    } else {
        Err(format!(
            "solver `{}` gave {:?}: {}",
            v.solver,
            v.outcome,
            v.raw.trim()
        ))
    }
}

fn po_edit(f: impl FnOnce(&mut SpecBuilder)) -> BusinessProcessSpec {
    let mut b = po().to_builder();
    f(&mut b);
    b.build().unwrap()
}

fn parse_and_check() -> Check {
    let t = Instant::now();
    let s = po();
    ensure(s.len() == 15, format!("{} flow objects", s.len()))?;
    ensure(s.flow_count() == 17, format!("{} flows", s.flow_count()))?;
    ensure(
        check_well_formed(&s).is_empty(),
        "fixture is not well formed",
    )?;
    let mutations: Vec<(u8, BusinessProcessSpec)> = vec![
        (
            1,
            po_edit(|b| {
                b.object("end2", Kind::End).unwrap().flow("g4", "end2");
            }),
        ),
        (
            2,
            po_edit(|b| {
                b.object("x", Kind::Task)
                    .unwrap()
                    .duration("x", 1, 2)
                    .unwrap()
                    .flow("x", "x");
            }),
        ),
        (
            3,
            po_edit(|b| {
                b.flow("g2", "start");
            }),
        ),
        (
            4,
            po_edit(|b| {
                b.flow("end", "g1");
            }),
        ),
        (
            5,
            po_edit(|b| {
                b.flow("g2", "g4");
            }),
        ),
        (
            6,
            po_edit(|b| {
                b.flow("g3", "s");
            }),
        ),
        (
            7,
            po_edit(|b| {
                b.remove_flow("p", "g3");
                b.object("m", Kind::ExcMerge).unwrap();
                b.object("b", Kind::ExcBranch).unwrap();
                b.flow("p", "m")
                    .flow("m", "b")
                    .flow("b", "m")
                    .flow("b", "g3");
            }),
        ),
    ];
    for (n, spec) in &mutations {
        let v = check_well_formed(spec);
        ensure(
            v.len() == 1 && v[0].condition == Condition::Numbered(*n),
            format!("mutation for condition {n} gave {v:?}"),
        )?;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(1), format!("took {el:.2?}"))?;
    Ok(format!(
        "15 objects, 17 flows, 7 single-violation mutations, {el:.2?}"
    ))
}

/// Longest payment-to-end time, enumerated over the task durations.
fn worst_case_after_payment(s: &BusinessProcessSpec) -> i64 {
    let r = |x: &str| {
        let (lo, hi) = s.duration_bounds(x).unwrap();
        lo..=hi
    };
    let mut worst = 0;
    for i in r("i") {
        for sn in r("s") {
            for o in r("o") {
                for d in r("sd").chain(r("ed")) {
                    worst = worst.max((i + sn).max(o + d));
                }
            }
        }
    }
    worst
}

fn oracle_deadlines() -> Check {
    let t = Instant::now();
    let s = po();
    let bounds = Bounds {
        max_states: 1_000_000,
        ..Bounds::default()
    };
    let p9 = parse_property(fixtures::PO_DEADLINE_9, &s).unwrap();
    let p8 = parse_property(fixtures::PO_DEADLINE_8, &s).unwrap();
    match explore(&s, &p9, bounds) {
        OracleVerdict::NoViolationWithinBounds {
            exhaustive: true, ..
        } => {}
        v => return Err(format!("deadline 9: {v:?}")),
    }
    let OracleVerdict::Violated { times, .. } = explore(&s, &p8, bounds) else {
        return Err("deadline 8 not violated".into());
    };
    let gap = times[2] - times[1];
    let expected = worst_case_after_payment(&s);
    ensure(
        gap == 9 && expected == 9,
        format!("te - tp = {gap}, enumerated worst case {expected}"),
    )?;
    let el = t.elapsed();
    ensure(el < Duration::from_secs(30), format!("took {el:.2?}"))?;
    Ok(format!(
        "deadline 9 holds exhaustively, deadline 8 fails with te - tp = 9, {el:.2?}"
    ))
}

fn end_to_end() -> Check {
    let mut notes = Vec::new();
    for (k, expected) in [(9, 0), (8, 1)] {
        let t = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_tempohorn"))
            .arg("verify")
            .arg(fixture("purchase_order.bps"))
            .arg(fixture(&format!("po_deadline{k}.prop")))
            .output()
            .map_err(|e| e.to_string())?;
        let el = t.elapsed();
        let code = o.status.code();
        ensure(
            code == Some(expected),
            format!(
                "deadline {k}: exit {code:?}\n{}",
                String::from_utf8_lossy(&o.stdout)
            ),
        )?;
        ensure(
            el < Duration::from_secs(60),
            format!("deadline {k} took {el:.2?}"),
        )?;
        notes.push(format!("deadline {k} exit {expected} in {el:.2?}"));
    }
    Ok(notes.join(", "))
}

fn minimizer_fixture() -> Check {
    let set = parse_clauses(fixtures::REMOVAL_OUTPUT)
        .unwrap()
        .normalized();
    ensure(set.len() == 51, format!("{} input clauses", set.len()))?;
    let e = coarsest_cp_equivalence(&set).map_err(|e| e.to_string())?;
    let got: BTreeSet<BTreeSet<String>> = e
        .classes()
        .iter()
        .map(|c| c.iter().cloned().collect())
        .collect();
    let mut want: BTreeSet<BTreeSet<String>> = [
        &["new44", "new17", "new11", "new10"][..],
        &["new7", "new6"],
        &["new5", "new4"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    for p in ["new37", "new21", "new3", "new2", "new1"] {
        want.insert(BTreeSet::from([p.to_string()]));
    }
    ensure(got == want, format!("partition {got:?}"))?;
    let m = minimize(&set).map_err(|e| e.to_string())?;
    let n = m.clauses.len();
    ensure(
        (33..=35).contains(&n),
        format!("{n} clauses after renaming"),
    )?;
    let (a, _) = solve(&set)?;
    let (b, _) = solve(&m.clauses)?;
    ensure(
        a == Outcome::Satisfiable && b == Outcome::Satisfiable,
        format!("verdicts {a:?} / {b:?}"),
    )?;
    Ok(format!("partition exact, 51 -> {n} clauses, both sat"))
}

struct CorpusRun {
    entries: usize,
    decided: usize,
    mismatches: Vec<String>,
    unclean: Vec<String>,
    minimized_disagree: Vec<String>,
    specialize_time: Duration,
    solve_time: Duration,
}

fn hygienic(set: &ClauseSet) -> bool {
    set.is_pure()
        && set.predicates().all(|(p, _)| {
            p.strip_prefix("new")
                .is_some_and(|n| n.parse::<u32>().is_ok())
        })
        && set.clauses().iter().all(|c| {
            c.body
                .iter()
                .chain(c.head.atom())
                .all(|a| a.args.iter().all(|t| matches!(t, Term::Var(_))))
        })
}

fn run_corpus(cases: &[Case]) -> Result<CorpusRun, String> {
    let mut r = CorpusRun {
        entries: cases.len(),
        decided: 0,
        mismatches: Vec::new(),
        unclean: Vec::new(),
        minimized_disagree: Vec::new(),
        specialize_time: Duration::ZERO,
        solve_time: Duration::ZERO,
    };
    for c in cases {
        let t = Instant::now();
        let out = specialize(&c.spec, &c.prop).map_err(|e| format!("seed {}: {e}", c.seed))?;
        r.specialize_time += t.elapsed();
        if !hygienic(&out.clauses) {
            r.unclean.push(format!("seed {}", c.seed));
        }
        let (before, el) = solve(&out.clauses)?;
        r.solve_time += el;
        let m = minimize(&out.clauses).map_err(|e| e.to_string())?;
        let (after, _) = solve(&m.clauses)?;
        if before != after {
            r.minimized_disagree.push(format!("seed {}", c.seed));
        }
        if let Some(holds) = explore(&c.spec, &c.prop, Bounds::default()).holds() {
            r.decided += 1;
            if holds != (before == Outcome::Satisfiable) {
                r.mismatches.push(format!("seed {}", c.seed));
            }
        }
    }
    Ok(r)
}

fn corpus_cases() -> Vec<Case> {
    let mut cases = corpus(2024, 24, &GenOptions::default());
    cases.extend(corpus(
        77,
        8,
        &GenOptions {
            loops: true,
            ..GenOptions::default()
        },
    ));
    cases
}

fn specializer_corpus(r: &CorpusRun) -> Check {
    ensure(
        r.unclean.is_empty(),
        format!("unclean output: {:?}", r.unclean),
    )?;
    ensure(
        r.decided >= 20,
        format!(
            "only {} of {} entries decided by the oracle",
            r.decided, r.entries
        ),
    )?;
    ensure(
        r.mismatches.is_empty(),
        format!("solver and oracle disagree on {:?}", r.mismatches),
    )?;
    Ok(format!(
        "{} entries, {} with exhaustive oracle verdicts, all agree",
        r.entries, r.decided
    ))
}

fn theorem_suite(r: &CorpusRun) -> Check {
    ensure(
        r.minimized_disagree.is_empty(),
        format!(
            "verdict changed by minimization: {:?}",
            r.minimized_disagree
        ),
    )?;
    Ok(format!(
        "{} entries, verdicts unchanged by minimization",
        r.entries
    ))
}

/// A random constraint over up to four variables whose eliminated
/// variables are each defined by a unit equality over the kept ones,
/// with the definitions kept for the brute-force check.
struct Sample {
    constraint: LinearConstraint,
    keep: Vec<Var>,
    defs: Vec<(Var, Vec<i64>, i64)>,
}

fn sample(rng: &mut ChaCha8Rng) -> Sample {
    let names = ["A", "B", "C", "D"];
    let k = rng.random_range(1..=4usize);
    let n_keep = rng.random_range(1..=k);
    let vars: Vec<Var> = names[..k].iter().map(|s| Var::from(*s)).collect();
    let keep = vars[..n_keep].to_vec();
    let coef = |rng: &mut ChaCha8Rng| rng.random_range(-3..=3i64);
    let mut conjuncts = Vec::new();
    let mut defs = Vec::new();
    for e in &vars[n_keep..] {
        let cs: Vec<i64> = keep.iter().map(|_| coef(rng)).collect();
        let c0 = coef(rng);
        let mut rhs = LinExpr::constant(c0);
        for (v, c) in keep.iter().zip(&cs) {
            rhs.add_term(v.clone(), *c);
        }
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        conjuncts.push(Conjunct::new(
            LinExpr::var(e.clone()).scaled(sign),
            Rel::Eq,
            rhs.scaled(sign),
        ));
        defs.push((e.clone(), cs, c0));
    }
    for _ in 0..rng.random_range(0..=3) {
        let mut lhs = LinExpr::constant(coef(rng));
        for v in &vars {
            lhs.add_term(v.clone(), coef(rng));
        }
        let rel = [Rel::Ge, Rel::Le, Rel::Gt, Rel::Lt, Rel::Eq][rng.random_range(0..5)];
        conjuncts.push(Conjunct::new(lhs, rel, LinExpr::zero()));
    }
    Sample {
        constraint: LinearConstraint::from_conjuncts(conjuncts),
        keep,
        defs,
    }
}

fn box_points(k: usize) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..k {
        pts = pts
            .into_iter()
            .flat_map(|p| (-5..=5).map(move |x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    pts
}

fn constraint_algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..500 {
        let s = sample(&mut rng);
        let n = s.constraint.normalize();
        ensure(
            n.normalize() == n,
            format!("sample {i}: normalize not idempotent on {}", s.constraint),
        )?;
        let keep: BTreeSet<Var> = s.keep.iter().cloned().collect();
        let proj = s.constraint.project(&keep);
        ensure(
            proj.exact,
            format!("sample {i}: projection of {} flagged inexact", s.constraint),
        )?;
        for p in box_points(s.keep.len()) {
            let mut val: BTreeMap<Var, i64> =
                s.keep.iter().cloned().zip(p.iter().copied()).collect();
            // the only candidate for each eliminated variable is its definition
            for (e, cs, c0) in &s.defs {
                let x = c0 + cs.iter().zip(&p).map(|(c, v)| c * v).sum::<i64>();
                val.insert(e.clone(), x);
            }
            let member = s.constraint.holds(|v| val[v]);
            let projected = proj.constraint.holds(|v| val[v]);
            ensure(
                member == projected,
                format!(
                    "sample {i}: {} projected to {} differs at {p:?}",
                    s.constraint, proj.constraint
                ),
            )?;
            let normalized = n.holds(|v| val[v]);
            ensure(
                member == normalized,
                format!("sample {i}: normalize changed solutions at {p:?}"),
            )?;
        }
    }
    Ok(
        "500 constraints: normalize idempotent, exact projection matches enumeration on [-5,5]^k"
            .into(),
    )
}

fn timings(r: &CorpusRun, ok: bool) -> Check {
    let n = r.entries.max(1) as u32;
    let msg = format!(
        "timings are reported, not compared; mean specialization {:.2?}, mean solve {:.2?} per entry",
        r.specialize_time / n,
        r.solve_time / n
    );
    if ok {
        Ok(msg)
    } else {
        Err(format!("substitute checks 3 to 6 did not all pass; {msg}"))
    }
}

fn main() {
    let mut results: Vec<(u8, Check)> = vec![
        (1, parse_and_check()),
        (2, oracle_deadlines()),
        (3, end_to_end()),
        (4, minimizer_fixture()),
    ];
    let corpus = run_corpus(&corpus_cases());
    match &corpus {
        Ok(r) => {
            results.push((5, specializer_corpus(r)));
            results.push((6, theorem_suite(r)));
        }
        Err(e) => {
            results.push((5, Err(e.clone())));
            results.push((6, Err(e.clone())));
        }
    }
    results.push((7, constraint_algebra()));
    let substitutes_ok = results
        .iter()
        .filter(|(n, _)| (3..=6).contains(n))
        .all(|(_, r)| r.is_ok());
    results.push((
        8,
        match &corpus {
            Ok(r) => timings(r, substitutes_ok),
            Err(e) => Err(e.clone()),
        },
    ));

    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n}: PASS ({msg})"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({msg})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
