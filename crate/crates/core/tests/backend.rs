use std::time::Duration;

use tempohorn::backend::{emit_smtlib, run_portfolio, run_solver, Outcome, SolverConfig};
use tempohorn::chc::parse_clauses;
use tempohorn::fixtures;
use tempohorn::model::parse_bps;
use tempohorn::property::parse_property;
use tempohorn::specializer::specialize;

fn solver() -> SolverConfig {
    SolverConfig::from_env(Duration::from_secs(60))
}

fn outcome(text: &str) -> Outcome {
    let v = run_solver(&solver(), &emit_smtlib(&parse_clauses(text).unwrap()));
    v.outcome
}

#[test]
fn trivial_scripts() {
    assert_eq!(
        outcome("p(X) :- X=0.\nfalse :- X>0, p(X).\n"),
        Outcome::Satisfiable
    );
    assert_eq!(
        outcome("p(X) :- X=1.\nfalse :- p(X).\n"),
        Outcome::Unsatisfiable
    );
    // disequalities are passed through
    assert_eq!(
        outcome("p(X) :- X=1.\nfalse :- X=\\=1, p(X).\n"),
        Outcome::Satisfiable
    );
}

#[test]
fn minimized_listing_is_sat() {
    let v = run_solver(
        &solver(),
        &emit_smtlib(&parse_clauses(fixtures::EQUIVALENCE_OUTPUT).unwrap()),
    );
    assert_eq!(v.outcome, Outcome::Satisfiable, "{}", v.raw);
}

#[test]
fn tighter_deadline_is_unsat() {
    let s = parse_bps(fixtures::PURCHASE_ORDER).unwrap();
    let p = parse_property(fixtures::PO_DEADLINE_8, &s).unwrap();
    let set = specialize(&s, &p).unwrap().clauses;
    let script = emit_smtlib(&set);
    assert_eq!(script, emit_smtlib(&set));
    assert_eq!(
        run_solver(&solver(), &script).outcome,
        Outcome::Unsatisfiable
    );
}

#[test]
fn missing_executable() {
    let cfg = SolverConfig::from_command("/no/such/solver", Duration::from_secs(5)).unwrap();
    let v = run_solver(&cfg, "(check-sat)\n");
    assert_eq!(v.outcome, Outcome::SolverError);
    assert!(v.raw.contains("/no/such/solver"));
}

#[test]
fn slow_solver_times_out() {
    let cfg = SolverConfig {
        program: "sh".into(),
        args: vec!["-c".into(), "sleep 10; echo sat".into(), "sh".into()],
        timeout: Duration::from_millis(300),
    };
    let v = run_solver(&cfg, "(check-sat)\n");
    assert_eq!(v.outcome, Outcome::Timeout);
    assert!(v.elapsed < Duration::from_secs(5));
}

#[test]
fn output_without_result_is_an_error() {
    let cfg = SolverConfig {
        program: "sh".into(),
        args: vec!["-c".into(), "echo garbage".into(), "sh".into()],
        timeout: Duration::from_secs(5),
    };
    assert_eq!(run_solver(&cfg, "").outcome, Outcome::SolverError);
}

#[test]
fn portfolio_takes_first_definitive_answer() {
    let slow = SolverConfig {
        program: "sh".into(),
        args: vec!["-c".into(), "sleep 10; echo unsat".into(), "sh".into()],
        timeout: Duration::from_secs(30),
    };
    let broken = SolverConfig::from_command("/no/such/solver", Duration::from_secs(5)).unwrap();
    let script = emit_smtlib(&parse_clauses("p(X) :- X=0.\nfalse :- X>0, p(X).\n").unwrap());
    let v = run_portfolio(&[broken, slow, solver()], &script).unwrap();
    assert_eq!(v.outcome, Outcome::Satisfiable);
    assert!(v.elapsed < Duration::from_secs(8));
}
