use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempohorn::chc::parse_clauses;
use tempohorn::model::parse_bps;
use tempohorn::property::parse_property;
use tempohorn::semantics::{explore, Bounds};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempohorn"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn po() -> String {
    fixture("purchase_order.bps").to_string_lossy().into_owned()
}

fn prop(k: u8) -> String {
    fixture(&format!("po_deadline{k}.prop"))
        .to_string_lossy()
        .into_owned()
}

fn temp_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_wf_clean_and_broken() {
    let o = run(&["check-wf", &po()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("15 flow objects, 17 flows"));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(po()).unwrap() + "\nseq(g1,g2).\n";
    let bad = temp_file(&dir, "bad.bps", &text);
    let o = run(&["check-wf", "--json", &bad]);
    assert_eq!(code(&o), 4);
    let out = stdout(&o);
    assert!(out.contains("\"condition\": 7"), "{out}");
}

#[test]
fn malformed_model() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_file(&dir, "bad.bps", "start(s).\nseq(s,\n");
    for cmd in ["check-wf", "simulate"] {
        let o = run(&[cmd, &bad]);
        assert_eq!(code(&o), 3);
        assert!(String::from_utf8_lossy(&o.stderr).contains("bad.bps"));
    }
    let o = run(&["verify", &bad, &prop(9)]);
    assert_eq!(code(&o), 3);
    let o = run(&["check-wf", "/no/such/file.bps"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn simulate_runs() {
    let o = run(&[
        "simulate",
        &po(),
        "--durations",
        "min",
        "--choose",
        "g2=p",
        "--choose",
        "g4=sd",
    ]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).ends_with("t=7 S6 {completes(end)}\n"),
        "{}",
        stdout(&o)
    );

    let dir = tempfile::tempdir().unwrap();
    let tiny = temp_file(&dir, "tiny.bps", "start(s). end(e). seq(s,e).");
    let o = run(&["simulate", &tiny]);
    assert!(
        stdout(&o).ends_with("t=0 S6 {completes(e)}\n"),
        "{}",
        stdout(&o)
    );

    let o = run(&["simulate", &po(), "--choose", "g4=a"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn simulated_end_time_is_reachable() {
    // replay: the oracle finds a run ending at the simulated time
    let spec = parse_bps(&std::fs::read_to_string(po()).unwrap()).unwrap();
    for seed in 0..3 {
        let seed = seed.to_string();
        let o = run(&[
            "simulate",
            &po(),
            "--durations",
            "max",
            "--choose",
            "g2=p",
            "--choose",
            "g4=ed",
            "--seed",
            &seed,
        ]);
        let last = stdout(&o).lines().last().unwrap().to_string();
        let t: i64 = last
            .strip_prefix("t=")
            .unwrap()
            .split(' ')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        // a=6, p=2, then max(i+s, o+ed) = max(5, 8)
        assert_eq!(t, 16);
        let p = parse_property(
            &format!("false :- T1={t}, reach(s([begins(start)],T0), s([completes(end)],T1))."),
            &spec,
        )
        .unwrap();
        assert!(explore(&spec, &p, Bounds::default()).is_violated());
    }
}

#[test]
fn simulate_with_property_prints_counterexample() {
    let o = run(&["simulate", &po(), "--property", &prop(8)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("waypoint times 0, "));
    let o = run(&["simulate", &po(), "--property", &prop(9)]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "simulate",
        &po(),
        "--property",
        &prop(9),
        "--oracle-bounds",
        "20,1000",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pipeline_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.chc").to_string_lossy().into_owned();
    let min = dir.path().join("min.chc").to_string_lossy().into_owned();
    let smt = dir.path().join("min.smt2").to_string_lossy().into_owned();
    assert_eq!(code(&run(&["compile", &po(), &prop(9), "--out", &raw])), 0);
    let raw_set = parse_clauses(&std::fs::read_to_string(&raw).unwrap()).unwrap();
    let o = run(&["minimize", &raw, "--out", &min, "--partition"]);
    assert_eq!(code(&o), 0);
    let min_set = parse_clauses(&std::fs::read_to_string(&min).unwrap()).unwrap();
    assert!(min_set.len() < raw_set.len());
    assert_eq!(code(&run(&["emit", &min, "--out", &smt])), 0);
    assert!(std::fs::read_to_string(&smt)
        .unwrap()
        .contains("(set-logic HORN)"));
    let o = run(&["solve", &min]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "sat"));
    let o = run(&["solve", &fixture("removal_output.chc").to_string_lossy()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn minimization_does_not_change_the_answer() {
    for (k, expected) in [(9, 0), (8, 1)] {
        let a = run(&["verify", &po(), &prop(k), "--minimize"]);
        let b = run(&["verify", &po(), &prop(k), "--no-minimize"]);
        assert_eq!(code(&a), expected, "{}", stdout(&a));
        assert_eq!(code(&b), expected, "{}", stdout(&b));
        assert!(stdout(&a).contains("oracle: agrees"));
    }
}

#[test]
fn solver_outcomes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let clauses = fixture("removal_output.chc").to_string_lossy().into_owned();
    let fake = |name: &str, body: &str| {
        let p = temp_file(&dir, name, &format!("#!/bin/sh\n{body}\n"));
        let mut perm = std::fs::metadata(&p).unwrap().permissions();
        std::os::unix::fs::PermissionsExt::set_mode(&mut perm, 0o755);
        std::fs::set_permissions(&p, perm).unwrap();
        p
    };
    let cases = [
        (fake("sat.sh", "echo sat"), 0),
        (fake("unsat.sh", "echo unsat"), 1),
        (fake("unknown.sh", "echo unknown"), 2),
        (fake("slow.sh", "exec sleep 10"), 2),
        (fake("junk.sh", "echo oops; exit 5"), 3),
        ("/no/such/solver".to_string(), 3),
    ];
    for (solver, expected) in cases {
        let o = run(&["solve", &clauses, "--solver", &solver, "--timeout", "1"]);
        assert_eq!(code(&o), expected, "{solver}");
    }
    // disagreeing solver: advisory by default, fatal with --strict-oracle
    let liar = fake("liar.sh", "echo sat");
    let o = run(&["verify", &po(), &prop(8), "--solver", &liar]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("DISAGREES"));
    let o = run(&[
        "verify",
        &po(),
        &prop(8),
        "--solver",
        &liar,
        "--strict-oracle",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn ill_formed_model_in_verify() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(po()).unwrap() + "\nseq(g1,g2).\n";
    let bad = temp_file(&dir, "bad.bps", &text);
    let o = run(&["verify", &bad, &prop(9)]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("condition 7"));
}
