//! SMT-LIB output and external solver runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::chc::{ClauseSet, Conjunct, Head, HornClause, LinExpr, Rel, Var};

/// Environment variable naming the default solver command line.
pub const SOLVER_ENV: &str = "TEMPOHORN_SOLVER";

const RESERVED: &[&str] = &[
    "and", "or", "not", "forall", "exists", "let", "true", "false", "assert", "ite", "distinct",
    "Int", "Bool",
];

fn is_simple_symbol(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

/// Solver-safe names: simple symbols are kept, anything else gets a
/// numbered replacement.
fn sanitize<'a>(names: impl Iterator<Item = &'a str>, prefix: &str) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    let mut taken: Vec<String> = Vec::new();
    for (i, n) in names.enumerate() {
        let mut s = if is_simple_symbol(n) {
            n.to_string()
        } else {
            format!("{prefix}{i}")
        };
        while taken.contains(&s) {
            s.push('_');
        }
        taken.push(s.clone());
        map.insert(n.to_string(), s);
    }
    map
}

fn int(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

fn expr(e: &LinExpr, vars: &BTreeMap<String, String>) -> String {
    let mut parts: Vec<String> = e
        .terms()
        .map(|(v, c)| {
            let name = &vars[v.name()];
            if c == 1 {
                name.clone()
            } else {
                format!("(* {} {name})", int(c))
            }
        })
        .collect();
    if e.const_term() != 0 || parts.is_empty() {
        parts.push(int(e.const_term()));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn conjunct(c: &Conjunct, vars: &BTreeMap<String, String>) -> String {
    let e = expr(&c.expr, vars);
    match c.rel {
        Rel::Eq => format!("(= {e} 0)"),
        Rel::Ne => format!("(not (= {e} 0))"),
        Rel::Ge => format!("(>= {e} 0)"),
        Rel::Le => format!("(<= {e} 0)"),
        Rel::Gt => format!("(> {e} 0)"),
        Rel::Lt => format!("(< {e} 0)"),
    }
}

fn clause(c: &HornClause, preds: &BTreeMap<String, String>) -> String {
    let vs: Vec<Var> = c.vars().into_iter().collect();
    let vars = sanitize(vs.iter().map(Var::name), "v");
    let mut body: Vec<String> = c
        .constraint
        .conjuncts()
        .iter()
        .map(|k| conjunct(k, &vars))
        .collect();
    let app = |pred: &str, args: Vec<String>| {
        if args.is_empty() {
            preds[pred].clone()
        } else {
            format!("({} {})", preds[pred], args.join(" "))
        }
    };
    for a in &c.body {
        body.push(app(
            &a.pred,
            a.args.iter().map(|t| expr(&t.to_expr(), &vars)).collect(),
        ));
    }
    let head = match &c.head {
        Head::False => "false".to_string(),
        Head::Pred(a) => app(
            &a.pred,
            a.args.iter().map(|t| expr(&t.to_expr(), &vars)).collect(),
        ),
    };
    let body = match body.len() {
        0 => "true".to_string(),
        1 => body.pop().unwrap(),
        _ => format!("(and {})", body.join(" ")),
    };
    let imp = format!("(=> {body} {head})");
    if vs.is_empty() {
        format!("(assert {imp})")
    } else {
        let decl: Vec<String> = vs
            .iter()
            .map(|v| format!("({} Int)", vars[v.name()]))
            .collect();
        format!("(assert (forall ({}) {imp}))", decl.join(" "))
    }
}

/// A HORN script: predicate declarations, one assertion per clause, goals
/// as implications to `false`, then `(check-sat)`.
pub fn emit_smtlib(set: &ClauseSet) -> String {
    let preds = sanitize(set.predicates().map(|(p, _)| p), "p");
    let mut out = String::new();
    for (p, s) in &preds {
        let _ = writeln!(out, "; {p} = {s}");
    }
    out.push_str("(set-logic HORN)\n");
    for (p, k) in set.predicates() {
        let _ = writeln!(
            out,
            "(declare-fun {} ({}) Bool)",
            preds[p],
            vec!["Int"; k].join(" ")
        );
    }
    for c in set.clauses() {
        out.push_str(&clause(c, &preds));
        out.push('\n');
    }
    out.push_str("(check-sat)\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Satisfiable,
    Unsatisfiable,
    Unknown,
    Timeout,
    SolverError,
}

impl Outcome {
    pub fn is_definitive(self) -> bool {
        matches!(self, Outcome::Satisfiable | Outcome::Unsatisfiable)
    }
}

#[derive(Debug, Clone)]
pub struct SolverVerdict {
    pub outcome: Outcome,
    pub raw: String,
    pub elapsed: Duration,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    /// A whitespace-separated command line; the script path is appended.
    pub fn from_command(cmd: &str, timeout: Duration) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(String::from);
        Some(SolverConfig {
            program: parts.next()?,
            args: parts.collect(),
            timeout,
        })
    }

    /// `$TEMPOHORN_SOLVER`, or `z3`.
    pub fn from_env(timeout: Duration) -> Self {
        std::env::var(SOLVER_ENV)
            .ok()
            .and_then(|c| SolverConfig::from_command(&c, timeout))
            .unwrap_or_else(|| SolverConfig::from_command("z3", timeout).unwrap())
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn first_token(out: &str) -> Option<Outcome> {
    match out.lines().map(str::trim).find(|l| !l.is_empty())? {
        "sat" => Some(Outcome::Satisfiable),
        "unsat" => Some(Outcome::Unsatisfiable),
        "unknown" => Some(Outcome::Unknown),
        _ => None,
    }
}

pub fn run_solver(config: &SolverConfig, script: &str) -> SolverVerdict {
    run_cancellable(config, script, &AtomicBool::new(false))
}

fn run_cancellable(config: &SolverConfig, script: &str, cancel: &AtomicBool) -> SolverVerdict {
    let start = Instant::now();
    let verdict = |outcome, raw: String| SolverVerdict {
        outcome,
        raw,
        elapsed: start.elapsed(),
        solver: config.command_line(),
    };
    let file = tempfile::Builder::new()
        .suffix(".smt2")
        .tempfile()
        .and_then(|mut f| {
            f.write_all(script.as_bytes())?;
            f.flush()?;
            Ok(f)
        });
    let file = match file {
        Ok(f) => f,
        Err(e) => return verdict(Outcome::SolverError, format!("cannot write script: {e}")),
    };
    let child = Command::new(&config.program)
        .args(&config.args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => {
            return verdict(
                Outcome::SolverError,
                format!("cannot run `{}`: {e}", config.program),
            )
        }
    };
    let drain = |mut r: Box<dyn Read + Send>| {
        thread::spawn(move || {
            let mut s = String::new();
            let _ = r.read_to_string(&mut s);
            s
        })
    };
    let out = drain(Box::new(child.stdout.take().unwrap()));
    let err = drain(Box::new(child.stderr.take().unwrap()));

    let status = loop {
        match child.wait_timeout(Duration::from_millis(20)) {
            Ok(Some(st)) => break Some(st),
            Ok(None) if cancel.load(Ordering::Relaxed) || start.elapsed() >= config.timeout => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => {}
            Err(e) => return verdict(Outcome::SolverError, e.to_string()),
        }
    };
    let Some(status) = status else {
        // grandchildren may keep the pipes open; do not wait for them
        return verdict(Outcome::Timeout, String::new());
    };
    let raw = out.join().unwrap_or_default() + &err.join().unwrap_or_default();
    match first_token(&raw) {
        Some(o) => verdict(o, raw),
        None => verdict(Outcome::SolverError, format!("{raw}(exit status {status})")),
    }
}

/// Runs every solver at once and returns the first definitive verdict,
/// stopping the others. Without one, the first verdict in config order.
pub fn run_portfolio(configs: &[SolverConfig], script: &str) -> Option<SolverVerdict> {
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let handles: Vec<_> = configs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, cfg)| {
            let (tx, cancel, script) = (tx.clone(), cancel.clone(), script.to_string());
            thread::spawn(move || {
                let v = run_cancellable(&cfg, &script, &cancel);
                let _ = tx.send((i, v));
            })
        })
        .collect();
    drop(tx);
    let mut rest = Vec::new();
    let mut winner = None;
    for (i, v) in rx {
        if winner.is_none() && v.outcome.is_definitive() {
            cancel.store(true, Ordering::Relaxed);
            winner = Some(v);
        } else {
            rest.push((i, v));
        }
    }
    for h in handles {
        let _ = h.join();
    }
    winner.or_else(|| {
        rest.sort_by_key(|(i, _)| *i);
        rest.into_iter().next().map(|(_, v)| v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clauses;

    #[test]
    fn script_shape() {
        let s = parse_clauses("p(X) :- X=0.\nfalse :- X>0, p(X).\n").unwrap();
        let t = emit_smtlib(&s);
        assert!(t.contains("(set-logic HORN)"));
        assert!(t.contains("(declare-fun p (Int) Bool)"));
        assert!(t.contains("(assert (forall ((X Int)) (=> (= X 0) (p X))))"));
        assert!(t.contains("(=> (and (> X 0) (p X)) false)"), "{t}");
        assert!(t.ends_with("(check-sat)\n"));
        assert_eq!(t, emit_smtlib(&s));
    }

    #[test]
    fn odd_names_are_replaced() {
        let s = parse_clauses("p(X) :- X=0.\nand(X) :- p(X).\n").unwrap();
        let t = emit_smtlib(&s);
        assert!(t.contains("; and = p0"), "{t}");
        assert!(t.contains("(declare-fun p0 (Int) Bool)"));
    }

    #[test]
    fn ground_and_fact_clauses() {
        let s = parse_clauses("q.\nfalse :- q.\n").unwrap();
        let t = emit_smtlib(&s);
        assert!(t.contains("(declare-fun q () Bool)"));
        assert!(t.contains("(assert (=> true q))"));
        assert!(t.contains("(assert (=> q false))"));
    }

    #[test]
    fn result_token() {
        assert_eq!(first_token("\nsat\n"), Some(Outcome::Satisfiable));
        assert_eq!(first_token("unsat"), Some(Outcome::Unsatisfiable));
        assert_eq!(first_token("(error \"x\")\nsat"), None);
    }

    #[test]
    fn missing_solver() {
        let cfg =
            SolverConfig::from_command("/nonexistent/solver", Duration::from_secs(5)).unwrap();
        assert_eq!(
            run_solver(&cfg, "(check-sat)\n").outcome,
            Outcome::SolverError
        );
    }
}
