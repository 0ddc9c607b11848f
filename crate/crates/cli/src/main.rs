use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempohorn::backend::{emit_smtlib, run_portfolio, Outcome, SolverConfig, SolverVerdict};
use tempohorn::chc::{parse_clauses, ClauseSet};
use tempohorn::minimizer::minimize;
use tempohorn::model::{parse_bps, BusinessProcessSpec};
use tempohorn::property::{parse_property, PropertySpec};
use tempohorn::semantics::{
    explore, render_trace, simulate, Bounds, DurationChoice, OracleVerdict, SimConfig,
};
use tempohorn::specializer::{specialize, SpecializeError};
use tempohorn::wellformed::{check_well_formed, render_json, render_text};

const EXIT_HOLDS: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_ILL_FORMED: u8 = 4;

/// Checks timing properties of process models by compiling them to
/// clauses for an external solver.
#[derive(Parser)]
#[command(name = "tempohorn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the well-formedness conditions of a model.
    CheckWf {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print one run of a model, or with --property the oracle's verdict.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        property: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Durations::Random)]
        durations: Durations,
        /// Fix an exclusive choice, e.g. `--choose g4=sd`.
        #[arg(long, value_name = "GATEWAY=SUCCESSOR")]
        choose: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Compile a model and a property into interpreter-free clauses.
    Compile {
        model: PathBuf,
        property: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge equivalent predicates of a clause file.
    Minimize {
        clauses: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the partition to stderr.
        #[arg(long)]
        partition: bool,
    },
    /// Translate a clause file to SMT-LIB.
    Emit {
        clauses: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the solver on a clause file.
    Solve {
        clauses: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Full pipeline: check, compile, minimize, solve, cross-check.
    Verify {
        model: PathBuf,
        property: PathBuf,
        #[arg(long, overrides_with = "no_minimize")]
        minimize: bool,
        #[arg(long)]
        no_minimize: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Fail when the oracle disagrees with the solver.
        #[arg(long)]
        strict_oracle: bool,
        /// Write the clauses handed to the solver.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Durations {
    Min,
    Max,
    Random,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver command line; repeat for a portfolio. Defaults to
    /// $TEMPOHORN_SOLVER or `z3`.
    #[arg(long = "solver")]
    solvers: Vec<String>,
    /// Seconds per solver run.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

impl SolverArgs {
    fn configs(&self) -> Vec<SolverConfig> {
        let t = Duration::from_secs(self.timeout);
        if self.solvers.is_empty() {
            return vec![SolverConfig::from_env(t)];
        }
        self.solvers
            .iter()
            .filter_map(|c| SolverConfig::from_command(c, t))
            .collect()
    }
}

#[derive(Args)]
struct OracleArgs {
    /// Explicit-state search limits.
    #[arg(long, value_name = "STATES,SLACK", value_parser = parse_bounds, default_value = "1000000,1000")]
    oracle_bounds: Bounds,
}

fn parse_bounds(s: &str) -> Result<Bounds, String> {
    let (a, b) = s.split_once(',').ok_or("expected STATES,SLACK")?;
    Ok(Bounds {
        max_states: a.trim().parse().map_err(|e| format!("{e}"))?,
        slack: b.trim().parse().map_err(|e| format!("{e}"))?,
    })
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

type Res = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<BusinessProcessSpec, Failure> {
    parse_bps(&read(path)?).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_property(path: &Path, spec: &BusinessProcessSpec) -> Result<PropertySpec, Failure> {
    parse_property(&read(path)?, spec)
        .map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_clauses(path: &Path) -> Result<ClauseSet, Failure> {
    parse_clauses(&read(path)?).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit status of a solver outcome: sat means the property holds.
fn exit_for(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Satisfiable => EXIT_HOLDS,
        Outcome::Unsatisfiable => EXIT_VIOLATED,
        Outcome::Unknown | Outcome::Timeout => EXIT_UNKNOWN,
        Outcome::SolverError => EXIT_ERROR,
    }
}

fn solve(set: &ClauseSet, args: &SolverArgs) -> Result<SolverVerdict, Failure> {
    let configs = args.configs();
    if configs.is_empty() {
        return Err(fail(EXIT_ERROR, "empty solver command"));
    }
    let v = run_portfolio(&configs, &emit_smtlib(set)).expect("at least one solver");
    if v.outcome == Outcome::SolverError {
        return Err(fail(
            EXIT_ERROR,
            format!("solver `{}` failed: {}", v.solver, v.raw.trim()),
        ));
    }
    Ok(v)
}

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Satisfiable => "sat",
        Outcome::Unsatisfiable => "unsat",
        Outcome::Unknown => "unknown",
        Outcome::Timeout => "timeout",
        Outcome::SolverError => "error",
    }
}

fn compile(spec: &BusinessProcessSpec, prop: &PropertySpec) -> Result<ClauseSet, Failure> {
    match specialize(spec, prop) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            Ok(out.clauses)
        }
        Err(SpecializeError::NotWellFormed(v)) => {
            Err(fail(EXIT_ILL_FORMED, render_text(&v).trim_end()))
        }
        Err(e) => Err(fail(EXIT_ERROR, e)),
    }
}

fn run(cli: Cli) -> Res {
    match cli.command {
        Command::CheckWf { model, json } => {
            let spec = load_model(&model)?;
            let v = check_well_formed(&spec);
            if json {
                println!("{}", render_json(&v));
            } else if v.is_empty() {
                println!(
                    "well-formed: {} flow objects, {} flows",
                    spec.len(),
                    spec.flow_count()
                );
            } else {
                print!("{}", render_text(&v));
            }
            Ok(if v.is_empty() { 0 } else { EXIT_ILL_FORMED })
        }
        Command::Simulate {
            model,
            property,
            seed,
            durations,
            choose,
            max_steps,
            oracle,
        } => {
            let spec = load_model(&model)?;
            if let Some(p) = property {
                let prop = load_property(&p, &spec)?;
                return Ok(report_oracle(
                    &spec,
                    &explore(&spec, &prop, oracle.oracle_bounds),
                ));
            }
            let mut cfg = SimConfig {
                seed,
                durations: match durations {
                    Durations::Min => DurationChoice::Min,
                    Durations::Max => DurationChoice::Max,
                    Durations::Random => DurationChoice::Random,
                },
                max_steps,
                ..SimConfig::default()
            };
            for c in &choose {
                let (g, s) = c.split_once('=').ok_or_else(|| {
                    fail(EXIT_ERROR, format!("`{c}`: expected GATEWAY=SUCCESSOR"))
                })?;
                let g = spec.lookup(g).map_err(|e| fail(EXIT_ERROR, e))?;
                let s = spec.lookup(s).map_err(|e| fail(EXIT_ERROR, e))?;
                if !spec.has_flow(g, s) {
                    return Err(fail(EXIT_ERROR, format!("`{c}`: not a sequence flow")));
                }
                cfg.prefer.insert(g, s);
            }
            print!("{}", render_trace(&spec, &simulate(&spec, &cfg)));
            Ok(0)
        }
        Command::Compile {
            model,
            property,
            out,
        } => {
            let spec = load_model(&model)?;
            let prop = load_property(&property, &spec)?;
            let set = compile(&spec, &prop)?;
            write_out(out.as_deref(), &set.to_string())?;
            Ok(0)
        }
        Command::Minimize {
            clauses,
            out,
            partition,
        } => {
            let set = load_clauses(&clauses)?.normalized();
            let m = minimize(&set).map_err(|e| fail(EXIT_ERROR, e))?;
            if partition {
                eprint!("{}", m.partition);
            }
            eprintln!("{} clauses -> {} clauses", set.len(), m.clauses.len());
            write_out(out.as_deref(), &m.clauses.to_string())?;
            Ok(0)
        }
        Command::Emit { clauses, out } => {
            let set = load_clauses(&clauses)?;
            write_out(out.as_deref(), &emit_smtlib(&set))?;
            Ok(0)
        }
        Command::Solve { clauses, solver } => {
            let set = load_clauses(&clauses)?;
            let v = solve(&set, &solver)?;
            println!("{}", outcome_word(v.outcome));
            Ok(exit_for(v.outcome))
        }
        Command::Verify {
            model,
            property,
            minimize: _,
            no_minimize,
            solver,
            oracle,
            strict_oracle,
            out,
        } => {
            let spec = load_model(&model)?;
            let prop = load_property(&property, &spec)?;
            let v = check_well_formed(&spec);
            if !v.is_empty() {
                print!("{}", render_text(&v));
                return Ok(EXIT_ILL_FORMED);
            }
            let t0 = Instant::now();
            let set = compile(&spec, &prop)?;
            println!("specialized: {} clauses in {:.2?}", set.len(), t0.elapsed());
            let set = if no_minimize {
                set
            } else {
                let m = minimize(&set).map_err(|e| fail(EXIT_ERROR, e))?;
                println!(
                    "minimized: {} clauses ({} merged classes)",
                    m.clauses.len(),
                    m.partition.merged().count()
                );
                m.clauses
            };
            if let Some(p) = &out {
                write_out(Some(p), &set.to_string())?;
            }
            let v = solve(&set, &solver)?;
            println!(
                "solver: {} ({}, {:.2?})",
                outcome_word(v.outcome),
                v.solver,
                v.elapsed
            );
            let code = exit_for(v.outcome);
            match code {
                EXIT_HOLDS => println!("property holds"),
                EXIT_VIOLATED => println!("property violated"),
                _ => println!("property undecided"),
            }
            let verdict = explore(&spec, &prop, oracle.oracle_bounds);
            let oracle_code = report_oracle(&spec, &verdict);
            let agrees = verdict
                .holds()
                .is_none_or(|h| (h && code == EXIT_HOLDS) || (!h && code == EXIT_VIOLATED));
            if verdict.holds().is_some() {
                println!("oracle: {}", if agrees { "agrees" } else { "DISAGREES" });
            } else {
                println!("oracle: inconclusive within bounds");
            }
            if !agrees && strict_oracle {
                return Err(fail(
                    EXIT_ERROR,
                    format!("oracle and solver disagree (oracle exit {oracle_code})"),
                ));
            }
            Ok(code)
        }
    }
}

/// Prints the oracle's verdict and returns the matching exit status.
fn report_oracle(spec: &BusinessProcessSpec, v: &OracleVerdict) -> u8 {
    match v {
        OracleVerdict::Violated { trace, times } => {
            let ts: Vec<String> = times.iter().map(|t| t.to_string()).collect();
            println!("counterexample (waypoint times {}):", ts.join(", "));
            print!("{}", render_trace(spec, trace));
            EXIT_VIOLATED
        }
        OracleVerdict::NoViolationWithinBounds {
            exhaustive: true,
            states,
        } => {
            println!("no violating run ({states} states, exhaustive)");
            EXIT_HOLDS
        }
        OracleVerdict::NoViolationWithinBounds { states, .. } => {
            println!("no violating run found ({states} states, bounds reached)");
            EXIT_UNKNOWN
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
