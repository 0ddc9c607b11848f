//! Python bindings. Models, properties and clause sets travel as text.

use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use tempohorn::backend::{emit_smtlib, run_solver, Outcome, SolverConfig};
use tempohorn::chc::{parse_clauses, ClauseSet};
use tempohorn::model::{parse_bps, BusinessProcessSpec};
use tempohorn::property::{parse_property, PropertySpec};
use tempohorn::semantics::{explore as run_explore, Bounds, OracleVerdict};
use tempohorn::wellformed::check_well_formed;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model(text: &str) -> PyResult<BusinessProcessSpec> {
    parse_bps(text).map_err(err)
}

fn property(text: &str, spec: &BusinessProcessSpec) -> PyResult<PropertySpec> {
    parse_property(text, spec).map_err(err)
}

fn clauses(text: &str) -> PyResult<ClauseSet> {
    parse_clauses(text).map_err(err)
}

/// Number of flow objects and flows.
#[pyfunction]
fn parse_model(text: &str) -> PyResult<(usize, usize)> {
    let s = model(text)?;
    Ok((s.len(), s.flow_count()))
}

/// Well-formedness violations, one line each. Empty when well formed.
#[pyfunction]
fn check_wf(text: &str) -> PyResult<Vec<String>> {
    Ok(check_well_formed(&model(text)?)
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Specialized clauses for a model and a property.
#[pyfunction]
fn compile(model_text: &str, property_text: &str) -> PyResult<String> {
    let s = model(model_text)?;
    let p = property(property_text, &s)?;
    let out = tempohorn::specializer::specialize(&s, &p).map_err(err)?;
    Ok(out.clauses.to_string())
}

/// Minimized clauses and the classes of merged predicates.
#[pyfunction]
fn minimize(text: &str) -> PyResult<(String, Vec<Vec<String>>)> {
    let m = tempohorn::minimizer::minimize(&clauses(text)?).map_err(err)?;
    let classes = m
        .partition
        .classes()
        .iter()
        .filter(|c| c.len() > 1)
        .cloned()
        .collect();
    Ok((m.clauses.to_string(), classes))
}

#[pyfunction]
fn emit(text: &str) -> PyResult<String> {
    Ok(emit_smtlib(&clauses(text)?))
}

/// "sat", "unsat", "unknown" or "timeout".
#[pyfunction]
#[pyo3(signature = (text, solver=None, timeout=60.0))]
fn solve(text: &str, solver: Option<&str>, timeout: f64) -> PyResult<&'static str> {
    let t = Duration::from_secs_f64(timeout);
    let cfg = match solver {
        Some(cmd) => {
            SolverConfig::from_command(cmd, t).ok_or_else(|| err("empty solver command"))?
        }
        None => SolverConfig::from_env(t),
    };
    let v = run_solver(&cfg, &emit_smtlib(&clauses(text)?));
    match v.outcome {
        Outcome::Satisfiable => Ok("sat"),
        Outcome::Unsatisfiable => Ok("unsat"),
        Outcome::Unknown => Ok("unknown"),
        Outcome::Timeout => Ok("timeout"),
        Outcome::SolverError => Err(err(format!(
            "solver `{}` failed: {}",
            v.solver,
            v.raw.trim()
        ))),
    }
}

/// Explicit-state check: `(holds, waypoint_times)`. `holds` is None when
/// the bounds cut the search short; the times are set on a violation.
#[pyfunction]
#[pyo3(signature = (model_text, property_text, max_states=1_000_000))]
fn explore(
    model_text: &str,
    property_text: &str,
    max_states: usize,
) -> PyResult<(Option<bool>, Option<Vec<i64>>)> {
    let s = model(model_text)?;
    let p = property(property_text, &s)?;
    let bounds = Bounds {
        max_states,
        ..Bounds::default()
    };
    let v = run_explore(&s, &p, bounds);
    let times = match &v {
        OracleVerdict::Violated { times, .. } => Some(times.clone()),
        _ => None,
    };
    Ok((v.holds(), times))
}

#[pymodule]
fn tempohorn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_model, m)?)?;
    m.add_function(wrap_pyfunction!(check_wf, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    Ok(())
}
