//! Reachability properties: a chain of waypoint states and a violation
//! constraint over the times at which they are reached.
//!
//! ```text
//! false :- Ts=0, Tp>Ts, Te>Tp+9,
//!    reach(s([begins(start)],Ts), s([completes(p)],Tp)),
//!    reach(s([completes(p)],Tp),  s([completes(end)],Te)).
//! ```

use std::collections::BTreeSet;

use thiserror::Error;

use crate::chc::text::conjunct;
use crate::chc::{Conjunct, LinExpr, LinearConstraint, Rel, Var};
use crate::model::BusinessProcessSpec;
use crate::semantics::{show_fluents, Fluent};
use crate::syntax::{Cursor, Pos, SyntaxError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{0}: unknown flow object `{1}`")]
    UnknownObject(Pos, String),
    #[error("{0}: ({1},{2}) is not a sequence flow")]
    NotAFlow(Pos, String, String),
    #[error("{0}: {1}")]
    Chain(Pos, String),
    #[error("variable `{0}` in the constraint is not a waypoint time")]
    UnknownVariable(String),
    #[error("property has no reach atom")]
    NoWaypoint,
    #[error("model has no unique start event")]
    NoStart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Waypoint {
    fluents: BTreeSet<Fluent>,
    var: Var,
}

impl Waypoint {
    pub fn new(fluents: BTreeSet<Fluent>, var: Var) -> Self {
        Waypoint { fluents, var }
    }

    pub fn fluents(&self) -> &BTreeSet<Fluent> {
        &self.fluents
    }

    pub fn var(&self) -> &Var {
        &self.var
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySpec {
    /// Initial time variable followed by one per waypoint.
    time_vars: Vec<Var>,
    waypoints: Vec<Waypoint>,
    violation: LinearConstraint,
}

impl PropertySpec {
    pub fn new(
        origin: Var,
        waypoints: Vec<Waypoint>,
        violation: LinearConstraint,
    ) -> Result<Self, PropertyError> {
        if waypoints.is_empty() {
            return Err(PropertyError::NoWaypoint);
        }
        let mut time_vars = vec![origin];
        for w in &waypoints {
            if time_vars.contains(&w.var) {
                return Err(PropertyError::Chain(
                    Pos::default(),
                    format!("time variable `{}` used for two states", w.var),
                ));
            }
            time_vars.push(w.var.clone());
        }
        if let Some(v) = violation
            .vars()
            .into_iter()
            .find(|v| !time_vars.contains(v))
        {
            return Err(PropertyError::UnknownVariable(v.to_string()));
        }
        Ok(PropertySpec {
            time_vars,
            waypoints,
            violation,
        })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn time_vars(&self) -> &[Var] {
        &self.time_vars
    }

    pub fn violation(&self) -> &LinearConstraint {
        &self.violation
    }

    /// The violation constraint conjoined with `T0 = 0`.
    pub fn violation_with_origin(&self) -> LinearConstraint {
        let mut c = self.violation.clone();
        c.push(Conjunct::new(
            LinExpr::var(self.time_vars[0].clone()),
            Rel::Eq,
            LinExpr::zero(),
        ));
        c
    }

    /// Goal-clause text accepted by [`parse_property`].
    pub fn render(&self, spec: &BusinessProcessSpec) -> String {
        let mut parts: Vec<String> = self
            .violation_with_origin()
            .normalize()
            .conjuncts()
            .iter()
            .map(|c| c.to_string())
            .collect();
        let start = spec
            .start()
            .map(|s| vec![Fluent::Begins(s)])
            .unwrap_or_default();
        let mut from = (show_fluents(spec, &start), self.time_vars[0].clone());
        for w in &self.waypoints {
            let to = (show_fluents(spec, &w.fluents), w.var.clone());
            parts.push(format!(
                "reach(s({},{}), s({},{}))",
                brackets(&from.0),
                from.1,
                brackets(&to.0),
                to.1
            ));
            from = to;
        }
        format!("false :- {}.\n", parts.join(",\n   "))
    }
}

fn brackets(set: &str) -> String {
    format!("[{}]", &set[1..set.len() - 1])
}

pub fn parse_property(
    text: &str,
    spec: &BusinessProcessSpec,
) -> Result<PropertySpec, PropertyError> {
    let mut cur = Cursor::new(text)?;
    let (head, hpos) = cur.symbol()?;
    if head != "false" {
        return Err(SyntaxError::new(hpos, "a property is a clause with head `false`").into());
    }
    cur.expect(&Tok::Neck)?;
    let mut constraint = LinearConstraint::truth();
    let mut reaches = Vec::new();
    loop {
        match cur.peek() {
            Some(Tok::Symbol(s)) if s == "reach" => {
                let pos = cur.pos();
                cur.next();
                cur.expect(&Tok::LParen)?;
                let from = state(&mut cur, spec)?;
                cur.expect(&Tok::Comma)?;
                let to = state(&mut cur, spec)?;
                cur.expect(&Tok::RParen)?;
                reaches.push((pos, from, to));
            }
            _ => constraint.push(conjunct(&mut cur)?),
        }
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    cur.expect(&Tok::Dot)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after property").into());
    }
    let start = spec.start().ok_or(PropertyError::NoStart)?;
    let mut iter = reaches.into_iter();
    let (pos, (f0, t0), first_to) = iter.next().ok_or(PropertyError::NoWaypoint)?;
    if f0 != BTreeSet::from([Fluent::Begins(start)]) {
        return Err(PropertyError::Chain(
            pos,
            format!("the first state must be [begins({})]", spec.name(start)),
        ));
    }
    let mut waypoints = vec![Waypoint::new(first_to.0.clone(), first_to.1.clone())];
    let mut prev = first_to;
    for (pos, from, to) in iter {
        if from != prev {
            return Err(PropertyError::Chain(
                pos,
                "each reach must start from the state the previous one reached".into(),
            ));
        }
        waypoints.push(Waypoint::new(to.0.clone(), to.1.clone()));
        prev = to;
    }
    PropertySpec::new(t0, waypoints, constraint)
}

fn state(
    cur: &mut Cursor,
    spec: &BusinessProcessSpec,
) -> Result<(BTreeSet<Fluent>, Var), PropertyError> {
    let (s, pos) = cur.symbol()?;
    if s != "s" {
        return Err(SyntaxError::new(pos, "expected `s([...],T)`").into());
    }
    cur.expect(&Tok::LParen)?;
    cur.expect(&Tok::LBracket)?;
    let mut fluents = BTreeSet::new();
    if !cur.eat(&Tok::RBracket) {
        loop {
            fluents.insert(fluent(cur, spec)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect(&Tok::RBracket)?;
    }
    cur.expect(&Tok::Comma)?;
    let (v, _) = cur.variable()?;
    cur.expect(&Tok::RParen)?;
    Ok((fluents, Var(v)))
}

fn fluent(cur: &mut Cursor, spec: &BusinessProcessSpec) -> Result<Fluent, PropertyError> {
    let (name, pos) = cur.symbol()?;
    cur.expect(&Tok::LParen)?;
    let obj = |cur: &mut Cursor| -> Result<_, PropertyError> {
        let (id, p) = cur.symbol()?;
        spec.lookup(&id)
            .map_err(|_| PropertyError::UnknownObject(p, id))
    };
    let x = obj(cur)?;
    let f = match name.as_str() {
        "begins" => Fluent::Begins(x),
        "completes" => Fluent::Completes(x),
        "enables" => {
            cur.expect(&Tok::Comma)?;
            let y = obj(cur)?;
            if !spec.has_flow(x, y) {
                return Err(PropertyError::NotAFlow(
                    pos,
                    spec.name(x).into(),
                    spec.name(y).into(),
                ));
            }
            Fluent::Enables(x, y)
        }
        "enacting" => {
            cur.expect(&Tok::Comma)?;
            let (r, rpos) = cur.int()?;
            if r < 0 {
                return Err(SyntaxError::new(rpos, "residual time must be non-negative").into());
            }
            Fluent::Enacting(x, r)
        }
        other => return Err(SyntaxError::new(pos, format!("unknown fluent `{other}`")).into()),
    };
    cur.expect(&Tok::RParen)?;
    Ok(f)
}
