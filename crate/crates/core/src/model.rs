//! Business process specifications: flow objects, sequence flows and task
//! durations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Cursor, Pos, SyntaxError, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Start,
    End,
    Task,
    ParBranch,
    ParMerge,
    ExcBranch,
    ExcMerge,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Start,
        Kind::End,
        Kind::Task,
        Kind::ParBranch,
        Kind::ParMerge,
        Kind::ExcBranch,
        Kind::ExcMerge,
    ];

    /// Fact name in the input syntax.
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Start => "start",
            Kind::End => "end",
            Kind::Task => "task",
            Kind::ParBranch => "par_branch",
            Kind::ParMerge => "par_merge",
            Kind::ExcBranch => "exc_branch",
            Kind::ExcMerge => "exc_merge",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn is_gateway(self) -> bool {
        matches!(
            self,
            Kind::ParBranch | Kind::ParMerge | Kind::ExcBranch | Kind::ExcMerge
        )
    }

    pub fn is_branch(self) -> bool {
        matches!(self, Kind::ParBranch | Kind::ExcBranch)
    }

    pub fn is_merge(self) -> bool {
        matches!(self, Kind::ParMerge | Kind::ExcMerge)
    }

    pub fn is_event(self) -> bool {
        matches!(self, Kind::Start | Kind::End)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Index of a flow object; objects are numbered in lexicographic id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowObject {
    pub id: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DurationBound {
    pub d_min: i64,
    pub d_max: i64,
}

impl DurationBound {
    pub const ZERO: DurationBound = DurationBound { d_min: 0, d_max: 0 };

    pub fn new(d_min: i64, d_max: i64) -> Self {
        DurationBound { d_min, d_max }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {source}")]
    At { pos: Pos, source: Box<ModelError> },
    #[error("flow object `{0}` declared twice")]
    DuplicateId(String),
    #[error("flow object `{id}` declared as both {first} and {second}")]
    DuplicateKind {
        id: String,
        first: Kind,
        second: Kind,
    },
    #[error("duration of `{0}` given twice")]
    DuplicateDuration(String),
    #[error("sequence flow ({0},{1}) names undeclared object `{2}`")]
    UndeclaredEndpoint(String, String, String),
    #[error("duration given for undeclared object `{0}`")]
    UndeclaredDuration(String),
    #[error("task `{0}` has no duration")]
    TaskWithoutDuration(String),
    #[error("invalid duration bounds [{d_min},{d_max}] for {kind} `{id}`")]
    InvalidDuration {
        id: String,
        kind: Kind,
        d_min: i64,
        d_max: i64,
    },
    #[error("unknown flow object `{0}`")]
    UnknownId(String),
}

impl ModelError {
    fn at(self, pos: Option<Pos>) -> ModelError {
        match pos {
            Some(pos) => ModelError::At {
                pos,
                source: Box::new(self),
            },
            None => self,
        }
    }

    /// The error without position wrapper.
    pub fn kind(&self) -> &ModelError {
        match self {
            ModelError::At { source, .. } => source.kind(),
            e => e,
        }
    }
}

/// An immutable, indexed business process specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusinessProcessSpec {
    objects: Vec<FlowObject>,
    index: BTreeMap<String, ObjId>,
    flows: BTreeSet<(ObjId, ObjId)>,
    durations: Vec<DurationBound>,
    succ: Vec<Vec<ObjId>>,
    pred: Vec<Vec<ObjId>>,
}

impl BusinessProcessSpec {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[FlowObject] {
        &self.objects
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjId> {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn flows(&self) -> impl Iterator<Item = (ObjId, ObjId)> + '_ {
        self.flows.iter().copied()
    }

    pub fn flow_count(&self) -> usize {
        self.flows.len()
    }

    pub fn lookup(&self, name: &str) -> Result<ObjId, ModelError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownId(name.to_string()))
    }

    pub fn name(&self, x: ObjId) -> &str {
        &self.objects[x.0].id
    }

    pub fn kind(&self, x: ObjId) -> Kind {
        self.objects[x.0].kind
    }

    pub fn bounds(&self, x: ObjId) -> DurationBound {
        self.durations[x.0]
    }

    /// Successors in lexicographic id order.
    pub fn succ(&self, x: ObjId) -> &[ObjId] {
        &self.succ[x.0]
    }

    /// Predecessors in lexicographic id order.
    pub fn pred(&self, x: ObjId) -> &[ObjId] {
        &self.pred[x.0]
    }

    pub fn has_flow(&self, x: ObjId, y: ObjId) -> bool {
        self.flows.contains(&(x, y))
    }

    pub fn successors(&self, x: &str) -> Result<Vec<&str>, ModelError> {
        let x = self.lookup(x)?;
        Ok(self.succ(x).iter().map(|&y| self.name(y)).collect())
    }

    pub fn predecessors(&self, x: &str) -> Result<Vec<&str>, ModelError> {
        let x = self.lookup(x)?;
        Ok(self.pred(x).iter().map(|&y| self.name(y)).collect())
    }

    pub fn duration_bounds(&self, x: &str) -> Result<(i64, i64), ModelError> {
        let b = self.bounds(self.lookup(x)?);
        Ok((b.d_min, b.d_max))
    }

    pub fn of_kind(&self, kind: Kind) -> impl Iterator<Item = ObjId> + '_ {
        self.ids().filter(move |&x| self.kind(x) == kind)
    }

    /// The start event, when there is exactly one.
    pub fn start(&self) -> Option<ObjId> {
        unique(self.of_kind(Kind::Start))
    }

    /// The end event, when there is exactly one.
    pub fn end(&self) -> Option<ObjId> {
        unique(self.of_kind(Kind::End))
    }

    pub fn not_task(&self, x: ObjId) -> bool {
        self.kind(x) != Kind::Task
    }

    pub fn not_par_branch(&self, x: ObjId) -> bool {
        self.kind(x) != Kind::ParBranch
    }

    pub fn not_par_merge(&self, x: ObjId) -> bool {
        self.kind(x) != Kind::ParMerge
    }

    /// Structural copy for editing.
    pub fn to_builder(&self) -> SpecBuilder {
        let mut b = SpecBuilder::default();
        for o in &self.objects {
            b.objects.insert(o.id.clone(), (o.kind, None));
        }
        for &(x, y) in &self.flows {
            b.flows
                .insert((self.name(x).to_string(), self.name(y).to_string()), None);
        }
        for x in self.ids() {
            if self.kind(x) == Kind::Task || self.bounds(x) != DurationBound::ZERO {
                b.durations
                    .insert(self.name(x).to_string(), (self.bounds(x), None));
            }
        }
        b
    }
}

fn unique(mut it: impl Iterator<Item = ObjId>) -> Option<ObjId> {
    let first = it.next()?;
    match it.next() {
        None => Some(first),
        Some(_) => None,
    }
}

/// Incremental construction; validation happens in [`SpecBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct SpecBuilder {
    objects: BTreeMap<String, (Kind, Option<Pos>)>,
    flows: BTreeMap<(String, String), Option<Pos>>,
    durations: BTreeMap<String, (DurationBound, Option<Pos>)>,
}

impl SpecBuilder {
    pub fn new() -> Self {
        SpecBuilder::default()
    }

    pub fn object(&mut self, id: &str, kind: Kind) -> Result<&mut Self, ModelError> {
        self.object_at(id, kind, None)
    }

    fn object_at(
        &mut self,
        id: &str,
        kind: Kind,
        pos: Option<Pos>,
    ) -> Result<&mut Self, ModelError> {
        if let Some(&(first, _)) = self.objects.get(id) {
            let e = if first == kind {
                ModelError::DuplicateId(id.to_string())
            } else {
                ModelError::DuplicateKind {
                    id: id.to_string(),
                    first,
                    second: kind,
                }
            };
            return Err(e.at(pos));
        }
        self.objects.insert(id.to_string(), (kind, pos));
        Ok(self)
    }

    pub fn flow(&mut self, from: &str, to: &str) -> &mut Self {
        self.flow_at(from, to, None)
    }

    fn flow_at(&mut self, from: &str, to: &str, pos: Option<Pos>) -> &mut Self {
        self.flows
            .entry((from.to_string(), to.to_string()))
            .or_insert(pos);
        self
    }

    pub fn duration(&mut self, id: &str, d_min: i64, d_max: i64) -> Result<&mut Self, ModelError> {
        self.duration_at(id, DurationBound::new(d_min, d_max), None)
    }

    fn duration_at(
        &mut self,
        id: &str,
        b: DurationBound,
        pos: Option<Pos>,
    ) -> Result<&mut Self, ModelError> {
        if self.durations.contains_key(id) {
            return Err(ModelError::DuplicateDuration(id.to_string()).at(pos));
        }
        self.durations.insert(id.to_string(), (b, pos));
        Ok(self)
    }

    pub fn remove_flow(&mut self, from: &str, to: &str) -> bool {
        self.flows
            .remove(&(from.to_string(), to.to_string()))
            .is_some()
    }

    /// Removes an object together with its flows and duration.
    pub fn remove_object(&mut self, id: &str) -> bool {
        self.flows.retain(|(a, b), _| a != id && b != id);
        self.durations.remove(id);
        self.objects.remove(id).is_some()
    }

    pub fn build(&self) -> Result<BusinessProcessSpec, ModelError> {
        let objects: Vec<FlowObject> = self
            .objects
            .iter()
            .map(|(id, (kind, _))| FlowObject {
                id: id.clone(),
                kind: *kind,
            })
            .collect();
        let index: BTreeMap<String, ObjId> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.id.clone(), ObjId(i)))
            .collect();
        let mut flows = BTreeSet::new();
        for ((a, b), pos) in &self.flows {
            for end in [a, b] {
                if !index.contains_key(end) {
                    return Err(
                        ModelError::UndeclaredEndpoint(a.clone(), b.clone(), end.clone()).at(*pos),
                    );
                }
            }
            flows.insert((index[a], index[b]));
        }
        for (id, (_, pos)) in &self.durations {
            if !index.contains_key(id) {
                return Err(ModelError::UndeclaredDuration(id.clone()).at(*pos));
            }
        }
        let mut durations = Vec::with_capacity(objects.len());
        for o in &objects {
            let (b, pos) = match self.durations.get(&o.id) {
                Some(&(b, pos)) => (b, pos),
                None if o.kind == Kind::Task => {
                    let pos = self.objects[&o.id].1;
                    return Err(ModelError::TaskWithoutDuration(o.id.clone()).at(pos));
                }
                None => (DurationBound::ZERO, None),
            };
            let ok = if o.kind == Kind::Task {
                1 <= b.d_min && b.d_min <= b.d_max
            } else {
                b == DurationBound::ZERO
            };
            if !ok {
                let e = ModelError::InvalidDuration {
                    id: o.id.clone(),
                    kind: o.kind,
                    d_min: b.d_min,
                    d_max: b.d_max,
                };
                return Err(e.at(pos));
            }
            durations.push(b);
        }
        let mut succ = vec![Vec::new(); objects.len()];
        let mut pred = vec![Vec::new(); objects.len()];
        for &(x, y) in &flows {
            succ[x.0].push(y);
            pred[y.0].push(x);
        }
        for v in succ.iter_mut().chain(pred.iter_mut()) {
            v.sort();
        }
        Ok(BusinessProcessSpec {
            objects,
            index,
            flows,
            durations,
            succ,
            pred,
        })
    }
}

pub fn parse_bps(text: &str) -> Result<BusinessProcessSpec, ModelError> {
    let mut cur = Cursor::new(text)?;
    let mut b = SpecBuilder::new();
    while !cur.at_end() {
        let (name, pos) = cur.symbol()?;
        if let Some(kind) = Kind::from_keyword(&name) {
            cur.expect(&Tok::LParen)?;
            let (id, _) = cur.symbol()?;
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::Dot)?;
            b.object_at(&id, kind, Some(pos))?;
        } else if name == "seq" {
            cur.expect(&Tok::LParen)?;
            let (x, _) = cur.symbol()?;
            cur.expect(&Tok::Comma)?;
            let (y, _) = cur.symbol()?;
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::Dot)?;
            b.flow_at(&x, &y, Some(pos));
        } else if name == "duration" {
            if let Some((id, bound)) = duration_clause(&mut cur)? {
                b.duration_at(&id, bound, Some(pos))?;
            }
        } else {
            return Err(SyntaxError::new(pos, format!("unknown fact `{name}`")).into());
        }
    }
    b.build()
}

/// `duration(id, D) :- D>=n, D=<m.` or the catch-all
/// `duration(X, D) :- not_task(X), D=0.` (which yields `None`).
fn duration_clause(cur: &mut Cursor) -> Result<Option<(String, DurationBound)>, SyntaxError> {
    cur.expect(&Tok::LParen)?;
    let subject = match cur.next() {
        Some((Tok::Symbol(s), _)) => Ok(s),
        Some((Tok::Variable(v), _)) => Err(v),
        Some((t, p)) => {
            return Err(SyntaxError::new(
                p,
                format!("expected identifier, found {t}"),
            ))
        }
        None => return Err(cur.error("unexpected end of input")),
    };
    cur.expect(&Tok::Comma)?;
    let (d, _) = cur.variable()?;
    cur.expect(&Tok::RParen)?;
    cur.expect(&Tok::Neck)?;
    match subject {
        Err(x) => {
            let (guard, gpos) = cur.symbol()?;
            if guard != "not_task" {
                return Err(SyntaxError::new(
                    gpos,
                    "expected `not_task` in default duration clause",
                ));
            }
            cur.expect(&Tok::LParen)?;
            let (y, ypos) = cur.variable()?;
            if y != x {
                return Err(SyntaxError::new(ypos, format!("expected `{x}`")));
            }
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::Comma)?;
            let (lo, hi) = bounds(cur, &d)?;
            if (lo, hi) != (Some(0), Some(0)) {
                return Err(cur.error("default duration must be 0"));
            }
            Ok(None)
        }
        Ok(id) => {
            let (lo, hi) = bounds(cur, &d)?;
            match (lo, hi) {
                (Some(lo), Some(hi)) => Ok(Some((id, DurationBound::new(lo, hi)))),
                _ => Err(cur.error(format!(
                    "duration of `{id}` needs a lower and an upper bound"
                ))),
            }
        }
    }
}

fn bounds(cur: &mut Cursor, d: &str) -> Result<(Option<i64>, Option<i64>), SyntaxError> {
    let (mut lo, mut hi) = (None, None);
    loop {
        let pos = cur.pos();
        let (v, _) = cur.variable()?;
        if v != d {
            return Err(SyntaxError::new(pos, format!("expected `{d}`")));
        }
        let rel = cur.next().map(|(t, _)| t);
        let (n, npos) = cur.int()?;
        let (l, h) = match rel {
            Some(Tok::Ge) => (Some(n), None),
            Some(Tok::Gt) => (Some(n + 1), None),
            Some(Tok::Le) => (None, Some(n)),
            Some(Tok::Lt) => (None, Some(n - 1)),
            Some(Tok::Eq) => (Some(n), Some(n)),
            _ => return Err(SyntaxError::new(pos, "expected comparison")),
        };
        for (slot, new) in [(&mut lo, l), (&mut hi, h)] {
            if let Some(n) = new {
                if slot.is_some() {
                    return Err(SyntaxError::new(npos, "bound given twice"));
                }
                *slot = Some(n);
            }
        }
        if cur.eat(&Tok::Dot) {
            return Ok((lo, hi));
        }
        cur.expect(&Tok::Comma)?;
    }
}

/// Canonical fact listing; parses back to an equal spec.
impl fmt::Display for BusinessProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for kind in Kind::ALL {
            for x in self.of_kind(kind) {
                writeln!(f, "{kind}({}).", self.name(x))?;
            }
        }
        for &(x, y) in &self.flows {
            writeln!(f, "seq({},{}).", self.name(x), self.name(y))?;
        }
        for x in self.ids() {
            let b = self.bounds(x);
            if self.kind(x) == Kind::Task {
                writeln!(
                    f,
                    "duration({}, D) :- D>={}, D=<{}.",
                    self.name(x),
                    b.d_min,
                    b.d_max
                )?;
            }
        }
        Ok(())
    }
}
