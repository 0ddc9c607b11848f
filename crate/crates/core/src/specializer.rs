//! Removal of the interpreter: compiles a process model and a property into
//! Horn clauses over integer variables only.
//!
//! States are driven symbolically. Fluent skeletons stay concrete while the
//! residual times of enacting tasks are constraint variables. A state in
//! which only time can pass is folded into a predicate keyed by its skeleton
//! and the waypoint segment; its arguments are the residual variables in
//! skeleton order, the current time and the time at which the segment's
//! waypoint is reached.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::chc::{
    Atom, ChcError, ClauseSet, Conjunct, Head, HornClause, LinExpr, LinearConstraint, Rel, Term,
    Var,
};
use crate::model::{BusinessProcessSpec, Kind, ObjId};
use crate::property::PropertySpec;
use crate::semantics::{initial_state, Fluent, Rule};
use crate::wellformed::{check_well_formed, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecializeError {
    #[error("model is not well formed ({} violations)", .0.len())]
    NotWellFormed(Vec<Violation>),
    #[error("`{0}` would be enacted twice at once; only safe processes are supported")]
    Unsafe(String),
    #[error("more than {0} predicates generated")]
    TooManyPredicates(usize),
    #[error(transparent)]
    Clause(#[from] ChcError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Residual {
    Zero,
    Var(Var),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicState {
    /// Every fluent except `enacting`.
    pub fluents: BTreeSet<Fluent>,
    pub enacting: BTreeMap<ObjId, Residual>,
    pub guard: LinearConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Skeleton {
    pub fluents: BTreeSet<Fluent>,
    pub slots: Vec<ObjId>,
}

fn residual_var(prefix: &str, spec: &BusinessProcessSpec, x: ObjId) -> Var {
    Var(format!("{prefix}_{}", spec.name(x)))
}

impl SymbolicState {
    pub fn new(fluents: BTreeSet<Fluent>) -> Self {
        SymbolicState {
            fluents,
            enacting: BTreeMap::new(),
            guard: LinearConstraint::truth(),
        }
    }

    /// A concrete fluent set; positive residuals become variables `W_<x>`
    /// fixed by the guard.
    pub fn from_concrete(spec: &BusinessProcessSpec, fs: &BTreeSet<Fluent>) -> Self {
        let mut s = SymbolicState::new(BTreeSet::new());
        for f in fs {
            match *f {
                Fluent::Enacting(x, 0) => {
                    s.enacting.insert(x, Residual::Zero);
                }
                Fluent::Enacting(x, r) => {
                    let v = residual_var("W", spec, x);
                    s.guard.push(Conjunct::new(
                        LinExpr::var(v.clone()),
                        Rel::Eq,
                        LinExpr::constant(r),
                    ));
                    s.enacting.insert(x, Residual::Var(v));
                }
                other => {
                    s.fluents.insert(other);
                }
            }
        }
        s
    }

    pub fn skeleton(&self) -> Skeleton {
        Skeleton {
            fluents: self.fluents.clone(),
            slots: self.enacting.keys().copied().collect(),
        }
    }

    /// Only time can pass: no S1-S5 premise holds, every residual is a
    /// variable and something is enacting.
    pub fn is_fold_point(&self, spec: &BusinessProcessSpec) -> bool {
        !self.enacting.is_empty()
            && self
                .enacting
                .values()
                .all(|r| matches!(r, Residual::Var(_)))
            && !has_structural_premise(spec, &self.fluents)
    }

    pub fn residual_vars(&self) -> Vec<Var> {
        self.enacting
            .values()
            .filter_map(|r| match r {
                Residual::Var(v) => Some(v.clone()),
                Residual::Zero => None,
            })
            .collect()
    }
}

fn has_structural_premise(spec: &BusinessProcessSpec, fluents: &BTreeSet<Fluent>) -> bool {
    let any_enables = fluents.iter().any(|f| matches!(f, Fluent::Enables(..)));
    if any_enables
        && spec
            .of_kind(Kind::ParMerge)
            .any(|x| spec.pred(x).is_empty())
    {
        return true;
    }
    fluents.iter().any(|f| match *f {
        Fluent::Begins(_) => true,
        Fluent::Completes(x) => !spec.not_par_branch(x) || !spec.succ(x).is_empty(),
        Fluent::Enables(_, x) => {
            spec.not_par_merge(x)
                || spec
                    .pred(x)
                    .iter()
                    .all(|&p| fluents.contains(&Fluent::Enables(p, x)))
        }
        Fluent::Enacting(..) => false,
    })
}

/// One application of S1-S6.
pub fn symbolic_successors(
    spec: &BusinessProcessSpec,
    s: &SymbolicState,
) -> Result<Vec<(Rule, SymbolicState)>, SpecializeError> {
    let mut out = Vec::new();
    let edit = |remove: &[Fluent], add: &[Fluent]| {
        let mut n = s.clone();
        for r in remove {
            n.fluents.remove(r);
        }
        n.fluents.extend(add.iter().copied());
        n
    };
    let mut merges_done = BTreeSet::new();
    for &f in &s.fluents {
        match f {
            Fluent::Begins(x) => {
                if s.enacting.contains_key(&x) {
                    return Err(SpecializeError::Unsafe(spec.name(x).to_string()));
                }
                let mut n = edit(&[f], &[]);
                if spec.kind(x) == Kind::Task {
                    let d = residual_var("D", spec, x);
                    if s.guard.vars().contains(&d) {
                        return Err(SpecializeError::Unsafe(spec.name(x).to_string()));
                    }
                    let b = spec.bounds(x);
                    n.guard.push(Conjunct::new(
                        LinExpr::var(d.clone()),
                        Rel::Ge,
                        LinExpr::constant(b.d_min),
                    ));
                    n.guard.push(Conjunct::new(
                        LinExpr::var(d.clone()),
                        Rel::Le,
                        LinExpr::constant(b.d_max),
                    ));
                    n.guard = n.guard.normalize();
                    n.enacting.insert(x, Residual::Var(d));
                } else {
                    n.enacting.insert(x, Residual::Zero);
                }
                out.push((Rule::S1, n));
            }
            Fluent::Completes(x) if !spec.not_par_branch(x) => {
                let en: Vec<Fluent> = spec
                    .succ(x)
                    .iter()
                    .map(|&y| Fluent::Enables(x, y))
                    .collect();
                out.push((Rule::S2, edit(&[f], &en)));
            }
            Fluent::Completes(x) => {
                for &y in spec.succ(x) {
                    out.push((Rule::S3, edit(&[f], &[Fluent::Enables(x, y)])));
                }
            }
            Fluent::Enables(_, x) if spec.not_par_merge(x) => {
                out.push((Rule::S5, edit(&[f], &[Fluent::Begins(x)])));
            }
            Fluent::Enables(_, x) => {
                if merges_done.insert(x) {
                    let en: Vec<Fluent> = spec
                        .pred(x)
                        .iter()
                        .map(|&p| Fluent::Enables(p, x))
                        .collect();
                    if en.iter().all(|e| s.fluents.contains(e)) {
                        out.push((Rule::S4, edit(&en, &[Fluent::Begins(x)])));
                    }
                }
            }
            Fluent::Enacting(..) => unreachable!("enacting fluents live in the residual map"),
        }
    }
    if s.fluents.iter().any(|f| matches!(f, Fluent::Enables(..))) {
        for x in spec.of_kind(Kind::ParMerge) {
            if spec.pred(x).is_empty() {
                out.push((Rule::S4, edit(&[], &[Fluent::Begins(x)])));
            }
        }
    }
    for (&x, r) in &s.enacting {
        let mut n = s.clone();
        n.enacting.remove(&x);
        n.fluents.insert(Fluent::Completes(x));
        match r {
            Residual::Zero => out.push((Rule::S6, n)),
            Residual::Var(v) => {
                n.guard.push(Conjunct::new(
                    LinExpr::var(v.clone()),
                    Rel::Eq,
                    LinExpr::zero(),
                ));
                n.guard = n.guard.normalize();
                if n.guard.is_satisfiable() {
                    out.push((Rule::S6, n));
                }
            }
        }
    }
    Ok(out)
}

/// The states reached from `s` by S1-S6 at which the closure stops: fold
/// points (residual variables are treated as positive) and dead ends.
pub fn instantaneous_closure(
    spec: &BusinessProcessSpec,
    s: &SymbolicState,
) -> Result<Vec<SymbolicState>, SpecializeError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut stack = vec![s.clone()];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        if cur.is_fold_point(spec) {
            out.push(cur);
            continue;
        }
        let next = symbolic_successors(spec, &cur)?;
        if next.is_empty() {
            out.push(cur);
        }
        stack.extend(next.into_iter().map(|(_, n)| n));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// One outcome of S7.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeAdvance {
    /// Slot whose residual is the minimum.
    pub slot: ObjId,
    /// Case condition plus defining equalities of the new residuals.
    pub constraint: LinearConstraint,
    pub state: SymbolicState,
    /// The elapsed time.
    pub elapsed: LinExpr,
}

/// One case per enacting slot `i` taken as the minimum: `Ri > 0`,
/// `Ri =< Rj`, `Ri' = 0`, `Rj' = Rj - Ri`. New residuals are named
/// `N_<object>`.
pub fn advance_time(spec: &BusinessProcessSpec, s: &SymbolicState) -> Vec<TimeAdvance> {
    let slots: Vec<(ObjId, Var)> = s
        .enacting
        .iter()
        .filter_map(|(&x, r)| match r {
            Residual::Var(v) => Some((x, v.clone())),
            Residual::Zero => None,
        })
        .collect();
    if slots.len() != s.enacting.len() {
        // a zero residual means S6 applies
        return Vec::new();
    }
    let mut out = Vec::new();
    for (x, ri) in &slots {
        let mut c = LinearConstraint::truth();
        c.push(Conjunct::new(
            LinExpr::var(ri.clone()),
            Rel::Gt,
            LinExpr::zero(),
        ));
        let mut enacting = BTreeMap::new();
        for (y, rj) in &slots {
            let n = residual_var("N", spec, *y);
            if y == x {
                c.push(Conjunct::new(
                    LinExpr::var(n.clone()),
                    Rel::Eq,
                    LinExpr::zero(),
                ));
            } else {
                c.push(Conjunct::new(
                    LinExpr::var(ri.clone()),
                    Rel::Le,
                    LinExpr::var(rj.clone()),
                ));
                c.push(Conjunct::new(
                    LinExpr::var(n.clone()),
                    Rel::Eq,
                    LinExpr::var(rj.clone()).minus(&LinExpr::var(ri.clone())),
                ));
            }
            enacting.insert(*y, Residual::Var(n));
        }
        let state = SymbolicState {
            fluents: s.fluents.clone(),
            enacting,
            guard: s.guard.and(&c).normalize(),
        };
        out.push(TimeAdvance {
            slot: *x,
            constraint: c,
            state,
            elapsed: LinExpr::var(ri.clone()),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateInfo {
    pub name: String,
    pub skeleton: Skeleton,
    pub segment: usize,
}

impl PredicateInfo {
    /// Residuals, current time, exit time.
    pub fn arity(&self) -> usize {
        self.skeleton.slots.len() + 2
    }
}

/// Memo table of generated predicates, in discovery order.
#[derive(Debug, Clone, Default)]
pub struct DefinitionTable {
    index: BTreeMap<(Skeleton, usize), usize>,
    preds: Vec<PredicateInfo>,
    pending: VecDeque<usize>,
}

impl DefinitionTable {
    pub fn new() -> Self {
        DefinitionTable::default()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn predicates(&self) -> &[PredicateInfo] {
        &self.preds
    }

    fn lookup_or_insert(&mut self, skeleton: Skeleton, segment: usize) -> usize {
        if let Some(&i) = self.index.get(&(skeleton.clone(), segment)) {
            return i;
        }
        let i = self.preds.len();
        self.preds.push(PredicateInfo {
            name: format!("new{}", i + 1),
            skeleton: skeleton.clone(),
            segment,
        });
        self.index.insert((skeleton, segment), i);
        self.pending.push_back(i);
        i
    }
}

/// The atom for `s` (a fold point) in `segment`, creating the predicate on
/// first sight.
pub fn fold(
    table: &mut DefinitionTable,
    s: &SymbolicState,
    segment: usize,
    time: &Var,
    exit: &Var,
) -> Atom {
    let i = table.lookup_or_insert(s.skeleton(), segment);
    let mut args: Vec<Term> = s.residual_vars().into_iter().map(Term::Var).collect();
    args.push(Term::Var(time.clone()));
    args.push(Term::Var(exit.clone()));
    Atom::new(table.preds[i].name.clone(), args)
}

/// Constraint under which `s` equals the waypoint `w`, if the skeletons agree.
fn match_constraint(s: &SymbolicState, w: &BTreeSet<Fluent>) -> Option<LinearConstraint> {
    let mut rest = BTreeSet::new();
    let mut res = BTreeMap::new();
    for f in w {
        match *f {
            Fluent::Enacting(x, r) => {
                if res.insert(x, r).is_some() {
                    return None;
                }
            }
            other => {
                rest.insert(other);
            }
        }
    }
    if rest != s.fluents || !res.keys().eq(s.enacting.keys()) {
        return None;
    }
    let mut c = LinearConstraint::truth();
    for (x, r) in &s.enacting {
        match r {
            Residual::Zero if res[x] != 0 => return None,
            Residual::Zero => {}
            Residual::Var(v) => c.push(Conjunct::new(
                LinExpr::var(v.clone()),
                Rel::Eq,
                LinExpr::constant(res[x]),
            )),
        }
    }
    Some(c)
}

#[derive(Debug, Clone)]
pub struct Options {
    pub max_predicates: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_predicates: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Specialized {
    pub clauses: ClauseSet,
    pub warnings: Vec<String>,
    /// Predicates generated before pruning.
    pub generated: usize,
}

struct Ctx<'a> {
    spec: &'a BusinessProcessSpec,
    prop: &'a PropertySpec,
    table: DefinitionTable,
    clauses: Vec<HornClause>,
    matched: Vec<bool>,
}

const TIME: &str = "T";
const EXIT: &str = "X";

impl Ctx<'_> {
    fn waypoint(&self, seg: usize) -> &BTreeSet<Fluent> {
        self.prop.waypoints()[seg - 1].fluents()
    }

    /// Depth-first over all interleavings of S1-S6 from `s`, emitting one
    /// clause per waypoint match and per fold.
    fn inline(
        &mut self,
        head: &Atom,
        s: SymbolicState,
        seg: usize,
        time: &Var,
    ) -> Result<(), SpecializeError> {
        let exit = Var::from(EXIT);
        let mut seen = HashSet::new();
        let mut stack = vec![s];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            if cur.is_fold_point(self.spec) {
                let atom = fold(&mut self.table, &cur, seg, time, &exit);
                self.emit(head, cur.guard.clone(), vec![atom]);
                continue;
            }
            self.try_match(head, &cur, seg, time);
            for (_, n) in symbolic_successors(self.spec, &cur)? {
                stack.push(n);
            }
        }
        Ok(())
    }

    fn try_match(&mut self, head: &Atom, s: &SymbolicState, seg: usize, time: &Var) {
        if let Some(c) = match_constraint(s, self.waypoint(seg)) {
            let mut g = s.guard.and(&c);
            g.push(Conjunct::new(
                LinExpr::var(Var::from(EXIT)),
                Rel::Eq,
                LinExpr::var(time.clone()),
            ));
            if g.normalize().is_satisfiable() {
                self.matched[seg - 1] = true;
                self.emit(head, g, vec![]);
            }
        }
    }

    fn emit(&mut self, head: &Atom, guard: LinearConstraint, body: Vec<Atom>) {
        let c = HornClause::new(Head::Pred(head.clone()), guard, body);
        self.clauses.push(c.normalize());
    }

    /// Clauses of a fold predicate: match at the head, S6 on each slot and
    /// S7 per minimum slot.
    fn define(&mut self, i: usize) -> Result<(), SpecializeError> {
        let info = self.table.preds[i].clone();
        let time = Var::from(TIME);
        let mut s = SymbolicState::new(info.skeleton.fluents.clone());
        for &x in &info.skeleton.slots {
            s.enacting
                .insert(x, Residual::Var(residual_var("R", self.spec, x)));
        }
        let mut args: Vec<Term> = s.residual_vars().into_iter().map(Term::Var).collect();
        args.push(Term::Var(time.clone()));
        args.push(Term::Var(Var::from(EXIT)));
        let head = Atom::new(info.name.clone(), args);

        self.try_match(&head, &s, info.segment, &time);
        for (rule, n) in symbolic_successors(self.spec, &s)? {
            debug_assert_eq!(rule, Rule::S6);
            self.inline(&head, n, info.segment, &time)?;
        }
        let t1 = Var::from("T1");
        for adv in advance_time(self.spec, &s) {
            let mut g = adv.state.guard.clone();
            g.push(Conjunct::new(
                LinExpr::var(t1.clone()),
                Rel::Eq,
                LinExpr::var(time.clone()).plus(&adv.elapsed),
            ));
            let atom = fold(
                &mut self.table,
                &adv.state,
                info.segment,
                &t1,
                &Var::from(EXIT),
            );
            self.emit(&head, g, vec![atom]);
        }
        Ok(())
    }
}

/// Compiles `spec` and `prop` into an interpreter-free clause set whose
/// satisfiability is equivalent to the property holding.
pub fn specialize(
    spec: &BusinessProcessSpec,
    prop: &PropertySpec,
) -> Result<Specialized, SpecializeError> {
    specialize_with(spec, prop, &Options::default())
}

pub fn specialize_with(
    spec: &BusinessProcessSpec,
    prop: &PropertySpec,
    opts: &Options,
) -> Result<Specialized, SpecializeError> {
    let violations = check_well_formed(spec);
    if !violations.is_empty() {
        return Err(SpecializeError::NotWellFormed(violations));
    }
    let n = prop.waypoints().len();
    let mut ctx = Ctx {
        spec,
        prop,
        table: DefinitionTable::new(),
        clauses: Vec::new(),
        matched: vec![false; n],
    };

    // entry predicates: one per segment, arguments (entry time, exit time)
    let time = Var::from(TIME);
    let mut entries = Vec::new();
    for seg in 1..=n {
        let name = format!("entry{seg}");
        let head = Atom::new(
            name.clone(),
            vec![Term::Var(time.clone()), Term::Var(Var::from(EXIT))],
        );
        let start = if seg == 1 {
            let init = initial_state(spec).expect("well-formed model has a start event");
            SymbolicState::from_concrete(spec, &init.fluents)
        } else {
            SymbolicState::from_concrete(spec, prop.waypoints()[seg - 2].fluents())
        };
        ctx.inline(&head, start, seg, &time)?;
        entries.push(name);
    }
    while let Some(i) = ctx.table.pending.pop_front() {
        if ctx.table.len() > opts.max_predicates {
            return Err(SpecializeError::TooManyPredicates(opts.max_predicates));
        }
        ctx.define(i)?;
    }

    let mut warnings = Vec::new();
    for (k, m) in ctx.matched.iter().enumerate() {
        if !m {
            warnings.push(format!(
                "waypoint {} ({}) is never matched",
                k + 1,
                prop.time_vars()[k + 1]
            ));
        }
    }

    // goal
    let mut body = Vec::new();
    for (k, name) in entries.iter().enumerate() {
        body.push(Atom::new(
            name.clone(),
            vec![
                Term::Var(prop.time_vars()[k].clone()),
                Term::Var(prop.time_vars()[k + 1].clone()),
            ],
        ));
    }
    let goal = HornClause::new(Head::False, prop.violation_with_origin(), body);
    let generated = ctx.table.len();
    let mut clauses = ctx.clauses;
    clauses.sort();
    clauses.dedup();
    let clauses = postprocess(clauses, goal, &entries, &ctx.table, &mut warnings);
    Ok(Specialized {
        clauses: ClauseSet::new(clauses)?,
        warnings,
        generated,
    })
}

fn postprocess(
    clauses: Vec<HornClause>,
    goal: HornClause,
    entries: &[String],
    table: &DefinitionTable,
    warnings: &mut Vec<String>,
) -> Vec<HornClause> {
    // productive predicates, least fixpoint
    let mut productive: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = productive.len();
        for c in &clauses {
            if c.body.iter().all(|a| productive.contains(&a.pred)) {
                productive.insert(c.head_pred().unwrap().to_string());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    let mut clauses: Vec<HornClause> = clauses
        .into_iter()
        .filter(|c| {
            productive.contains(c.head_pred().unwrap())
                && c.body.iter().all(|a| productive.contains(&a.pred))
        })
        .collect();

    let mut goal = goal;
    if goal.body.iter().any(|a| !productive.contains(&a.pred)) {
        warnings.push("some waypoint is unreachable; the goal is trivially satisfied".into());
        goal = HornClause::new(Head::False, LinearConstraint::falsum(), vec![]);
    } else {
        // inline entries defined by a single clause
        let mut body = Vec::new();
        let mut constraint = goal.constraint.clone();
        for (k, a) in goal.body.iter().enumerate() {
            let defs: Vec<&HornClause> = clauses
                .iter()
                .filter(|c| c.head_pred() == Some(&a.pred))
                .collect();
            if defs.len() == 1 {
                let d = defs[0];
                let h = d.head.atom().unwrap();
                let map: BTreeMap<Var, Var> = h
                    .args
                    .iter()
                    .zip(&a.args)
                    .map(|(p, q)| (p.as_var().unwrap().clone(), q.as_var().unwrap().clone()))
                    .collect();
                let r = d.rename(|v| {
                    map.get(v)
                        .cloned()
                        .unwrap_or_else(|| Var(format!("I{}_{}", k + 1, v)))
                });
                constraint = constraint.and(&r.constraint);
                body.extend(r.body);
            } else {
                body.push(a.clone());
            }
        }
        goal = HornClause::new(Head::False, constraint, body);
    }

    // keep what the goal reaches
    let mut live: BTreeSet<String> = goal.body.iter().map(|a| a.pred.clone()).collect();
    let mut frontier: Vec<String> = live.iter().cloned().collect();
    while let Some(p) = frontier.pop() {
        for c in clauses.iter().filter(|c| c.head_pred() == Some(&p)) {
            for a in &c.body {
                if live.insert(a.pred.clone()) {
                    frontier.push(a.pred.clone());
                }
            }
        }
    }
    clauses.retain(|c| live.contains(c.head_pred().unwrap()));

    // renumber survivors in discovery order
    let order: Vec<&str> = entries
        .iter()
        .map(String::as_str)
        .chain(table.predicates().iter().map(|p| p.name.as_str()))
        .filter(|p| live.contains(*p))
        .collect();
    let rename: BTreeMap<String, String> = order
        .iter()
        .enumerate()
        .map(|(i, p)| (p.to_string(), format!("new{}", i + 1)))
        .collect();
    let rn = |a: &Atom| Atom::new(rename[&a.pred].clone(), a.args.clone());
    let mut out: Vec<(usize, HornClause)> = clauses
        .into_iter()
        .map(|c| {
            let head = Head::Pred(rn(c.head.atom().unwrap()));
            let idx = order
                .iter()
                .position(|p| Some(*p) == c.head_pred())
                .unwrap();
            (
                idx,
                HornClause::new(head, c.constraint, c.body.iter().map(rn).collect()).normalize(),
            )
        })
        .collect();
    out.sort_by_key(|a| a.0);
    let mut result: Vec<HornClause> = Vec::new();
    for (_, c) in out {
        if !result.contains(&c) {
            result.push(c);
        }
    }
    result.push(
        HornClause::new(
            Head::False,
            goal.constraint,
            goal.body.iter().map(rn).collect(),
        )
        .normalize(),
    );
    result
}
