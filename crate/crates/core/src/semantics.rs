//! Concrete timed semantics and the explicit-state explorer.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::chc::{LinearConstraint, Rel, Var};
use crate::model::{BusinessProcessSpec, Kind, ObjId};
use crate::property::PropertySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fluent {
    Begins(ObjId),
    Completes(ObjId),
    Enables(ObjId, ObjId),
    Enacting(ObjId, i64),
}

impl Fluent {
    pub fn show(&self, spec: &BusinessProcessSpec) -> String {
        match *self {
            Fluent::Begins(x) => format!("begins({})", spec.name(x)),
            Fluent::Completes(x) => format!("completes({})", spec.name(x)),
            Fluent::Enables(x, y) => format!("enables({},{})", spec.name(x), spec.name(y)),
            Fluent::Enacting(x, r) => format!("enacting({},{r})", spec.name(x)),
        }
    }
}

pub fn show_fluents<'a>(
    spec: &BusinessProcessSpec,
    fs: impl IntoIterator<Item = &'a Fluent>,
) -> String {
    let items: Vec<String> = fs.into_iter().map(|f| f.show(spec)).collect();
    format!("{{{}}}", items.join(","))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedState {
    pub fluents: BTreeSet<Fluent>,
    pub time: i64,
}

impl TimedState {
    pub fn show(&self, spec: &BusinessProcessSpec) -> String {
        format!("t={} {}", self.time, show_fluents(spec, &self.fluents))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `<{begins(start)}, 0>`; `None` when the start event is not unique.
pub fn initial_state(spec: &BusinessProcessSpec) -> Option<TimedState> {
    let s = spec.start()?;
    Some(TimedState {
        fluents: BTreeSet::from([Fluent::Begins(s)]),
        time: 0,
    })
}

pub fn match_waypoint(s: &TimedState, w: &BTreeSet<Fluent>) -> bool {
    &s.fluents == w
}

/// Which instantaneous rule instances to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interleaving {
    /// Every applicable instance.
    #[default]
    All,
    /// Only the instances triggered by the least triggering fluent.
    FirstOnly,
    /// Only the instances triggered by the greatest triggering fluent.
    LastOnly,
}

/// Instances of S1-S6 grouped by triggering fluent, in fluent order. Each
/// group lists the alternative outcomes (durations for S1, successors for
/// S3).
fn instantaneous(
    spec: &BusinessProcessSpec,
    f: &BTreeSet<Fluent>,
) -> Vec<(Rule, Vec<BTreeSet<Fluent>>)> {
    let with = |remove: &[Fluent], add: &[Fluent]| {
        let mut g = f.clone();
        for r in remove {
            g.remove(r);
        }
        g.extend(add.iter().copied());
        g
    };
    let mut groups = Vec::new();
    let mut merges_done = BTreeSet::new();
    let any_enables = f.iter().any(|x| matches!(x, Fluent::Enables(..)));
    for &fl in f {
        match fl {
            Fluent::Begins(x) => {
                let b = spec.bounds(x);
                let outs = (b.d_min..=b.d_max)
                    .map(|d| with(&[fl], &[Fluent::Enacting(x, d)]))
                    .collect();
                groups.push((Rule::S1, outs));
            }
            Fluent::Completes(x) if !spec.not_par_branch(x) => {
                let en: Vec<Fluent> = spec
                    .succ(x)
                    .iter()
                    .map(|&y| Fluent::Enables(x, y))
                    .collect();
                groups.push((Rule::S2, vec![with(&[fl], &en)]));
            }
            Fluent::Completes(x) => {
                let outs: Vec<_> = spec
                    .succ(x)
                    .iter()
                    .map(|&y| with(&[fl], &[Fluent::Enables(x, y)]))
                    .collect();
                if !outs.is_empty() {
                    groups.push((Rule::S3, outs));
                }
            }
            Fluent::Enables(_, x) if spec.not_par_merge(x) => {
                groups.push((Rule::S5, vec![with(&[fl], &[Fluent::Begins(x)])]));
            }
            Fluent::Enables(_, x) => {
                if merges_done.insert(x) {
                    let en: Vec<Fluent> = spec
                        .pred(x)
                        .iter()
                        .map(|&p| Fluent::Enables(p, x))
                        .collect();
                    if en.iter().all(|e| f.contains(e)) {
                        groups.push((Rule::S4, vec![with(&en, &[Fluent::Begins(x)])]));
                    }
                }
            }
            Fluent::Enacting(x, 0) => {
                groups.push((Rule::S6, vec![with(&[fl], &[Fluent::Completes(x)])]));
            }
            Fluent::Enacting(..) => {}
        }
    }
    // a parallel merge without predecessors is enabled by any enables fluent
    if any_enables {
        for x in spec.of_kind(Kind::ParMerge) {
            if spec.pred(x).is_empty() {
                groups.push((Rule::S4, vec![with(&[], &[Fluent::Begins(x)])]));
            }
        }
    }
    groups
}

fn time_step(f: &BTreeSet<Fluent>, t: i64) -> Option<TimedState> {
    let m = f
        .iter()
        .filter_map(|x| match x {
            Fluent::Enacting(_, r) => Some(*r),
            _ => None,
        })
        .min()?;
    if m <= 0 {
        return None;
    }
    let fluents = f
        .iter()
        .map(|x| match *x {
            Fluent::Enacting(y, r) => Fluent::Enacting(y, r - m),
            other => other,
        })
        .collect();
    Some(TimedState {
        fluents,
        time: t + m,
    })
}

/// Successors of `s`, labelled by the rule applied.
pub fn successors(
    spec: &BusinessProcessSpec,
    s: &TimedState,
    policy: Interleaving,
) -> Vec<(Rule, TimedState)> {
    let mut groups = instantaneous(spec, &s.fluents);
    if groups.is_empty() {
        return time_step(&s.fluents, s.time)
            .map(|n| (Rule::S7, n))
            .into_iter()
            .collect();
    }
    match policy {
        Interleaving::All => {}
        Interleaving::FirstOnly => groups.truncate(1),
        Interleaving::LastOnly => {
            let last = groups.pop().unwrap();
            groups = vec![last];
        }
    }
    groups
        .into_iter()
        .flat_map(|(rule, outs)| {
            outs.into_iter().map(move |fluents| {
                (
                    rule,
                    TimedState {
                        fluents,
                        time: s.time,
                    },
                )
            })
        })
        .collect()
}

/// All states `s'` with `s --> s'`.
pub fn step(spec: &BusinessProcessSpec, s: &TimedState) -> BTreeSet<TimedState> {
    successors(spec, s, Interleaving::All)
        .into_iter()
        .map(|(_, n)| n)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// `None` for the initial state.
    pub rule: Option<Rule>,
    pub state: TimedState,
}

pub fn render_trace(spec: &BusinessProcessSpec, trace: &[TraceStep]) -> String {
    let mut out = String::new();
    for st in trace {
        let rule = st.rule.map_or("init".to_string(), |r| r.to_string());
        out.push_str(&format!(
            "t={} {} {}\n",
            st.state.time,
            rule,
            show_fluents(spec, &st.state.fluents)
        ));
    }
    out
}

/// Every state reachable from the initial state, up to `max_states`.
/// Returns the states and whether the search closed.
pub fn reachable(
    spec: &BusinessProcessSpec,
    policy: Interleaving,
    max_states: usize,
) -> (BTreeSet<TimedState>, bool) {
    let mut seen = BTreeSet::new();
    let Some(init) = initial_state(spec) else {
        return (seen, true);
    };
    let mut queue = VecDeque::from([init.clone()]);
    seen.insert(init);
    while let Some(s) = queue.pop_front() {
        for (_, n) in successors(spec, &s, policy) {
            if !seen.contains(&n) {
                if seen.len() >= max_states {
                    return (seen, false);
                }
                seen.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    (seen, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationChoice {
    Min,
    Max,
    Random,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    pub durations: DurationChoice,
    /// Fixed successor for exclusive choices.
    pub prefer: BTreeMap<ObjId, ObjId>,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            durations: DurationChoice::Random,
            prefer: BTreeMap::new(),
            max_steps: 10_000,
        }
    }
}

/// One run. Instantaneous rules fire on the least triggering fluent; the
/// remaining nondeterminism is resolved by `cfg`.
pub fn simulate(spec: &BusinessProcessSpec, cfg: &SimConfig) -> Vec<TraceStep> {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let Some(mut s) = initial_state(spec) else {
        return Vec::new();
    };
    let mut trace = vec![TraceStep {
        rule: None,
        state: s.clone(),
    }];
    for _ in 0..cfg.max_steps {
        let groups = instantaneous(spec, &s.fluents);
        let next = match groups.into_iter().next() {
            None => match time_step(&s.fluents, s.time) {
                Some(n) => (Rule::S7, n),
                None => break,
            },
            Some((rule, outs)) => {
                let pick = match rule {
                    Rule::S1 => match cfg.durations {
                        DurationChoice::Min => 0,
                        DurationChoice::Max => outs.len() - 1,
                        DurationChoice::Random => rng.random_range(0..outs.len()),
                    },
                    Rule::S3 => {
                        let x = s
                            .fluents
                            .iter()
                            .find_map(|f| match f {
                                Fluent::Completes(x)
                                    if spec.not_par_branch(*x) && !spec.succ(*x).is_empty() =>
                                {
                                    Some(*x)
                                }
                                _ => None,
                            })
                            .unwrap();
                        match cfg
                            .prefer
                            .get(&x)
                            .and_then(|y| spec.succ(x).iter().position(|z| z == y))
                        {
                            Some(i) => i,
                            None => rng.random_range(0..outs.len()),
                        }
                    }
                    _ => 0,
                };
                let fluents = outs.into_iter().nth(pick).unwrap();
                (
                    rule,
                    TimedState {
                        fluents,
                        time: s.time,
                    },
                )
            }
        };
        s = next.1.clone();
        trace.push(TraceStep {
            rule: Some(next.0),
            state: next.1,
        });
    }
    trace
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    /// Largest time offset from the last matched waypoint that is explored.
    pub slack: i64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 1_000_000,
            slack: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Violated {
        trace: Vec<TraceStep>,
        /// Times of the waypoints, starting with the initial time 0.
        times: Vec<i64>,
    },
    NoViolationWithinBounds {
        exhaustive: bool,
        states: usize,
    },
}

impl OracleVerdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, OracleVerdict::Violated { .. })
    }

    /// Definitive answer, if any.
    pub fn holds(&self) -> Option<bool> {
        match self {
            OracleVerdict::Violated { .. } => Some(false),
            OracleVerdict::NoViolationWithinBounds {
                exhaustive: true, ..
            } => Some(true),
            _ => None,
        }
    }
}

/// State of one violation conjunct once part of the waypoint times are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Residue {
    Sat,
    Open(i64),
}

struct Violation {
    /// Per conjunct: relation and coefficients over T0..Tn, constant last.
    rows: Vec<(Rel, Vec<i64>, i64)>,
}

impl Violation {
    fn new(prop: &PropertySpec) -> Self {
        let c = prop.violation_with_origin().normalize();
        let n = prop.time_vars().len();
        let rows = c
            .conjuncts()
            .iter()
            .map(|cj| {
                let coeffs = (0..n)
                    .map(|i| cj.expr.coeff(&prop.time_vars()[i]))
                    .collect();
                (cj.rel, coeffs, cj.expr.const_term())
            })
            .collect();
        Violation { rows }
    }

    /// Residues with `known` waypoint times and all later times written as
    /// `t + U` for `U >= 0`; `None` when some conjunct can no longer hold.
    fn residues(&self, known: &[i64], t: i64) -> Option<Vec<Residue>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for (rel, coeffs, k) in &self.rows {
            let mut c = *k;
            let (mut pos, mut neg) = (false, false);
            for (i, &a) in coeffs.iter().enumerate() {
                if i < known.len() {
                    c += a * known[i];
                } else {
                    c += a * t;
                    pos |= a > 0;
                    neg |= a < 0;
                }
            }
            let free = pos || neg;
            let r = match rel {
                Rel::Ge if c >= 0 && !neg => Residue::Sat,
                Rel::Ge if c < 0 && !pos => return None,
                Rel::Eq if !free && c == 0 => Residue::Sat,
                Rel::Eq if (c > 0 && !neg) || (c < 0 && !pos) => return None,
                Rel::Ne if !free && c != 0 => Residue::Sat,
                Rel::Ne if !free => return None,
                _ => Residue::Open(c),
            };
            out.push(r);
        }
        Some(out)
    }
}

struct Node {
    state: TimedState,
    phase: usize,
    times: Vec<i64>,
    parent: Option<usize>,
    rule: Option<Rule>,
}

/// Breadth-first search for a run passing the waypoints in order at times
/// satisfying the violation constraint.
pub fn explore(spec: &BusinessProcessSpec, prop: &PropertySpec, bounds: Bounds) -> OracleVerdict {
    explore_with(spec, prop, bounds, Interleaving::All)
}

pub fn explore_with(
    spec: &BusinessProcessSpec,
    prop: &PropertySpec,
    bounds: Bounds,
    policy: Interleaving,
) -> OracleVerdict {
    let viol = Violation::new(prop);
    let n = prop.waypoints().len();
    let Some(init) = initial_state(spec) else {
        return OracleVerdict::NoViolationWithinBounds {
            exhaustive: true,
            states: 0,
        };
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashSet<(usize, BTreeSet<Fluent>, Vec<Residue>)> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut exhaustive = true;

    let mut push = |nodes: &mut Vec<Node>,
                    queue: &mut VecDeque<usize>,
                    node: Node,
                    exhaustive: &mut bool|
     -> Option<usize> {
        let offset = node.state.time - node.times.last().copied().unwrap_or(0);
        if offset > bounds.slack {
            *exhaustive = false;
            return None;
        }
        let res = viol.residues(&node.times, node.state.time)?;
        if !seen.insert((node.phase, node.state.fluents.clone(), res)) {
            return None;
        }
        if seen.len() > bounds.max_states {
            *exhaustive = false;
            return None;
        }
        nodes.push(node);
        queue.push_back(nodes.len() - 1);
        Some(nodes.len() - 1)
    };

    let root = Node {
        state: init,
        phase: 0,
        times: vec![0],
        parent: None,
        rule: None,
    };
    push(&mut nodes, &mut queue, root, &mut exhaustive);
    while let Some(i) = queue.pop_front() {
        let (phase, state) = (nodes[i].phase, nodes[i].state.clone());
        if phase == n {
            // every conjunct is decided once all times are known
            return OracleVerdict::Violated {
                trace: trace_of(&nodes, i),
                times: nodes[i].times.clone(),
            };
        }
        if match_waypoint(&state, prop.waypoints()[phase].fluents()) {
            let mut times = nodes[i].times.clone();
            times.push(state.time);
            let node = Node {
                state: state.clone(),
                phase: phase + 1,
                times,
                parent: Some(i),
                rule: None,
            };
            push(&mut nodes, &mut queue, node, &mut exhaustive);
        }
        for (rule, next) in successors(spec, &state, policy) {
            let node = Node {
                state: next,
                phase,
                times: nodes[i].times.clone(),
                parent: Some(i),
                rule: Some(rule),
            };
            push(&mut nodes, &mut queue, node, &mut exhaustive);
        }
        if !exhaustive && nodes.len() >= bounds.max_states {
            break;
        }
    }
    OracleVerdict::NoViolationWithinBounds {
        exhaustive,
        states: nodes.len(),
    }
}

fn trace_of(nodes: &[Node], mut i: usize) -> Vec<TraceStep> {
    let mut out = Vec::new();
    loop {
        let nd = &nodes[i];
        // waypoint matches repeat the parent state
        if nd.rule.is_some() || nd.parent.is_none() {
            out.push(TraceStep {
                rule: nd.rule,
                state: nd.state.clone(),
            });
        }
        match nd.parent {
            Some(p) => i = p,
            None => break,
        }
    }
    out.reverse();
    out
}

/// Evaluates the violation constraint on concrete waypoint times.
pub fn violation_holds(prop: &PropertySpec, times: &[i64]) -> bool {
    let vars: &[Var] = prop.time_vars();
    let c: LinearConstraint = prop.violation_with_origin();
    c.holds(|v| vars.iter().position(|w| w == v).map_or(0, |i| times[i]))
}
