//! Well-formedness conditions on process models.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{BusinessProcessSpec, Kind, ObjId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Disjointness,
    /// 1..=7
    Numbered(u8),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Disjointness => f.write_str("disjointness"),
            Condition::Numbered(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Condition::Disjointness => s.serialize_str("disjointness"),
            Condition::Numbered(n) => s.serialize_u8(*n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub witness: Vec<String>,
    pub message: String,
}

impl Violation {
    fn new(n: u8, witness: Vec<String>, message: String) -> Self {
        Violation {
            condition: Condition::Numbered(n),
            witness,
            message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition {}: {} [{}]",
            self.condition,
            self.message,
            self.witness.join(", ")
        )
    }
}

/// All violations, ordered by condition and then by witness.
pub fn check_well_formed(spec: &BusinessProcessSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let names = |xs: &[ObjId]| {
        xs.iter()
            .map(|&x| spec.name(x).to_string())
            .collect::<Vec<_>>()
    };

    // 1
    for (kind, what) in [(Kind::Start, "start"), (Kind::End, "end")] {
        let xs: Vec<ObjId> = spec.of_kind(kind).collect();
        if xs.len() != 1 {
            out.push(Violation::new(
                1,
                names(&xs),
                format!("expected exactly one {what} event, found {}", xs.len()),
            ));
        }
    }

    // 2
    let from_start = reach(spec, spec.of_kind(Kind::Start), false);
    let to_end = reach(spec, spec.of_kind(Kind::End), true);
    for x in spec.ids() {
        let (a, b) = (from_start[x.0], to_end[x.0]);
        if !(a && b) {
            let msg = match (a, b) {
                (false, false) => "neither reachable from a start event nor reaching an end event",
                (false, true) => "not reachable from a start event",
                _ => "does not reach an end event",
            };
            out.push(Violation::new(
                2,
                vec![spec.name(x).to_string()],
                format!("`{}` is {msg}", spec.name(x)),
            ));
        }
    }

    // 3-6
    let arity = |x: ObjId,
                 n: u8,
                 max_pred: usize,
                 max_succ: usize,
                 what: &str,
                 out: &mut Vec<Violation>| {
        let (p, s) = (spec.pred(x).len(), spec.succ(x).len());
        let mut problems = Vec::new();
        if p > max_pred {
            problems.push(format!("{p} predecessors"));
        }
        if s > max_succ {
            problems.push(format!("{s} successors"));
        }
        if !problems.is_empty() {
            out.push(Violation::new(
                n,
                vec![spec.name(x).to_string()],
                format!("{what} `{}` has {}", spec.name(x), problems.join(" and ")),
            ));
        }
    };
    for x in spec.of_kind(Kind::Start) {
        arity(x, 3, 0, 1, "start event", &mut out);
    }
    for x in spec.of_kind(Kind::End) {
        arity(x, 4, 1, 0, "end event", &mut out);
    }
    for x in spec.ids() {
        let k = spec.kind(x);
        if k.is_branch() {
            arity(x, 5, 1, usize::MAX, "branch gateway", &mut out);
        } else if k.is_merge() {
            arity(x, 5, usize::MAX, 1, "merge gateway", &mut out);
        }
    }
    for x in spec.of_kind(Kind::Task) {
        arity(x, 6, 1, 1, "task", &mut out);
    }

    // 7
    for cycle in gateway_cycles(spec) {
        let w = names(&cycle);
        out.push(Violation::new(
            7,
            w.clone(),
            format!("cycle through gateways only: {}", w.join(" -> ")),
        ));
    }

    out.sort_by_key(|a| a.condition);
    out
}

fn reach(
    spec: &BusinessProcessSpec,
    roots: impl Iterator<Item = ObjId>,
    backwards: bool,
) -> Vec<bool> {
    let mut seen = vec![false; spec.len()];
    let mut queue: VecDeque<ObjId> = roots.collect();
    for x in &queue {
        seen[x.0] = true;
    }
    while let Some(x) = queue.pop_front() {
        let next = if backwards {
            spec.pred(x)
        } else {
            spec.succ(x)
        };
        for &y in next {
            if !seen[y.0] {
                seen[y.0] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// First gateway-only cycle found by a depth-first search that visits
/// gateways and successors in lexicographic order.
pub fn gateway_only_cycle(spec: &BusinessProcessSpec) -> Option<Vec<String>> {
    let mut state = vec![0u8; spec.len()];
    let mut stack = Vec::new();
    for x in spec.ids().filter(|&x| spec.kind(x).is_gateway()) {
        if state[x.0] == 0 {
            if let Some(c) = dfs_cycle(spec, x, &mut state, &mut stack) {
                return Some(c.into_iter().map(|y| spec.name(y).to_string()).collect());
            }
        }
    }
    None
}

fn dfs_cycle(
    spec: &BusinessProcessSpec,
    x: ObjId,
    state: &mut [u8],
    stack: &mut Vec<ObjId>,
) -> Option<Vec<ObjId>> {
    state[x.0] = 1;
    stack.push(x);
    for &y in spec.succ(x) {
        if !spec.kind(y).is_gateway() {
            continue;
        }
        match state[y.0] {
            0 => {
                if let Some(c) = dfs_cycle(spec, y, state, stack) {
                    return Some(c);
                }
            }
            1 => {
                let i = stack.iter().position(|&z| z == y).unwrap();
                let mut c = stack[i..].to_vec();
                c.push(y);
                return Some(c);
            }
            _ => {}
        }
    }
    stack.pop();
    state[x.0] = 2;
    None
}

/// One cycle per strongly connected component of the gateway subgraph that
/// contains a cycle, starting at the component's least id.
fn gateway_cycles(spec: &BusinessProcessSpec) -> Vec<Vec<ObjId>> {
    let gws: Vec<ObjId> = spec.ids().filter(|&x| spec.kind(x).is_gateway()).collect();
    let reach_gw = |x: ObjId| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![x];
        while let Some(z) = stack.pop() {
            for &y in spec.succ(z) {
                if spec.kind(y).is_gateway() && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    };
    let closure: Vec<BTreeSet<ObjId>> = gws.iter().map(|&x| reach_gw(x)).collect();
    let pos = |x: ObjId| gws.iter().position(|&g| g == x).unwrap();
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for (i, &x) in gws.iter().enumerate() {
        if done.contains(&x) || !closure[i].contains(&x) {
            continue;
        }
        let scc: BTreeSet<ObjId> = closure[i]
            .iter()
            .copied()
            .filter(|&y| closure[pos(y)].contains(&x))
            .collect();
        done.extend(scc.iter().copied());
        out.push(shortest_cycle(spec, x, &scc));
    }
    out
}

fn shortest_cycle(spec: &BusinessProcessSpec, x: ObjId, scc: &BTreeSet<ObjId>) -> Vec<ObjId> {
    let mut parent = vec![None; spec.len()];
    let mut queue = VecDeque::from([x]);
    while let Some(z) = queue.pop_front() {
        for &y in spec.succ(z) {
            if y == x {
                let mut back = Vec::new();
                let mut cur = z;
                while cur != x {
                    back.push(cur);
                    cur = parent[cur.0].unwrap();
                }
                let mut path = vec![x];
                path.extend(back.into_iter().rev());
                path.push(x);
                return path;
            }
            if scc.contains(&y) && parent[y.0].is_none() {
                parent[y.0] = Some(z);
                queue.push_back(y);
            }
        }
    }
    unreachable!("member of a cyclic component")
}

pub fn render_text(violations: &[Violation]) -> String {
    let mut s = String::new();
    for v in violations {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

pub fn render_json(violations: &[Violation]) -> String {
    serde_json::to_string_pretty(violations).expect("violations serialize")
}
