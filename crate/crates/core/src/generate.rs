//! Random block-structured models and single-waypoint properties, used to
//! build test corpora.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::chc::{Conjunct, LinExpr, LinearConstraint, Rel, Var};
use crate::model::{BusinessProcessSpec, Kind, SpecBuilder};
use crate::property::{PropertySpec, Waypoint};
use crate::semantics::{simulate, DurationChoice, Fluent, SimConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Task {
        d_min: i64,
        d_max: i64,
    },
    Seq(Box<Block>, Box<Block>),
    /// Second branch `None` is a direct flow from branch to merge.
    Par(Box<Block>, Option<Box<Block>>),
    Exc(Box<Block>, Option<Box<Block>>),
    /// Exclusive merge, body, exclusive branch back to the merge or out.
    Loop(Box<Block>),
}

impl Block {
    pub fn size(&self) -> usize {
        match self {
            Block::Task { .. } => 1,
            Block::Seq(a, b) => a.size() + b.size(),
            Block::Par(a, b) | Block::Exc(a, b) => {
                2 + a.size() + b.as_ref().map_or(0, |b| b.size())
            }
            Block::Loop(a) => 2 + a.size(),
        }
    }

    pub fn has_loop(&self) -> bool {
        match self {
            Block::Task { .. } => false,
            Block::Seq(a, b) => a.has_loop() || b.has_loop(),
            Block::Par(a, b) | Block::Exc(a, b) => {
                a.has_loop() || b.as_ref().is_some_and(|b| b.has_loop())
            }
            Block::Loop(_) => true,
        }
    }

    /// Every path through the block passes a task.
    pub fn always_delays(&self) -> bool {
        match self {
            Block::Task { .. } => true,
            Block::Seq(a, b) => a.always_delays() || b.always_delays(),
            Block::Par(a, b) | Block::Exc(a, b) => {
                a.always_delays() && b.as_ref().is_some_and(|b| b.always_delays())
            }
            Block::Loop(a) => a.always_delays(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    /// Including start and end events.
    pub max_objects: usize,
    pub max_duration: i64,
    pub loops: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_objects: 8,
            max_duration: 3,
            loops: false,
        }
    }
}

pub fn random_block(rng: &mut impl Rng, budget: usize, opts: &GenOptions) -> Block {
    let task = |rng: &mut dyn rand::RngCore| {
        let d_min = rng.random_range(1..=opts.max_duration);
        Block::Task {
            d_min,
            d_max: rng.random_range(d_min..=opts.max_duration),
        }
    };
    if budget < 3 {
        return if budget == 2 && rng.random_bool(0.5) {
            Block::Seq(Box::new(task(rng)), Box::new(task(rng)))
        } else {
            task(rng)
        };
    }
    let choices = if opts.loops { 5 } else { 4 };
    match rng.random_range(0..choices) {
        0 => task(rng),
        1 => {
            let a = random_block(rng, budget - 1, opts);
            let b = random_block(rng, budget - a.size(), opts);
            Block::Seq(Box::new(a), Box::new(b))
        }
        k @ (2 | 3) => {
            let a = random_block(rng, budget - 2, opts);
            let left = budget - 2 - a.size();
            let b =
                (left > 0 && rng.random_bool(0.6)).then(|| Box::new(random_block(rng, left, opts)));
            if k == 2 {
                Block::Par(Box::new(a), b)
            } else {
                Block::Exc(Box::new(a), b)
            }
        }
        _ => {
            // a loop body without a task on some path is a gateway-only cycle
            let mut body = random_block(rng, budget - 2, opts);
            if !body.always_delays() {
                body = if budget >= 4 {
                    Block::Seq(
                        Box::new(task(rng)),
                        Box::new(random_block(rng, budget - 3, opts)),
                    )
                } else {
                    task(rng)
                };
            }
            Block::Loop(Box::new(body))
        }
    }
}

struct Emitter {
    b: SpecBuilder,
    tasks: usize,
    gateways: usize,
}

impl Emitter {
    fn gateway(&mut self, kind: Kind) -> String {
        self.gateways += 1;
        let id = format!("g{}", self.gateways);
        self.b.object(&id, kind).expect("fresh id");
        id
    }

    /// Returns (entry, exit).
    fn emit(&mut self, block: &Block) -> (String, String) {
        match block {
            Block::Task { d_min, d_max } => {
                self.tasks += 1;
                let id = format!("t{}", self.tasks);
                self.b.object(&id, Kind::Task).expect("fresh id");
                self.b.duration(&id, *d_min, *d_max).expect("task duration");
                (id.clone(), id)
            }
            Block::Seq(a, b) => {
                let (ai, ao) = self.emit(a);
                let (bi, bo) = self.emit(b);
                self.b.flow(&ao, &bi);
                (ai, bo)
            }
            Block::Par(a, b) | Block::Exc(a, b) => {
                let (bk, mk) = if matches!(block, Block::Par(..)) {
                    (Kind::ParBranch, Kind::ParMerge)
                } else {
                    (Kind::ExcBranch, Kind::ExcMerge)
                };
                let br = self.gateway(bk);
                let me = self.gateway(mk);
                for arm in [Some(a), b.as_ref()] {
                    match arm {
                        Some(x) => {
                            let (i, o) = self.emit(x);
                            self.b.flow(&br, &i);
                            self.b.flow(&o, &me);
                        }
                        None => {
                            self.b.flow(&br, &me);
                        }
                    }
                }
                (br, me)
            }
            Block::Loop(body) => {
                let me = self.gateway(Kind::ExcMerge);
                let br = self.gateway(Kind::ExcBranch);
                let (i, o) = self.emit(body);
                self.b.flow(&me, &i);
                self.b.flow(&o, &br);
                self.b.flow(&br, &me);
                (me, br)
            }
        }
    }
}

/// `start -> block -> end`.
pub fn build_model(block: &Block) -> BusinessProcessSpec {
    let mut e = Emitter {
        b: SpecBuilder::new(),
        tasks: 0,
        gateways: 0,
    };
    e.b.object("start", Kind::Start).unwrap();
    e.b.object("end", Kind::End).unwrap();
    let (i, o) = e.emit(block);
    e.b.flow("start", &i);
    e.b.flow(&o, "end");
    e.b.build().expect("generated models are valid")
}

pub fn random_model(rng: &mut impl Rng, opts: &GenOptions) -> BusinessProcessSpec {
    build_model(&random_block(rng, opts.max_objects - 2, opts))
}

/// One waypoint taken from a simulated run (or `completes(end)`), with a
/// deadline-style constraint on its time.
pub fn random_property(rng: &mut impl Rng, spec: &BusinessProcessSpec) -> PropertySpec {
    let cfg = SimConfig {
        seed: rng.random(),
        durations: DurationChoice::Random,
        max_steps: 200,
        ..SimConfig::default()
    };
    let trace = simulate(spec, &cfg);
    let (fluents, time): (BTreeSet<Fluent>, i64) = if rng.random_bool(0.4) {
        let end = spec.end().expect("generated models have one end");
        let t = trace.last().map_or(0, |s| s.state.time);
        (BTreeSet::from([Fluent::Completes(end)]), t)
    } else {
        let s = &trace[rng.random_range(1..trace.len())].state;
        (s.fluents.clone(), s.time)
    };
    let (t0, t1) = (Var::from("T0"), Var::from("T1"));
    let k = (time + rng.random_range(-1..=2)).max(0);
    let rel = [Rel::Gt, Rel::Lt, Rel::Eq, Rel::Ge][rng.random_range(0..4)];
    let violation = LinearConstraint::from_conjuncts([Conjunct::new(
        LinExpr::var(t1.clone()),
        rel,
        LinExpr::constant(k),
    )]);
    PropertySpec::new(t0, vec![Waypoint::new(fluents, t1)], violation)
        .expect("well-formed property")
}

#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub spec: BusinessProcessSpec,
    pub prop: PropertySpec,
}

/// `n` cases, each reproducible from its own seed.
pub fn corpus(seed: u64, n: usize, opts: &GenOptions) -> Vec<Case> {
    (0..n as u64)
        .map(|i| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
            let mut rng = StdRng::seed_from_u64(s);
            let spec = random_model(&mut rng, opts);
            let prop = random_property(&mut rng, &spec);
            Case {
                seed: s,
                spec,
                prop,
            }
        })
        .collect()
}
