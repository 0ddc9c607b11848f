#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use tempohorn::fixtures;
use tempohorn::model::{parse_bps, BusinessProcessSpec, Kind, SpecBuilder};
use tempohorn::wellformed::{check_well_formed, Condition};

/// Reflexive-transitive closure by Warshall's algorithm.
fn closure(spec: &BusinessProcessSpec) -> Vec<Vec<bool>> {
    let n = spec.len();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for (x, y) in spec.flows() {
        m[x.0][y.0] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

fn po_edit(f: impl FnOnce(&mut SpecBuilder)) -> BusinessProcessSpec {
    let mut b = parse_bps(fixtures::PURCHASE_ORDER).unwrap().to_builder();
    f(&mut b);
    b.build().unwrap()
}

fn single(spec: &BusinessProcessSpec, n: u8) {
    let v = check_well_formed(spec);
    assert_eq!(v.len(), 1, "{v:#?}");
    assert_eq!(v[0].condition, Condition::Numbered(n), "{v:#?}");
}

#[test]
fn mutation_condition_1() {
    single(
        &po_edit(|b| {
            b.object("end2", Kind::End).unwrap().flow("g4", "end2");
        }),
        1,
    );
}

#[test]
fn mutation_condition_2() {
    single(
        &po_edit(|b| {
            b.object("x", Kind::Task)
                .unwrap()
                .duration("x", 1, 2)
                .unwrap()
                .flow("x", "x");
        }),
        2,
    );
}

#[test]
fn mutation_condition_3() {
    single(
        &po_edit(|b| {
            b.flow("g2", "start");
        }),
        3,
    );
}

#[test]
fn mutation_condition_4() {
    single(
        &po_edit(|b| {
            b.flow("end", "g1");
        }),
        4,
    );
}

#[test]
fn mutation_condition_5() {
    single(
        &po_edit(|b| {
            b.flow("g2", "g4");
        }),
        5,
    );
}

#[test]
fn mutation_condition_6() {
    single(
        &po_edit(|b| {
            b.flow("g3", "s");
        }),
        6,
    );
}

#[test]
fn mutation_condition_7() {
    let s = po_edit(|b| {
        assert!(b.remove_flow("p", "g3"));
        b.object("m", Kind::ExcMerge).unwrap();
        b.object("b", Kind::ExcBranch).unwrap();
        b.flow("p", "m")
            .flow("m", "b")
            .flow("b", "m")
            .flow("b", "g3");
    });
    single(&s, 7);
    assert_eq!(check_well_formed(&s)[0].witness, ["b", "m", "b"]);
}

#[test]
fn report_is_deterministic() {
    let s = po_edit(|b| {
        b.flow("g1", "g2").flow("end", "g1").flow("g3", "s");
    });
    assert_eq!(check_well_formed(&s), check_well_formed(&s.clone()));
}

fn arbitrary_spec() -> impl Strategy<Value = BusinessProcessSpec> {
    (1usize..9)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::sample::select(Kind::ALL.to_vec()), n),
                prop::collection::vec((0..n, 0..n), 0..2 * n),
            )
        })
        .prop_map(|(kinds, flows)| {
            let mut b = SpecBuilder::new();
            for (i, k) in kinds.iter().enumerate() {
                b.object(&format!("x{i}"), *k).unwrap();
                if *k == Kind::Task {
                    b.duration(&format!("x{i}"), 1, 1).unwrap();
                }
            }
            for (x, y) in flows {
                b.flow(&format!("x{x}"), &format!("x{y}"));
            }
            b.build().unwrap()
        })
}

proptest! {
    #[test]
    fn condition_2_matches_matrix_closure(spec in arbitrary_spec()) {
        let m = closure(&spec);
        let starts: Vec<_> = spec.of_kind(Kind::Start).collect();
        let ends: Vec<_> = spec.of_kind(Kind::End).collect();
        let expected: BTreeSet<String> = spec
            .ids()
            .filter(|x| {
                !(starts.iter().any(|s| m[s.0][x.0]) && ends.iter().any(|e| m[x.0][e.0]))
            })
            .map(|x| spec.name(x).to_string())
            .collect();
        let got: BTreeSet<String> = check_well_formed(&spec)
            .into_iter()
            .filter(|v| v.condition == Condition::Numbered(2))
            .flat_map(|v| v.witness)
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn cycle_witnesses_are_gateway_cycles(spec in arbitrary_spec()) {
        for v in check_well_formed(&spec) {
            if v.condition == Condition::Numbered(7) {
                prop_assert!(v.witness.len() >= 2);
                prop_assert_eq!(v.witness.first(), v.witness.last());
                for w in v.witness.windows(2) {
                    let (x, y) = (spec.lookup(&w[0]).unwrap(), spec.lookup(&w[1]).unwrap());
                    prop_assert!(spec.kind(x).is_gateway());
                    prop_assert!(spec.has_flow(x, y));
                }
            }
        }
    }

    #[test]
    fn gateway_cycle_presence_agrees(spec in arbitrary_spec()) {
        let gw: Vec<_> = spec.ids().filter(|&x| spec.kind(x).is_gateway()).collect();
        // a gateway cycle exists iff some gateway flow (x,y) closes back through gateways
        let mut g = vec![vec![false; spec.len()]; spec.len()];
        for &x in &gw { for &y in &gw { if spec.has_flow(x, y) { g[x.0][y.0] = true; } } }
        for k in 0..spec.len() { for i in 0..spec.len() { if g[i][k] { for j in 0..spec.len() { if g[k][j] { g[i][j] = true; } } } } }
        let cyclic = gw.iter().any(|x| g[x.0][x.0]);
        prop_assert_eq!(tempohorn::wellformed::gateway_only_cycle(&spec).is_some(), cyclic);
        let n7 = check_well_formed(&spec).iter().filter(|v| v.condition == Condition::Numbered(7)).count();
        prop_assert_eq!(n7 > 0, cyclic);
    }
}
