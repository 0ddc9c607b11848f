//! Predicate merging by partition refinement.
//!
//! Two predicates of one class must have bodies that coincide after the
//! current renaming is applied and the clauses are brought into canonical
//! form. Refinement starts from one class per arity and splits until stable.
//! Clauses whose local variables cannot be projected away exactly keep their
//! predicate in a class of its own.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::chc::{Atom, ClauseSet, Head, HornClause, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimizeError {
    #[error("clause is not in pure form: {0}")]
    NotPure(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Orders `new10` after `new9`: a non-numeric prefix, then the trailing
/// number compared as an integer.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let i = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (p, n) = s.split_at(i);
        (p.to_string(), n.parse::<u128>().ok(), n.len())
    };
    split(a).cmp(&split(b)).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Each class sorted with its representative first.
    classes: Vec<Vec<String>>,
}

impl Partition {
    /// Classes are sorted naturally; the least member represents the class.
    pub fn new(classes: Vec<Vec<String>>) -> Self {
        let mut classes: Vec<Vec<String>> = classes
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort_by(|a, b| natural_cmp(a, b));
                c.dedup();
                c
            })
            .collect();
        classes.sort_by(|a, b| natural_cmp(&a[0], &b[0]));
        Partition { classes }
    }

    /// Same classes, representatives chosen by `pick` among the members.
    pub fn with_representatives(&self, pick: impl Fn(&[String]) -> String) -> Self {
        let classes = self
            .classes
            .iter()
            .map(|c| {
                let r = pick(c);
                let mut out = vec![r.clone()];
                out.extend(c.iter().filter(|p| **p != r).cloned());
                out
            })
            .collect();
        Partition { classes }
    }

    pub fn classes(&self) -> &[Vec<String>] {
        &self.classes
    }

    pub fn representative(&self, p: &str) -> Option<&str> {
        self.classes
            .iter()
            .find(|c| c.iter().any(|q| q == p))
            .map(|c| c[0].as_str())
    }

    /// The renaming: every predicate to its class representative.
    pub fn renaming(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for c in &self.classes {
            for p in c {
                m.insert(p.clone(), c[0].clone());
            }
        }
        m
    }

    pub fn is_discrete(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }

    /// Non-singleton classes, for reporting.
    pub fn merged(&self) -> impl Iterator<Item = &Vec<String>> {
        self.classes.iter().filter(|c| c.len() > 1)
    }

    fn validate(&self, set: &ClauseSet) -> Result<(), MinimizeError> {
        let preds: BTreeSet<&str> = set.predicates().map(|(p, _)| p).collect();
        let mut seen = BTreeSet::new();
        for c in &self.classes {
            for p in c {
                if !preds.contains(p.as_str()) {
                    return Err(MinimizeError::InvalidPartition(format!(
                        "`{p}` is not a predicate of the clause set"
                    )));
                }
                if !seen.insert(p.as_str()) {
                    return Err(MinimizeError::InvalidPartition(format!(
                        "`{p}` is in two classes"
                    )));
                }
            }
            if c.iter().any(|p| set.arity(p) != set.arity(&c[0])) {
                return Err(MinimizeError::InvalidPartition(format!(
                    "class of `{}` mixes arities",
                    c[0]
                )));
            }
        }
        if let Some(p) = preds.iter().find(|p| !seen.contains(*p)) {
            return Err(MinimizeError::InvalidPartition(format!(
                "`{p}` is in no class"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            writeln!(f, "{}", c.join(" "))?;
        }
        Ok(())
    }
}

fn check_pure(set: &ClauseSet) -> Result<(), MinimizeError> {
    match set.clauses().iter().find(|c| !c.is_pure()) {
        Some(c) => Err(MinimizeError::NotPure(c.to_string())),
        None => Ok(()),
    }
}

/// Canonical text of `c` with body predicates replaced through `label`, or
/// `None` when some local variable cannot be eliminated exactly.
fn canonical_body(c: &HornClause, label: &BTreeMap<&str, String>) -> Option<String> {
    let relabel = |a: &Atom| Atom::new(label[a.pred.as_str()].clone(), a.args.clone());
    let head = match &c.head {
        Head::Pred(a) => Head::Pred(Atom::new("h", a.args.clone())),
        Head::False => Head::False,
    };
    let body: Vec<Atom> = c.body.iter().map(relabel).collect();
    let mut keep: BTreeSet<Var> = head
        .atom()
        .map(|a| a.vars().cloned().collect())
        .unwrap_or_default();
    for a in &body {
        keep.extend(a.vars().cloned());
    }
    let proj = c.constraint.project(&keep);
    if !proj.exact {
        return None;
    }
    // atoms sharing a label can be matched in any order; take the least text
    let mut best: Option<String> = None;
    let mut order: Vec<usize> = (0..body.len()).collect();
    let tied = body.len() <= 6;
    loop {
        let atoms: Vec<Atom> = order.iter().map(|&i| body[i].clone()).collect();
        let text = HornClause::new(head.clone(), proj.constraint.clone(), atoms)
            .normalize()
            .to_string();
        if best.as_ref().is_none_or(|b| text < *b) {
            best = Some(text);
        }
        if !tied || !next_permutation(&mut order) {
            break;
        }
    }
    best
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Sorted canonical bodies of `p`; a body that cannot be made canonical
/// makes the signature unique to `p`.
fn signature(set: &ClauseSet, p: &str, label: &BTreeMap<&str, String>) -> Vec<String> {
    let mut sig = Vec::new();
    for c in set.clauses_for(p) {
        match canonical_body(c, label) {
            Some(s) => sig.push(s),
            None => return vec![format!("\u{0}{p}")],
        }
    }
    sig.sort();
    sig
}

fn labels(classes: &[Vec<String>]) -> BTreeMap<&str, String> {
    let mut m = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        for p in c {
            m.insert(p.as_str(), format!("c{i}"));
        }
    }
    m
}

/// Whether `p` and `q` have matching bodies once `e` is applied.
pub fn bodies_equivalent(p: &str, q: &str, e: &Partition, set: &ClauseSet) -> bool {
    if set.arity(p) != set.arity(q) {
        return false;
    }
    let label = labels(e.classes());
    signature(set, p, &label) == signature(set, q, &label)
}

/// Coarsest partition whose classes have pairwise matching bodies.
pub fn coarsest_cp_equivalence(set: &ClauseSet) -> Result<Partition, MinimizeError> {
    check_pure(set)?;
    let mut by_arity: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (p, k) in set.predicates() {
        by_arity.entry(k).or_default().push(p.to_string());
    }
    let mut classes: Vec<Vec<String>> = by_arity.into_values().collect();
    loop {
        let label = labels(&classes);
        let mut next = Vec::new();
        for c in &classes {
            let mut groups: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
            for p in c {
                groups
                    .entry(signature(set, p, &label))
                    .or_default()
                    .push(p.clone());
            }
            next.extend(groups.into_values());
        }
        if next.len() == classes.len() {
            return Ok(Partition::new(next));
        }
        classes = next;
    }
}

/// Drops clauses of non-representatives, renames every atom to its
/// representative and removes duplicate clauses.
pub fn apply_renaming(set: &ClauseSet, e: &Partition) -> Result<ClauseSet, MinimizeError> {
    check_pure(set)?;
    e.validate(set)?;
    let pi = e.renaming();
    let mut out: Vec<HornClause> = Vec::new();
    for c in set.clauses() {
        if let Some(p) = c.head_pred() {
            if pi[p] != p {
                continue;
            }
        }
        let rn = |a: &Atom| Atom::new(pi[&a.pred].clone(), a.args.clone());
        let head = match &c.head {
            Head::Pred(a) => Head::Pred(rn(a)),
            Head::False => Head::False,
        };
        let n = HornClause::new(head, c.constraint.clone(), c.body.iter().map(rn).collect())
            .normalize();
        if !out.contains(&n) {
            out.push(n);
        }
    }
    Ok(ClauseSet::new(out).expect("renaming keeps arities"))
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub partition: Partition,
    pub clauses: ClauseSet,
}

pub fn minimize(set: &ClauseSet) -> Result<Minimized, MinimizeError> {
    let partition = coarsest_cp_equivalence(set)?;
    let clauses = apply_renaming(set, &partition)?;
    Ok(Minimized { partition, clauses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clauses;
    use crate::fixtures;

    fn fixture() -> ClauseSet {
        parse_clauses(fixtures::REMOVAL_OUTPUT)
            .unwrap()
            .normalized()
    }

    #[test]
    fn natural_order() {
        assert_eq!(natural_cmp("new9", "new10"), Ordering::Less);
        assert_eq!(natural_cmp("new44", "new10"), Ordering::Greater);
        assert_eq!(natural_cmp("a", "b"), Ordering::Less);
    }

    #[test]
    fn arity_split() {
        let s = parse_clauses("p(A) :- A=0.\nq(A,B) :- A=0, B=0.\n").unwrap();
        let e = coarsest_cp_equivalence(&s).unwrap();
        assert_eq!(e.classes(), [vec!["p".to_string()], vec!["q".to_string()]]);
    }

    #[test]
    fn copies_merge() {
        let s = parse_clauses(
            "p(A,B) :- A=0, B=0.\np(A,B) :- A>0, C=A-1, p(C,B).\n\
             q(X,Y) :- Y=0, X=0.\nq(X,Y) :- X>=1, Z=X-1, q(Z,Y).\n\
             false :- A>0, p(A,B), q(B,A).\n",
        )
        .unwrap();
        let m = minimize(&s).unwrap();
        assert_eq!(
            m.partition.classes(),
            [vec!["p".to_string(), "q".to_string()]]
        );
        assert_eq!(m.clauses.len(), 3);
        assert!(m.clauses.to_string().contains("p(B,A)"));
    }

    #[test]
    fn pairs_from_listing() {
        let s = fixture();
        let e = Partition::new(s.predicates().map(|(p, _)| vec![p.to_string()]).collect());
        let merged = Partition::new(vec![
            vec![
                "new44".into(),
                "new17".into(),
                "new11".into(),
                "new10".into(),
            ],
            vec!["new7".into(), "new6".into()],
            vec!["new5".into(), "new4".into()],
        ]);
        assert!(bodies_equivalent("new44", "new10", &merged, &s));
        assert!(bodies_equivalent("new7", "new6", &merged, &s));
        assert!(!bodies_equivalent("new1", "new21", &e, &s));
        // new7 calls new11 where new6 calls new17
        assert!(!bodies_equivalent("new7", "new6", &e, &s));
    }

    #[test]
    fn listing_partition() {
        let e = coarsest_cp_equivalence(&fixture()).unwrap();
        let merged: Vec<&Vec<String>> = e.merged().collect();
        assert_eq!(
            merged,
            [
                &vec!["new4".to_string(), "new5".into()],
                &vec!["new6".to_string(), "new7".into()],
                &vec![
                    "new10".to_string(),
                    "new11".into(),
                    "new17".into(),
                    "new44".into()
                ],
            ]
        );
        assert_eq!(e.classes().len(), 8);
    }

    #[test]
    fn minimizing_twice_changes_nothing() {
        let m = minimize(&fixture()).unwrap();
        let again = minimize(&m.clauses).unwrap();
        assert!(again.partition.is_discrete());
        assert_eq!(again.clauses, m.clauses);
    }

    #[test]
    fn rejects_bad_partitions() {
        let s = fixture();
        let missing = Partition::new(vec![vec!["new1".into()]]);
        assert!(matches!(
            apply_renaming(&s, &missing),
            Err(MinimizeError::InvalidPartition(_))
        ));
        let impure = parse_clauses("p(A,A) :- A=0.\n").unwrap();
        assert!(matches!(
            coarsest_cp_equivalence(&impure),
            Err(MinimizeError::NotPure(_))
        ));
    }
}
