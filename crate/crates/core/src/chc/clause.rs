//! Atoms, Horn clauses and clause sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::linear::{Conjunct, LinExpr, LinearConstraint, Rel, Var};
use super::ChcError;

/// Atom argument: a variable or an integer constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
}

impl Term {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Int(_) => None,
        }
    }

    pub fn to_expr(&self) -> LinExpr {
        match self {
            Term::Var(v) => LinExpr::var(v.clone()),
            Term::Int(n) => LinExpr::constant(*n),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Pred(Atom),
    False,
}

impl Head {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Head::Pred(a) => Some(a),
            Head::False => None,
        }
    }
}

/// `head :- constraint, body`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HornClause {
    pub head: Head,
    pub constraint: LinearConstraint,
    pub body: Vec<Atom>,
}

impl HornClause {
    pub fn new(head: Head, constraint: LinearConstraint, body: Vec<Atom>) -> Self {
        HornClause {
            head,
            constraint,
            body,
        }
    }

    pub fn is_goal(&self) -> bool {
        matches!(self.head, Head::False)
    }

    pub fn head_pred(&self) -> Option<&str> {
        self.head.atom().map(|a| a.pred.as_str())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.constraint.vars();
        if let Some(h) = self.head.atom() {
            vs.extend(h.vars().cloned());
        }
        for a in &self.body {
            vs.extend(a.vars().cloned());
        }
        vs
    }

    /// Pure form: the head arguments are pairwise distinct variables.
    pub fn is_pure(&self) -> bool {
        match &self.head {
            Head::False => true,
            Head::Pred(a) => {
                let mut seen = BTreeSet::new();
                a.args.iter().all(|t| match t {
                    Term::Var(v) => seen.insert(v.clone()),
                    Term::Int(_) => false,
                })
            }
        }
    }

    pub fn rename(&self, mut f: impl FnMut(&Var) -> Var) -> HornClause {
        let mut rn = |t: &Term| match t {
            Term::Var(v) => Term::Var(f(v)),
            Term::Int(n) => Term::Int(*n),
        };
        let head = match &self.head {
            Head::False => Head::False,
            Head::Pred(a) => Head::Pred(Atom::new(
                a.pred.clone(),
                a.args.iter().map(&mut rn).collect(),
            )),
        };
        let body = self
            .body
            .iter()
            .map(|a| Atom::new(a.pred.clone(), a.args.iter().map(&mut rn).collect()))
            .collect();
        let mut g = |v: &Var| match rn(&Term::Var(v.clone())) {
            Term::Var(w) => w,
            Term::Int(_) => unreachable!(),
        };
        HornClause {
            head,
            constraint: self.constraint.rename(&mut g),
            body,
        }
    }

    /// Canonical pure form.
    ///
    /// Head arguments become distinct variables `A, B, C, ...` (repeated
    /// variables and constants are pushed into the body as equalities); body
    /// atom constants are lifted the same way; locals that are plain aliases of
    /// another variable are merged; locals occurring only in the constraint and
    /// defined by a unit equality are substituted away; the constraint is
    /// normalized; body atoms are sorted and locals renamed in order of first
    /// occurrence.
    pub fn normalize(&self) -> HornClause {
        let mut fresh = FreshVars::avoiding(self.vars());
        let mut extra: Vec<Conjunct> = Vec::new();

        // 1. purify head
        let mut head_vars: Vec<Var> = Vec::new();
        let head = match &self.head {
            Head::False => Head::False,
            Head::Pred(a) => {
                let mut seen = BTreeSet::new();
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match t {
                        Term::Var(v) if seen.insert(v.clone()) => {
                            args.push(Term::Var(v.clone()));
                            head_vars.push(v.clone());
                        }
                        other => {
                            let n = fresh.next();
                            extra.push(Conjunct::new(
                                LinExpr::var(n.clone()),
                                Rel::Eq,
                                other.to_expr(),
                            ));
                            args.push(Term::Var(n.clone()));
                            head_vars.push(n);
                        }
                    }
                }
                Head::Pred(Atom::new(a.pred.clone(), args))
            }
        };
        let head_set: BTreeSet<Var> = head_vars.iter().cloned().collect();

        // 2. lift body constants
        let mut body: Vec<Atom> = self
            .body
            .iter()
            .map(|a| {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(v.clone()),
                        Term::Int(n) => {
                            let x = fresh.next();
                            extra.push(Conjunct::new(
                                LinExpr::var(x.clone()),
                                Rel::Eq,
                                LinExpr::constant(*n),
                            ));
                            Term::Var(x)
                        }
                    })
                    .collect();
                Atom::new(a.pred.clone(), args)
            })
            .collect();
        let mut constraint = LinearConstraint::from_conjuncts(
            self.constraint.conjuncts().iter().cloned().chain(extra),
        )
        .normalize();

        // 3. merge aliases L = V where L is local
        loop {
            let alias = constraint.conjuncts().iter().find_map(|c| {
                if c.rel != Rel::Eq || c.expr.const_term() != 0 {
                    return None;
                }
                let ts: Vec<(&Var, i64)> = c.expr.terms().collect();
                if ts.len() != 2 || ts[0].1 != -ts[1].1 || ts[0].1.abs() != 1 {
                    return None;
                }
                let (a, b) = (ts[0].0.clone(), ts[1].0.clone());
                match (head_set.contains(&a), head_set.contains(&b)) {
                    (_, false) => Some((b, a)),
                    (false, true) => Some((a, b)),
                    (true, true) => None,
                }
            });
            let Some((local, target)) = alias else { break };
            constraint = constraint
                .substitute(&local, &LinExpr::var(target.clone()))
                .normalize();
            for a in &mut body {
                for t in &mut a.args {
                    if t.as_var() == Some(&local) {
                        *t = Term::Var(target.clone());
                    }
                }
            }
        }

        // 4. substitute unit-defined locals that occur only in the constraint
        let mut pinned: BTreeSet<Var> = head_set.clone();
        for a in &body {
            pinned.extend(a.vars().cloned());
        }
        loop {
            let def = constraint.conjuncts().iter().find_map(|c| {
                if c.rel != Rel::Eq {
                    return None;
                }
                c.expr
                    .terms()
                    .find(|(v, k)| !pinned.contains(*v) && k.abs() == 1)
                    .map(|(v, k)| {
                        let mut rest = c.expr.clone();
                        rest.add_term(v.clone(), -k);
                        (v.clone(), rest.scaled(-k))
                    })
            });
            let Some((v, e)) = def else { break };
            constraint = constraint.substitute(&v, &e).normalize();
        }

        // 5. canonical order and names
        body.sort_by(|a, b| a.pred.cmp(&b.pred).then(a.args.len().cmp(&b.args.len())));
        let mut names: HashMap<Var, Var> = HashMap::new();
        for (i, v) in head_vars.iter().enumerate() {
            names.insert(v.clone(), Var(var_name(i)));
        }
        let mut next = head_vars.len();
        let order = body
            .iter()
            .flat_map(|a| a.vars().cloned().collect::<Vec<_>>())
            .chain(
                constraint
                    .conjuncts()
                    .iter()
                    .flat_map(|c| c.expr.vars().cloned().collect::<Vec<_>>()),
            );
        for v in order {
            names.entry(v).or_insert_with(|| {
                let n = Var(var_name(next));
                next += 1;
                n
            });
        }
        let clause = HornClause {
            head,
            constraint,
            body,
        };
        let renamed = clause.rename(|v| names[v].clone());
        HornClause {
            constraint: renamed.constraint.normalize(),
            ..renamed
        }
    }
}

/// `A..Z`, then `A1..Z1`, ...
pub fn var_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

/// Generator of variable names not occurring in a given set.
pub struct FreshVars {
    taken: BTreeSet<Var>,
    counter: usize,
    prefix: &'static str,
}

impl FreshVars {
    pub fn avoiding(taken: BTreeSet<Var>) -> Self {
        FreshVars {
            taken,
            counter: 0,
            prefix: "_V",
        }
    }

    pub fn with_prefix(prefix: &'static str) -> Self {
        FreshVars {
            taken: BTreeSet::new(),
            counter: 0,
            prefix,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Var {
        loop {
            let v = Var(format!("{}{}", self.prefix, self.counter));
            self.counter += 1;
            if self.taken.insert(v.clone()) {
                return v;
            }
        }
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::False => f.write_str("false")?,
            Head::Pred(a) => write!(f, "{a}")?,
        }
        if self.constraint.is_empty() && self.body.is_empty() {
            return f.write_str(".");
        }
        f.write_str(" :- ")?;
        let mut first = true;
        for c in self.constraint.conjuncts() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        for a in &self.body {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

/// Ordered set of clauses with a per-predicate arity table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseSet {
    clauses: Vec<HornClause>,
    arity: BTreeMap<String, usize>,
    open: BTreeSet<String>,
}

impl ClauseSet {
    /// Builds the set, checking that every predicate is used with one arity.
    pub fn new(clauses: Vec<HornClause>) -> Result<Self, ChcError> {
        let mut arity: BTreeMap<String, usize> = BTreeMap::new();
        for cl in &clauses {
            for a in cl.head.atom().into_iter().chain(cl.body.iter()) {
                if a.pred == "false" || a.pred == "true" {
                    return Err(ChcError::ReservedPredicate(a.pred.clone()));
                }
                match arity.get(&a.pred) {
                    Some(&k) if k != a.arity() => {
                        return Err(ChcError::ArityMismatch {
                            pred: a.pred.clone(),
                            expected: k,
                            found: a.arity(),
                        })
                    }
                    _ => {
                        arity.insert(a.pred.clone(), a.arity());
                    }
                }
            }
        }
        let defined: BTreeSet<&str> = clauses.iter().filter_map(|c| c.head_pred()).collect();
        let open = arity
            .keys()
            .filter(|p| !defined.contains(p.as_str()))
            .cloned()
            .collect();
        Ok(ClauseSet {
            clauses,
            arity,
            open,
        })
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<HornClause> {
        self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.arity.get(pred).copied()
    }

    /// All predicate symbols, `false` excluded.
    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arity.iter().map(|(p, k)| (p.as_str(), *k))
    }

    /// Predicates that occur in bodies but have no defining clause. They are
    /// unconstrained (and may be interpreted as empty).
    pub fn open_predicates(&self) -> &BTreeSet<String> {
        &self.open
    }

    pub fn clauses_for<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a HornClause> + 'a {
        self.clauses
            .iter()
            .filter(move |c| c.head_pred() == Some(pred))
    }

    pub fn goals(&self) -> impl Iterator<Item = &HornClause> {
        self.clauses.iter().filter(|c| c.is_goal())
    }

    pub fn is_pure(&self) -> bool {
        self.clauses.iter().all(HornClause::is_pure)
    }

    /// Every clause in canonical pure form.
    pub fn normalized(&self) -> ClauseSet {
        ClauseSet {
            clauses: self.clauses.iter().map(HornClause::normalize).collect(),
            arity: self.arity.clone(),
            open: self.open.clone(),
        }
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
