//! Linear integer constraints: canonical normalization, satisfiability and
//! variable elimination.
//!
//! The normal form writes every conjunct as `e >= 0`, `e = 0` or `e != 0`,
//! where `e` is a gcd-reduced integer polynomial. Strict inequalities are
//! tightened (`e > 0` becomes `e - 1 >= 0`), which is exact over the integers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A named integer variable. Variables are ordered by name; that order is the
/// global variable order used by the canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

/// Integer polynomial `sum(c_i * x_i) + k`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    terms: BTreeMap<Var, i64>,
    constant: i64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(k: i64) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: k,
        }
    }

    pub fn var(v: impl Into<Var>) -> Self {
        LinExpr::term(v, 1)
    }

    pub fn term(v: impl Into<Var>, coeff: i64) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v.into(), coeff);
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Var, i64)> {
        self.terms.iter().map(|(v, c)| (v, *c))
    }

    pub fn const_term(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, v: &Var) -> i64 {
        self.terms.get(v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, v: Var, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let slot = self.terms.entry(v.clone()).or_insert(0);
        *slot += coeff;
        if *slot == 0 {
            self.terms.remove(&v);
        }
    }

    pub fn add_const(&mut self, k: i64) {
        self.constant += k;
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in other.terms() {
            out.add_term(v.clone(), c);
        }
        out.constant += other.constant;
        out
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scaled(-1))
    }

    pub fn scaled(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    /// Replace `v` by `e` everywhere.
    pub fn substitute(&self, v: &Var, e: &LinExpr) -> LinExpr {
        match self.terms.get(v) {
            None => self.clone(),
            Some(&c) => {
                let mut rest = self.clone();
                rest.terms.remove(v);
                rest.plus(&e.scaled(c))
            }
        }
    }

    /// Rename variables through `f`; colliding images are summed.
    pub fn rename(&self, mut f: impl FnMut(&Var) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, c) in self.terms() {
            out.add_term(f(v), c);
        }
        out
    }

    pub fn eval(&self, mut value: impl FnMut(&Var) -> i64) -> i64 {
        self.terms.iter().map(|(v, c)| c * value(v)).sum::<i64>() + self.constant
    }

    fn content(&self) -> i64 {
        self.terms.values().fold(0, |g, &c| gcd(g, c))
    }

    /// Leading (least variable) coefficient, if any.
    fn leading(&self) -> Option<i64> {
        self.terms.values().next().copied()
    }

    fn var_part(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.clone(),
            constant: 0,
        }
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in self.terms() {
            write_term(f, &mut first, c, Some(v))?;
        }
        if self.constant != 0 || first {
            write_term(f, &mut first, self.constant, None)?;
        }
        Ok(())
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    first: &mut bool,
    c: i64,
    v: Option<&Var>,
) -> fmt::Result {
    let sign = if c < 0 {
        "-"
    } else if *first {
        ""
    } else {
        "+"
    };
    let mag = c.unsigned_abs();
    match v {
        Some(v) if mag == 1 => write!(f, "{sign}{v}")?,
        Some(v) => write!(f, "{sign}{mag}*{v}")?,
        None => write!(f, "{sign}{mag}")?,
    }
    *first = false;
    Ok(())
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Relation of a conjunct `e R 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ge,
    Ne,
    Le,
    Lt,
    Gt,
}

impl Rel {
    pub fn holds(self, v: i64) -> bool {
        match self {
            Rel::Eq => v == 0,
            Rel::Ne => v != 0,
            Rel::Ge => v >= 0,
            Rel::Le => v <= 0,
            Rel::Gt => v > 0,
            Rel::Lt => v < 0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "=\\=",
            Rel::Ge => ">=",
            Rel::Le => "=<",
            Rel::Gt => ">",
            Rel::Lt => "<",
        }
    }
}

/// Atomic constraint `expr rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunct {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Conjunct {
    /// `lhs rel rhs`.
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Self {
        Conjunct {
            expr: lhs.minus(&rhs),
            rel,
        }
    }

    pub fn holds(&self, value: impl FnMut(&Var) -> i64) -> bool {
        self.rel.holds(self.expr.eval(value))
    }

    fn ge(expr: LinExpr) -> Self {
        Conjunct { expr, rel: Rel::Ge }
    }

    fn eq(expr: LinExpr) -> Self {
        Conjunct { expr, rel: Rel::Eq }
    }
}

impl fmt::Display for Conjunct {
    /// Prolog-style rendering with positive terms on the left, e.g. `E=A+B`,
    /// `A>=1`, `D=<6`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs = LinExpr::zero();
        let mut rhs = LinExpr::constant(-self.expr.constant);
        for (v, c) in self.expr.terms() {
            if c > 0 {
                lhs.add_term(v.clone(), c);
            } else {
                rhs.add_term(v.clone(), -c);
            }
        }
        let mut rel = self.rel;
        if lhs.is_constant() && !rhs.is_constant() {
            // -A + 6 >= 0 reads better as A =< 6
            let k = rhs.constant;
            rhs.constant = 0;
            lhs = rhs;
            rhs = LinExpr::constant(-k);
            rel = match rel {
                Rel::Ge => Rel::Le,
                Rel::Le => Rel::Ge,
                Rel::Gt => Rel::Lt,
                Rel::Lt => Rel::Gt,
                r => r,
            };
        }
        write!(f, "{lhs}{}{rhs}", rel.symbol())
    }
}

/// Conjunction of atomic constraints. The empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearConstraint {
    conjuncts: Vec<Conjunct>,
}

impl LinearConstraint {
    pub fn truth() -> Self {
        LinearConstraint::default()
    }

    /// Canonical unsatisfiable constraint `-1 >= 0`.
    pub fn falsum() -> Self {
        LinearConstraint {
            conjuncts: vec![Conjunct::ge(LinExpr::constant(-1))],
        }
    }

    pub fn from_conjuncts(conjuncts: impl IntoIterator<Item = Conjunct>) -> Self {
        LinearConstraint {
            conjuncts: conjuncts.into_iter().collect(),
        }
    }

    pub fn conjuncts(&self) -> &[Conjunct] {
        &self.conjuncts
    }

    pub fn push(&mut self, c: Conjunct) {
        self.conjuncts.push(c);
    }

    pub fn and(&self, other: &LinearConstraint) -> LinearConstraint {
        let mut out = self.clone();
        out.conjuncts.extend(other.conjuncts.iter().cloned());
        out
    }

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Syntactically the canonical `false`.
    pub fn is_falsum(&self) -> bool {
        self.conjuncts.len() == 1
            && self.conjuncts[0].expr.is_constant()
            && !self.conjuncts[0].rel.holds(self.conjuncts[0].expr.constant)
    }

    /// True when no `!=` conjunct is present.
    pub fn is_convex(&self) -> bool {
        self.conjuncts.iter().all(|c| c.rel != Rel::Ne)
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.conjuncts
            .iter()
            .flat_map(|c| c.expr.vars().cloned())
            .collect()
    }

    pub fn holds(&self, mut value: impl FnMut(&Var) -> i64) -> bool {
        self.conjuncts.iter().all(|c| c.holds(&mut value))
    }

    pub fn substitute(&self, v: &Var, e: &LinExpr) -> LinearConstraint {
        LinearConstraint {
            conjuncts: self
                .conjuncts
                .iter()
                .map(|c| Conjunct {
                    expr: c.expr.substitute(v, e),
                    rel: c.rel,
                })
                .collect(),
        }
    }

    pub fn rename(&self, mut f: impl FnMut(&Var) -> Var) -> LinearConstraint {
        LinearConstraint {
            conjuncts: self
                .conjuncts
                .iter()
                .map(|c| Conjunct {
                    expr: c.expr.rename(&mut f),
                    rel: c.rel,
                })
                .collect(),
        }
    }

    /// Canonical form: only `>=`, `=` and `!=` conjuncts, gcd-reduced with
    /// integer tightening, equalities and disequalities with a positive
    /// leading coefficient, parallel inequalities merged, sorted, deduplicated.
    pub fn normalize(&self) -> LinearConstraint {
        let mut set = BTreeSet::new();
        for c in &self.conjuncts {
            match basic_form(c) {
                Basic::True => {}
                Basic::False => return LinearConstraint::falsum(),
                Basic::Keep(c) => {
                    set.insert(c);
                }
            }
        }
        match simplify(set) {
            Some(set) => LinearConstraint {
                conjuncts: set.into_iter().collect(),
            },
            None => LinearConstraint::falsum(),
        }
    }

    /// Split every `!=` conjunct into `<` and `>`; returns the convex cases.
    pub fn split_disequalities(&self) -> Vec<LinearConstraint> {
        let mut cases = vec![LinearConstraint::truth()];
        for c in &self.conjuncts {
            if c.rel == Rel::Ne {
                let mut next = Vec::with_capacity(cases.len() * 2);
                for case in &cases {
                    for rel in [Rel::Lt, Rel::Gt] {
                        let mut k = case.clone();
                        k.push(Conjunct {
                            expr: c.expr.clone(),
                            rel,
                        });
                        next.push(k);
                    }
                }
                cases = next;
            } else {
                for case in &mut cases {
                    case.push(c.clone());
                }
            }
        }
        cases
    }

    /// Integer satisfiability. Exact on unit-coefficient fragments (difference
    /// bounds plus equalities); elsewhere it may answer `true` for an
    /// unsatisfiable constraint, never the converse.
    pub fn is_satisfiable(&self) -> bool {
        let n = self.normalize();
        if n.is_falsum() {
            return false;
        }
        if !n.is_convex() {
            return n.split_disequalities().iter().any(|c| c.is_satisfiable());
        }
        let all: BTreeSet<Var> = n.vars();
        let projected = eliminate(n.conjuncts.into_iter().collect(), &all);
        !projected.constraint.is_falsum()
    }

    /// Existentially eliminate every variable not in `keep`.
    ///
    /// The result is always implied by `exists(eliminated). self`. It is
    /// flagged exact when each eliminated variable was removed either through
    /// a unit-coefficient equality or by a Fourier-Motzkin step in which every
    /// lower/upper bound pair has a unit coefficient on that variable; both are
    /// exact over the integers.
    pub fn project(&self, keep: &BTreeSet<Var>) -> Projection {
        let n = self.normalize();
        if n.is_falsum() {
            return Projection {
                constraint: n,
                exact: true,
            };
        }
        let mut exact = true;
        let mut conjuncts: BTreeSet<Conjunct> = BTreeSet::new();
        for c in n.conjuncts {
            if c.rel == Rel::Ne && c.expr.vars().any(|v| !keep.contains(v)) {
                // dropping a disequality only weakens
                exact = false;
            } else {
                conjuncts.insert(c);
            }
        }
        let drop: BTreeSet<Var> = conjuncts
            .iter()
            .flat_map(|c| c.expr.vars().cloned())
            .filter(|v| !keep.contains(v))
            .collect();
        let mut p = eliminate(conjuncts, &drop);
        p.exact &= exact;
        p
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjuncts.is_empty() {
            return f.write_str("true");
        }
        for (i, c) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Result of [`LinearConstraint::project`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub constraint: LinearConstraint,
    pub exact: bool,
}

enum Basic {
    True,
    False,
    Keep(Conjunct),
}

fn basic_form(c: &Conjunct) -> Basic {
    let (expr, rel) = match c.rel {
        Rel::Ge => (c.expr.clone(), Rel::Ge),
        Rel::Le => (c.expr.scaled(-1), Rel::Ge),
        Rel::Gt => {
            let mut e = c.expr.clone();
            e.add_const(-1);
            (e, Rel::Ge)
        }
        Rel::Lt => {
            let mut e = c.expr.scaled(-1);
            e.add_const(-1);
            (e, Rel::Ge)
        }
        Rel::Eq => (c.expr.clone(), Rel::Eq),
        Rel::Ne => (c.expr.clone(), Rel::Ne),
    };
    if expr.is_constant() {
        return if rel.holds(expr.constant) {
            Basic::True
        } else {
            Basic::False
        };
    }
    let g = expr.content();
    match rel {
        Rel::Ge => {
            let mut e = expr.var_part();
            e = divide(&e, g);
            e.constant = expr.constant.div_euclid(g);
            Basic::Keep(Conjunct::ge(e))
        }
        Rel::Eq | Rel::Ne => {
            if expr.constant % g != 0 {
                return if rel == Rel::Eq {
                    Basic::False
                } else {
                    Basic::True
                };
            }
            let mut e = divide(&expr, g);
            if e.leading().unwrap_or(1) < 0 {
                e = e.scaled(-1);
            }
            Basic::Keep(Conjunct { expr: e, rel })
        }
        _ => unreachable!(),
    }
}

fn divide(e: &LinExpr, g: i64) -> LinExpr {
    LinExpr {
        terms: e.terms.iter().map(|(v, c)| (v.clone(), c / g)).collect(),
        constant: e.constant / g,
    }
}

/// Sign-normalized variable part, plus the factor (+1/-1) applied.
fn oriented(e: &LinExpr) -> (LinExpr, i64) {
    let vp = e.var_part();
    if vp.leading().unwrap_or(1) < 0 {
        (vp.scaled(-1), -1)
    } else {
        (vp, 1)
    }
}

/// Merge parallel conjuncts to a fixpoint. `None` means unsatisfiable.
fn simplify(mut set: BTreeSet<Conjunct>) -> Option<BTreeSet<Conjunct>> {
    loop {
        // For every oriented variable part: tightest bounds and equalities.
        #[derive(Default)]
        struct Group {
            lower: Option<i64>, // vp >= lower
            upper: Option<i64>, // vp <= upper
            eq: Option<i64>,    // vp == value
            ne: BTreeSet<i64>,  // vp != value
        }
        let mut groups: BTreeMap<LinExpr, Group> = BTreeMap::new();
        for c in &set {
            let (vp, sign) = oriented(&c.expr);
            // c.expr = sign * vp + k, so c.expr R 0  <=>  sign*vp R -k
            let k = c.expr.constant;
            let g = groups.entry(vp).or_default();
            match (c.rel, sign) {
                (Rel::Ge, 1) => g.lower = Some(g.lower.map_or(-k, |l: i64| l.max(-k))),
                (Rel::Ge, _) => g.upper = Some(g.upper.map_or(k, |u: i64| u.min(k))),
                (Rel::Eq, _) => {
                    let v = -k * sign;
                    if g.eq.is_some_and(|e| e != v) {
                        return None;
                    }
                    g.eq = Some(v);
                }
                (Rel::Ne, _) => {
                    g.ne.insert(-k * sign);
                }
                _ => unreachable!("basic form only"),
            }
        }
        let mut out = BTreeSet::new();
        for (vp, mut g) in groups {
            if let (Some(l), Some(u)) = (g.lower, g.upper) {
                if l > u {
                    return None;
                }
                if l == u {
                    if g.eq.is_some_and(|e| e != l) {
                        return None;
                    }
                    g.eq = Some(l);
                }
            }
            if let Some(e) = g.eq {
                if g.lower.is_some_and(|l| e < l)
                    || g.upper.is_some_and(|u| e > u)
                    || g.ne.contains(&e)
                {
                    return None;
                }
                out.insert(Conjunct::eq(with_const(&vp, -e)));
                continue;
            }
            // a disequality at a bound tightens that bound
            let mut changed = true;
            while changed {
                changed = false;
                if let Some(l) = g.lower {
                    if g.ne.remove(&l) {
                        g.lower = Some(l + 1);
                        changed = true;
                    }
                }
                if let Some(u) = g.upper {
                    if g.ne.remove(&u) {
                        g.upper = Some(u - 1);
                        changed = true;
                    }
                }
            }
            if let (Some(l), Some(u)) = (g.lower, g.upper) {
                if l > u {
                    return None;
                }
            }
            if let Some(l) = g.lower {
                out.insert(Conjunct::ge(with_const(&vp, -l)));
            }
            if let Some(u) = g.upper {
                out.insert(Conjunct::ge(with_const(&vp.scaled(-1), u)));
            }
            for n in g.ne {
                if g.lower.is_some_and(|l| n < l) || g.upper.is_some_and(|u| n > u) {
                    continue;
                }
                out.insert(Conjunct {
                    expr: with_const(&vp, -n),
                    rel: Rel::Ne,
                });
            }
        }
        if out == set {
            return Some(out);
        }
        set = out;
    }
}

fn with_const(vp: &LinExpr, k: i64) -> LinExpr {
    let mut e = vp.clone();
    e.constant = k;
    e
}

/// Eliminate `drop` from a convex normalized conjunct set.
fn eliminate(mut set: BTreeSet<Conjunct>, drop: &BTreeSet<Var>) -> Projection {
    let mut exact = true;
    let mut pending: BTreeSet<Var> = drop.clone();
    while !pending.is_empty() {
        // 1. unit-coefficient equalities
        let unit = set.iter().find_map(|c| {
            if c.rel != Rel::Eq {
                return None;
            }
            c.expr
                .terms()
                .find(|(v, k)| pending.contains(*v) && k.abs() == 1)
                .map(|(v, k)| (c.clone(), v.clone(), k))
        });
        if let Some((c, v, k)) = unit {
            // k*v + rest = 0  =>  v = -rest/k
            let mut rest = c.expr.clone();
            rest.terms.remove(&v);
            let def = rest.scaled(-k);
            set.remove(&c);
            let next = set
                .iter()
                .map(|d| Conjunct {
                    expr: d.expr.substitute(&v, &def),
                    rel: d.rel,
                })
                .collect::<Vec<_>>();
            pending.remove(&v);
            match renormalize(next) {
                Some(s) => set = s,
                None => return Projection::falsum(exact),
            }
            continue;
        }
        // 2. Fourier-Motzkin on the cheapest remaining variable
        let v = pending
            .iter()
            .min_by_key(|v| {
                let lo = set.iter().filter(|c| c.expr.coeff(v) > 0).count();
                let hi = set.iter().filter(|c| c.expr.coeff(v) < 0).count();
                (lo * hi, v.name().len(), (*v).clone())
            })
            .cloned()
            .expect("pending is non-empty");
        pending.remove(&v);
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        let mut rest = Vec::new();
        for c in std::mem::take(&mut set) {
            let k = c.expr.coeff(&v);
            if k == 0 {
                rest.push(c);
                continue;
            }
            match c.rel {
                Rel::Ge if k > 0 => lowers.push(c.expr),
                Rel::Ge => uppers.push(c.expr),
                Rel::Eq => {
                    // non-unit equality: relax to two inequalities
                    exact = false;
                    if k > 0 {
                        lowers.push(c.expr.clone());
                        uppers.push(c.expr.scaled(-1));
                    } else {
                        uppers.push(c.expr.clone());
                        lowers.push(c.expr.scaled(-1));
                    }
                }
                _ => unreachable!("convex input"),
            }
        }
        for l in &lowers {
            for u in &uppers {
                let a = l.coeff(&v);
                let b = -u.coeff(&v);
                if a != 1 && b != 1 {
                    exact = false;
                }
                rest.push(Conjunct::ge(l.scaled(b).plus(&u.scaled(a))));
            }
        }
        match renormalize(rest) {
            Some(s) => set = s,
            None => return Projection::falsum(exact),
        }
    }
    Projection {
        constraint: LinearConstraint {
            conjuncts: set.into_iter().collect(),
        },
        exact,
    }
}

fn renormalize(cs: Vec<Conjunct>) -> Option<BTreeSet<Conjunct>> {
    let n = LinearConstraint { conjuncts: cs }.normalize();
    if n.is_falsum() {
        None
    } else {
        Some(n.conjuncts.into_iter().collect())
    }
}

impl Projection {
    fn falsum(exact: bool) -> Self {
        Projection {
            constraint: LinearConstraint::falsum(),
            exact,
        }
    }
}
