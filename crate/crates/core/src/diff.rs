//! Pseudo-differences, consonance, complete normality and closedness.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::lattice::{Elem, FiniteDistLattice, LatticeHom};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
    Pending,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub witness: Value,
}

impl Report {
    pub fn pass(check: &str, witness: Value) -> Self {
        Report { check: check.into(), status: Status::Pass, witness }
    }

    pub fn fail(check: &str, witness: Value) -> Self {
        Report { check: check.into(), status: Status::Fail, witness }
    }
}

/// Tuple scans are exhaustive up to `exhaustive_cap` tuples, then `samples`
/// tuples are drawn from a generator seeded with `seed`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckConfig {
    pub exhaustive_cap: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { exhaustive_cap: 1 << 24, samples: 1 << 16, seed: 1 }
    }
}

impl CheckConfig {
    fn meta(&self, n: usize, arity: u32) -> Value {
        json!({"exhaustive": self.is_exhaustive(n, arity), "cap": self.exhaustive_cap, "seed": self.seed})
    }

    fn is_exhaustive(&self, n: usize, arity: u32) -> bool {
        (n as u128).pow(arity) <= self.exhaustive_cap as u128
    }

    /// Index tuples to scan, all of them or a seeded sample.
    fn tuples(&self, n: usize, arity: u32) -> Box<dyn Iterator<Item = Vec<usize>>> {
        if self.is_exhaustive(n, arity) {
            let total = n.pow(arity);
            Box::new((0..total).map(move |mut t| {
                let mut v = vec![0; arity as usize];
                for slot in v.iter_mut().rev() {
                    *slot = t % n;
                    t /= n;
                }
                v
            }))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let samples = self.samples;
            Box::new((0..samples).map(move |_| (0..arity).map(|_| rng.random_range(0..n)).collect()))
        }
    }
}

/// `{x : a ≤ b ∨ x}`.
pub fn ominus_filter(l: &FiniteDistLattice, a: Elem, b: Elem) -> Vec<Elem> {
    l.elements().iter().copied().filter(|&x| a.leq(b.join(x))).collect()
}

/// Least element of [`ominus_filter`].
pub fn pseudo_diff(l: &FiniteDistLattice, a: Elem, b: Elem) -> Elem {
    l.pseudo_diff(a, b)
}

/// A binary operation on a lattice, tabulated by element index.
#[derive(Clone, Debug)]
pub struct DiffTable {
    pub lattice: Arc<FiniteDistLattice>,
    table: Vec<Elem>,
}

impl DiffTable {
    pub fn pseudo(l: Arc<FiniteDistLattice>) -> Self {
        Self::from_fn(l.clone(), |a, b| l.pseudo_diff(a, b))
    }

    pub fn from_fn(l: Arc<FiniteDistLattice>, f: impl Fn(Elem, Elem) -> Elem) -> Self {
        let es = l.elements();
        let table = es.iter().flat_map(|&a| es.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect();
        DiffTable { lattice: l, table }
    }

    pub fn get(&self, a: Elem, b: Elem) -> Elem {
        let n = self.lattice.len();
        self.table[self.lattice.index_of(a) * n + self.lattice.index_of(b)]
    }

    pub fn set(&mut self, a: Elem, b: Elem, v: Elem) {
        let n = self.lattice.len();
        let i = self.lattice.index_of(a) * n + self.lattice.index_of(b);
        self.table[i] = v;
    }
}

/// Checks (D0)–(D2), the triangle inequality, monotonicity and the
/// join-irreducible decomposition, reporting the first violation.
pub fn check_difference_axioms(d: &DiffTable, cfg: &CheckConfig) -> Report {
    const CHECK: &str = "difference-axioms";
    let l = &*d.lattice;
    let es = l.elements();
    let n = es.len();
    let nm = |e: Elem| l.name(e).to_string();
    for &x in es {
        if !d.get(x, x).is_zero() {
            return Report::fail(CHECK, json!({"axiom": "D0", "x": nm(x), "value": nm(d.get(x, x))}));
        }
    }
    for t in cfg.tuples(n, 3) {
        let (x, y, z) = (es[t[0]], es[t[1]], es[t[2]]);
        if z.leq(y) && y.leq(x) {
            let rhs = d.get(x, y).join(d.get(y, z));
            if d.get(x, z) != rhs {
                return Report::fail(CHECK, json!({"axiom": "D1", "x": nm(x), "y": nm(y), "z": nm(z),
                    "lhs": nm(d.get(x, z)), "rhs": nm(rhs)}));
            }
        }
        if !d.get(x, z).leq(d.get(x, y).join(d.get(y, z))) {
            return Report::fail(CHECK, json!({"axiom": "triangle", "x": nm(x), "y": nm(y), "z": nm(z)}));
        }
    }
    for t in cfg.tuples(n, 2) {
        let (x, y) = (es[t[0]], es[t[1]]);
        let v = d.get(x, y);
        if v != d.get(x.join(y), y) || v != d.get(x, x.meet(y)) {
            return Report::fail(CHECK, json!({"axiom": "D2", "x": nm(x), "y": nm(y)}));
        }
        let decomposed = l.join_all(
            (0..l.ji_count())
                .filter(|&p| l.ji(p).leq(x) && !l.ji(p).leq(y))
                .map(|p| d.get(l.ji(p), l.lower_cover(p))),
        );
        if v != decomposed {
            return Report::fail(CHECK, json!({"axiom": "decomposition", "a": nm(x), "b": nm(y),
                "lhs": nm(v), "rhs": nm(decomposed)}));
        }
    }
    for t in cfg.tuples(n, 3) {
        let (x1, x2, y) = (es[t[0]], es[t[1]], es[t[2]]);
        if x1.leq(x2) && (!d.get(x1, y).leq(d.get(x2, y)) || !d.get(y, x2).leq(d.get(y, x1))) {
            return Report::fail(CHECK, json!({"axiom": "monotonicity", "x1": nm(x1), "x2": nm(x2), "y": nm(y)}));
        }
    }
    Report::pass(CHECK, cfg.meta(n, 3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consonance {
    /// `a ≤ b ∨ x`, `b ≤ a ∨ y` and `x ∧ y = 0`.
    Consonant { x: Elem, y: Elem },
    /// `(a ∖ b) ∧ (b ∖ a)`, which is nonzero.
    Dissonant { overlap: Elem },
}

impl Consonance {
    pub fn holds(self) -> bool {
        matches!(self, Consonance::Consonant { .. })
    }
}

pub fn is_consonant(l: &FiniteDistLattice, a: Elem, b: Elem) -> Consonance {
    let (x, y) = (l.pseudo_diff(a, b), l.pseudo_diff(b, a));
    if x.meet(y).is_zero() {
        Consonance::Consonant { x, y }
    } else {
        Consonance::Dissonant { overlap: x.meet(y) }
    }
}

/// First non-consonant pair in element order, if any.
pub fn cn_failure(l: &FiniteDistLattice) -> Option<(Elem, Elem)> {
    let es = l.elements();
    for (i, &a) in es.iter().enumerate() {
        for &b in &es[i + 1..] {
            if !is_consonant(l, a, b).holds() {
                return Some((a, b));
            }
        }
    }
    None
}

pub fn is_completely_normal(l: &FiniteDistLattice) -> bool {
    cn_failure(l).is_none()
}

/// First non-consonant pair inside a subset of `l`.
pub fn consonance_failure_in(l: &FiniteDistLattice, subset: &[Elem]) -> Option<(Elem, Elem)> {
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            if !is_consonant(l, a, b).holds() {
                return Some((a, b));
            }
        }
    }
    None
}

struct IdentityScan {
    check: &'static str,
    failure: Option<Value>,
    unmet: Option<Value>,
}

impl IdentityScan {
    fn new(check: &'static str) -> Self {
        IdentityScan { check, failure: None, unmet: None }
    }

    fn record(&mut self, hypothesis: bool, conclusion: bool, witness: impl FnOnce() -> Value) {
        if conclusion {
            return;
        }
        if hypothesis {
            if self.failure.is_none() {
                self.failure = Some(witness());
            }
        } else if self.unmet.is_none() {
            self.unmet = Some(witness());
        }
    }

    fn report(self, meta: Value) -> Report {
        match (self.failure, self.unmet) {
            (Some(w), _) => Report::fail(self.check, w),
            (None, Some(w)) => Report { check: self.check.into(), status: Status::HypothesisNotMet, witness: w },
            (None, None) => Report::pass(self.check, meta),
        }
    }
}

/// Verifies the distribution identities of `∖`, the disjointness lemma and
/// the difference comparison lemma over all applicable tuples.
pub fn check_consonance_lemmas(l: &FiniteDistLattice, cfg: &CheckConfig) -> Vec<Report> {
    let es = l.elements();
    let n = es.len();
    let d = |a: Elem, b: Elem| l.pseudo_diff(a, b);
    let cons = |a: Elem, b: Elem| is_consonant(l, a, b).holds();
    let nm = |e: Elem| l.name(e).to_string();
    let mut join_left = IdentityScan::new("join-left-distributes");
    let mut meet_right = IdentityScan::new("meet-right-distributes");
    let mut meet_left = IdentityScan::new("meet-left-under-consonance");
    let mut join_right = IdentityScan::new("join-right-under-consonance");
    for t in cfg.tuples(n, 3) {
        let (u, v, w) = (es[t[0]], es[t[1]], es[t[2]]);
        let trip = || json!([nm(u), nm(v), nm(w)]);
        join_left.record(true, d(u.join(v), w) == d(u, w).join(d(v, w)), trip);
        meet_right.record(true, d(u, v.meet(w)) == d(u, v).join(d(u, w)), trip);
        meet_left.record(cons(u, v), d(u.meet(v), w) == d(u, w).meet(d(v, w)), trip);
        join_right.record(cons(v, w), d(u, v.join(w)) == d(u, v).meet(d(u, w)), trip);
    }
    let mut disjoint = IdentityScan::new("disjointness");
    let mut comparison = IdentityScan::new("difference-comparison");
    for t in cfg.tuples(n, 4) {
        let (a1, a2, b1, b2) = (es[t[0]], es[t[1]], es[t[2]], es[t[3]]);
        let quad = || json!([nm(a1), nm(a2), nm(b1), nm(b2)]);
        if a1.meet(a2).leq(b1.meet(b2)) {
            disjoint.record(cons(a1, a2), d(a1, b1).meet(d(a2, b2)).is_zero(), quad);
        }
        if a1.leq(b1.join(a2)) && a1.meet(b2).leq(b1) {
            comparison.record(true, d(a1, b1).leq(d(a2, b2)), quad);
        }
    }
    let m3 = cfg.meta(n, 3);
    let m4 = cfg.meta(n, 4);
    vec![
        join_left.report(m3.clone()),
        meet_right.report(m3.clone()),
        meet_left.report(m3.clone()),
        join_right.report(m3),
        disjoint.report(m4.clone()),
        comparison.report(m4),
    ]
}

/// First `(a0, a1, b)` in element order with `f(a0) ≤ f(a1) ∨ b` but no
/// `x` satisfying `a0 ≤ a1 ∨ x` and `f(x) ≤ b`.
pub fn closure_defect(f: &LatticeHom) -> Option<(Elem, Elem, Elem)> {
    let s = &f.source;
    let t = &f.target;
    for &a0 in s.elements() {
        for &a1 in s.elements() {
            let xs: Vec<Elem> = ominus_filter(s, a0, a1).into_iter().map(|x| f.apply(x)).collect();
            for &b in t.elements() {
                if f.apply(a0).leq(f.apply(a1).join(b)) && !xs.iter().any(|fx| fx.leq(b)) {
                    return Some((a0, a1, b));
                }
            }
        }
    }
    None
}

pub fn is_closed_hom(f: &LatticeHom) -> bool {
    closure_defect(f).is_none()
}

/// Closedness read off the join-irreducibles of the source: a
/// homomorphism is closed iff `f(p) ∖ f(p†) = f(p)` for every
/// join-irreducible `p`. Returns the defect `(p, p†, f(p) ∖ f(p†))`.
pub fn closure_defect_at_join_irreducibles(f: &LatticeHom) -> Option<(Elem, Elem, Elem)> {
    let s = &f.source;
    (0..s.ji_count()).find_map(|i| {
        let (p, pd) = (s.ji(i), s.dagger(i));
        let b = f.target.pseudo_diff(f.apply(p), f.apply(pd));
        (b != f.apply(p)).then_some((p, pd, b))
    })
}
