//! Finite distributive lattices in Birkhoff form.
//!
//! A lattice is stored as the family of down-sets of its poset of
//! join-irreducibles. Each element is an [`Elem`] bitmask over at most 64
//! join-irreducibles, so join is union and meet is intersection.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_ELEMENT_CAP: usize = 1 << 20;
pub const MAX_JOIN_IRREDUCIBLES: usize = 64;

/// A down-set of join-irreducibles, bit `i` standing for the `i`-th one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(pub u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);

    pub fn join(self, other: Elem) -> Elem {
        Elem(self.0 | other.0)
    }

    pub fn meet(self, other: Elem) -> Elem {
        Elem(self.0 & other.0)
    }

    pub fn leq(self, other: Elem) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, ji: usize) -> bool {
        self.0 >> ji & 1 == 1
    }

    pub fn bits(self) -> impl Iterator<Item = usize> {
        let mut w = self.0;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let i = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i)
            }
        })
    }
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

#[derive(Clone, Debug)]
pub struct FiniteDistLattice {
    ji_labels: Vec<String>,
    /// Principal down-set of each join-irreducible, itself included.
    below: Vec<u64>,
    elems: Vec<Elem>,
    index: HashMap<Elem, usize>,
    names: Vec<String>,
}

impl PartialEq for FiniteDistLattice {
    fn eq(&self, other: &Self) -> bool {
        self.ji_labels == other.ji_labels && self.below == other.below
    }
}

impl FiniteDistLattice {
    /// Builds the lattice of down-sets of the poset generated by `order`,
    /// where `(p, q)` means `p < q`.
    pub fn from_ji_poset(labels: Vec<String>, order: &[(usize, usize)], cap: usize) -> Result<Self> {
        let k = labels.len();
        if k > MAX_JOIN_IRREDUCIBLES {
            return Err(Error::CapExceeded { what: format!("{k} join-irreducibles"), limit: MAX_JOIN_IRREDUCIBLES });
        }
        let mut below: Vec<u64> = (0..k).map(bit).collect();
        for &(p, q) in order {
            if p >= k || q >= k {
                return Err(Error::Input(format!("order pair ({p}, {q}) out of range")));
            }
            below[q] |= bit(p);
        }
        loop {
            let mut changed = false;
            for q in 0..k {
                let mut acc = below[q];
                for p in Elem(below[q]).bits() {
                    acc |= below[p];
                }
                if acc != below[q] {
                    below[q] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for p in 0..k {
            for q in 0..k {
                if p != q && below[q] & bit(p) != 0 && below[p] & bit(q) != 0 {
                    return Err(Error::Input(format!("order has a cycle through {} and {}", labels[p], labels[q])));
                }
            }
        }
        Self::from_below(labels, below, None, cap)
    }

    fn from_below(ji_labels: Vec<String>, below: Vec<u64>, names: Option<HashMap<Elem, String>>, cap: usize) -> Result<Self> {
        let k = below.len();
        let mut topo: Vec<usize> = (0..k).collect();
        topo.sort_by_key(|&i| (below[i].count_ones(), i));
        let strict: Vec<u64> = (0..k).map(|i| below[i] & !bit(i)).collect();
        let mut elems = Vec::new();
        let mut stack = vec![(0usize, 0u64)];
        while let Some((i, cur)) = stack.pop() {
            if i == k {
                elems.push(Elem(cur));
                if elems.len() > cap {
                    return Err(Error::CapExceeded { what: "lattice elements".into(), limit: cap });
                }
                continue;
            }
            let p = topo[i];
            if strict[p] & !cur == 0 {
                stack.push((i + 1, cur | bit(p)));
            }
            stack.push((i + 1, cur));
        }
        elems.sort_by_key(|e| (e.0.count_ones(), e.0));
        let index: HashMap<Elem, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut lat = FiniteDistLattice { ji_labels, below, elems, index, names: Vec::new() };
        lat.names = lat.elems.iter().map(|&e| match names.as_ref().and_then(|m| m.get(&e)) {
            Some(n) => n.clone(),
            None => lat.default_name(e),
        }).collect();
        Ok(lat)
    }

    fn default_name(&self, e: Elem) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let maxes = self.maximal(e);
        maxes.iter().map(|&p| self.ji_labels[p].as_str()).collect::<Vec<_>>().join("|")
    }

    /// Reconstructs a finite lattice given by its Hasse diagram, where
    /// `(a, b)` means `b` covers `a`.
    pub fn build_from_hasse(labels: &[String], covers: &[(usize, usize)], cap: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::NotALattice("no elements".into()));
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(Error::Input(format!("cover pair ({a}, {b}) out of range")));
            }
            leq[a][b] = true;
        }
        for m in 0..n {
            for i in 0..n {
                if leq[i][m] {
                    let row = leq[m].clone();
                    for (j, &above) in row.iter().enumerate() {
                        if above {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        Self::from_order(labels, |i, j| leq[i][j], cap)
    }

    /// Re-coordinatizes an explicit finite lattice via Birkhoff duality.
    pub fn from_order(labels: &[String], leq: impl Fn(usize, usize) -> bool, cap: usize) -> Result<Self> {
        let n = labels.len();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq(i, j) && leq(j, i) {
                    return Err(Error::NotALattice(format!("{} and {} are mutually below each other", labels[i], labels[j])));
                }
            }
        }
        let extremum = |pick_upper: bool, i: usize, j: usize| -> Option<usize> {
            let bounds: Vec<usize> = (0..n)
                .filter(|&x| if pick_upper { leq(i, x) && leq(j, x) } else { leq(x, i) && leq(x, j) })
                .collect();
            bounds.iter().copied().find(|&x| bounds.iter().all(|&y| if pick_upper { leq(x, y) } else { leq(y, x) }))
        };
        for i in 0..n {
            for j in i + 1..n {
                if extremum(true, i, j).is_none() {
                    return Err(Error::NotALattice(format!("{} and {} have no join", labels[i], labels[j])));
                }
                if extremum(false, i, j).is_none() {
                    return Err(Error::NotALattice(format!("{} and {} have no meet", labels[i], labels[j])));
                }
            }
        }
        let bottom = (0..n).find(|&x| (0..n).all(|y| leq(x, y))).ok_or_else(|| Error::NotALattice("no bottom".into()))?;
        let lower_covers = |x: usize| -> usize {
            (0..n)
                .filter(|&y| y != x && leq(y, x) && !(0..n).any(|z| z != x && z != y && leq(y, z) && leq(z, x)))
                .count()
        };
        let ji: Vec<usize> = (0..n).filter(|&x| x != bottom && lower_covers(x) == 1).collect();
        if ji.len() > MAX_JOIN_IRREDUCIBLES {
            return Err(Error::CapExceeded { what: format!("{} join-irreducibles", ji.len()), limit: MAX_JOIN_IRREDUCIBLES });
        }
        let ji_labels: Vec<String> = ji.iter().map(|&x| labels[x].clone()).collect();
        let below: Vec<u64> = ji
            .iter()
            .map(|&q| ji.iter().enumerate().filter(|&(_, &p)| leq(p, q)).fold(0u64, |acc, (i, _)| acc | bit(i)))
            .collect();
        let mut names = HashMap::new();
        for (x, label) in labels.iter().enumerate() {
            let e = Elem(ji.iter().enumerate().filter(|&(_, &p)| leq(p, x)).fold(0u64, |acc, (i, _)| acc | bit(i)));
            names.insert(e, label.clone());
        }
        let lat = Self::from_below(ji_labels, below, Some(names), cap.max(n))?;
        if lat.len() != n {
            return Err(Error::NotDistributive { elements: n, reconstructed: lat.len() });
        }
        Ok(lat)
    }

    /// Direct product; its join-irreducibles are the disjoint union of both.
    pub fn product(&self, other: &Self, cap: usize) -> Result<Self> {
        let k1 = self.ji_count();
        let mut labels: Vec<String> = self.ji_labels.iter().map(|l| format!("{l}.0")).collect();
        labels.extend(other.ji_labels.iter().map(|l| format!("{l}.1")));
        let mut below = self.below.clone();
        below.extend(other.below.iter().map(|b| b << k1));
        if labels.len() > MAX_JOIN_IRREDUCIBLES {
            return Err(Error::CapExceeded { what: format!("{} join-irreducibles", labels.len()), limit: MAX_JOIN_IRREDUCIBLES });
        }
        let mut names = HashMap::new();
        for &x in &self.elems {
            for &y in &other.elems {
                names.insert(Elem(x.0 | y.0 << k1), format!("({},{})", self.name(x), other.name(y)));
            }
        }
        Self::from_below(labels, below, Some(names), cap)
    }

    pub fn with_names(mut self, f: impl Fn(Elem) -> Option<String>) -> Self {
        for (i, &e) in self.elems.iter().enumerate() {
            if let Some(n) = f(e) {
                self.names[i] = n;
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Elements in a fixed linear extension: bottom first, top last.
    pub fn elements(&self) -> &[Elem] {
        &self.elems
    }

    pub fn bottom(&self) -> Elem {
        Elem::ZERO
    }

    pub fn top(&self) -> Elem {
        Elem(if self.ji_count() == 64 { u64::MAX } else { bit(self.ji_count()) - 1 })
    }

    pub fn index_of(&self, e: Elem) -> usize {
        self.index[&e]
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.index.contains_key(&e)
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[self.index_of(e)]
    }

    pub fn find(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(|i| self.elems[i])
    }

    pub fn ji_count(&self) -> usize {
        self.ji_labels.len()
    }

    pub fn ji_labels(&self) -> &[String] {
        &self.ji_labels
    }

    /// The principal down-set generated by the `i`-th join-irreducible.
    pub fn ji(&self, i: usize) -> Elem {
        Elem(self.below[i])
    }

    pub fn ji_leq(&self, p: usize, q: usize) -> bool {
        self.below[q] & bit(p) != 0
    }

    /// Order pairs `(p, q)` with `q` covering `p` among join-irreducibles.
    pub fn ji_covers(&self) -> Vec<(usize, usize)> {
        let k = self.ji_count();
        let mut out = Vec::new();
        for q in 0..k {
            for p in Elem(self.below[q] & !bit(q)).bits() {
                let between = Elem(self.below[q] & !bit(q) & !bit(p)).bits().any(|r| self.ji_leq(p, r));
                if !between {
                    out.push((p, q));
                }
            }
        }
        out
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        a.join(b)
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        a.meet(b)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        a.leq(b)
    }

    pub fn join_all(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        it.into_iter().fold(Elem::ZERO, Elem::join)
    }

    pub fn meet_all(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        it.into_iter().fold(self.top(), Elem::meet)
    }

    /// Down-closure of an arbitrary set of join-irreducibles.
    pub fn down_closure(&self, bits: u64) -> Elem {
        Elem(Elem(bits).bits().fold(0, |acc, p| acc | self.below[p]))
    }

    /// Join-irreducibles maximal in `e`.
    pub fn maximal(&self, e: Elem) -> Vec<usize> {
        e.bits().filter(|&p| !e.bits().any(|q| q != p && self.ji_leq(p, q))).collect()
    }

    pub fn lower_covers(&self, e: Elem) -> Vec<Elem> {
        self.maximal(e).into_iter().map(|p| Elem(e.0 & !bit(p))).collect()
    }

    pub fn upper_covers(&self, e: Elem) -> Vec<Elem> {
        (0..self.ji_count())
            .filter(|&p| !e.contains(p) && self.below[p] & !bit(p) & !e.0 == 0)
            .map(|p| Elem(e.0 | bit(p)))
            .collect()
    }

    /// `p_*` for the `i`-th join-irreducible.
    pub fn lower_cover(&self, i: usize) -> Elem {
        Elem(self.below[i] & !bit(i))
    }

    /// `p†`: the largest element not above the `i`-th join-irreducible.
    pub fn dagger(&self, i: usize) -> Elem {
        Elem((0..self.ji_count()).filter(|&q| !self.ji_leq(i, q)).fold(0, |acc, q| acc | bit(q)))
    }

    /// Index of `e` among join-irreducibles when `e` is principal.
    pub fn as_ji(&self, e: Elem) -> Option<usize> {
        let m = self.maximal(e);
        (m.len() == 1 && self.below[m[0]] == e.0).then(|| m[0])
    }

    /// Largest `x` with `a ∧ x ≤ b`.
    pub fn heyting_imp(&self, a: Elem, b: Elem) -> Elem {
        Elem((0..self.ji_count()).filter(|&p| self.below[p] & a.0 & !b.0 == 0).fold(0, |acc, p| acc | bit(p)))
    }

    /// Least `x` with `a ≤ b ∨ x`.
    pub fn pseudo_diff(&self, a: Elem, b: Elem) -> Elem {
        self.down_closure(a.0 & !b.0)
    }

    /// Hasse diagram in DOT, bottom at the bottom.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n  rankdir=BT;\n");
        for (i, &e) in self.elems.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{}\"];", self.names[i].replace('"', "\\\""));
            for c in self.lower_covers(e) {
                let _ = writeln!(s, "  n{} -> n{i};", self.index_of(c));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomKind {
    ZeroPreserving,
    ZeroOnePreserving,
}

/// A lattice homomorphism given by its full table on source elements.
#[derive(Clone, Debug)]
pub struct LatticeHom {
    pub source: Arc<FiniteDistLattice>,
    pub target: Arc<FiniteDistLattice>,
    table: Vec<Elem>,
    pub kind: HomKind,
}

impl LatticeHom {
    /// Validates joins, meets and zero on all pairs.
    pub fn new(source: Arc<FiniteDistLattice>, target: Arc<FiniteDistLattice>, table: Vec<Elem>) -> Result<Self> {
        let h = Self::new_unchecked(source, target, table)?;
        if let Some(msg) = h.violation() {
            return Err(Error::NotAHomomorphism(msg));
        }
        Ok(h)
    }

    /// Checks only that the table is well formed; the map may fail to be a homomorphism.
    pub fn new_unchecked(source: Arc<FiniteDistLattice>, target: Arc<FiniteDistLattice>, table: Vec<Elem>) -> Result<Self> {
        if table.len() != source.len() {
            return Err(Error::Input(format!("table has {} entries for {} elements", table.len(), source.len())));
        }
        if let Some(&bad) = table.iter().find(|&&e| !target.contains(e)) {
            return Err(Error::Input(format!("{bad:?} is not a target element")));
        }
        let kind = if table[source.index_of(source.top())] == target.top() {
            HomKind::ZeroOnePreserving
        } else {
            HomKind::ZeroPreserving
        };
        Ok(LatticeHom { source, target, table, kind })
    }

    /// Builds a map from a closure on source elements.
    pub fn from_fn(source: Arc<FiniteDistLattice>, target: Arc<FiniteDistLattice>, f: impl Fn(Elem) -> Elem) -> Result<Self> {
        let table = source.elements().iter().map(|&e| f(e)).collect();
        Self::new(source, target, table)
    }

    pub fn identity(l: Arc<FiniteDistLattice>) -> Self {
        let table = l.elements().to_vec();
        LatticeHom { source: l.clone(), target: l, table, kind: HomKind::ZeroOnePreserving }
    }

    pub fn apply(&self, e: Elem) -> Elem {
        self.table[self.source.index_of(e)]
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    /// First failure of the homomorphism laws, if any.
    pub fn violation(&self) -> Option<String> {
        let s = &self.source;
        if !self.apply(s.bottom()).is_zero() {
            return Some("bottom not preserved".into());
        }
        for &x in s.elements() {
            for &y in s.elements() {
                if self.apply(x.join(y)) != self.apply(x).join(self.apply(y)) {
                    return Some(format!("join of {} and {}", s.name(x), s.name(y)));
                }
                if self.apply(x.meet(y)) != self.apply(x).meet(self.apply(y)) {
                    return Some(format!("meet of {} and {}", s.name(x), s.name(y)));
                }
            }
        }
        None
    }

    pub fn compose(&self, after: &LatticeHom) -> Result<LatticeHom> {
        if *after.source != *self.target {
            return Err(Error::Input("composition of mismatched homomorphisms".into()));
        }
        let table = self.table.iter().map(|&e| after.apply(e)).collect();
        LatticeHom::new_unchecked(self.source.clone(), after.target.clone(), table)
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.len()];
        for &e in &self.table {
            hit[self.target.index_of(e)] = true;
        }
        hit.into_iter().all(|b| b)
    }
}

/// The prime spectrum of a finite distributive lattice.
///
/// Points are indexed like the join-irreducibles. The closure of a point
/// is the set of points above it in the join-irreducible order.
#[derive(Clone, Debug)]
pub struct SpecSpace {
    pub points: Vec<String>,
    pub closures: Vec<u64>,
    pub compact_opens: Vec<u64>,
}

pub fn spectrum(l: &FiniteDistLattice) -> SpecSpace {
    let k = l.ji_count();
    let closures = (0..k).map(|p| (0..k).filter(|&q| l.ji_leq(p, q)).fold(0, |acc, q| acc | bit(q))).collect();
    SpecSpace { points: l.ji_labels().to_vec(), closures, compact_opens: l.elements().iter().map(|e| e.0).collect() }
}

impl SpecSpace {
    pub fn specializes(&self, p: usize, q: usize) -> bool {
        self.closures[p] & bit(q) != 0
    }

    /// A point whose closure is not a chain, with two incomparable points of that closure.
    pub fn cn_failure(&self) -> Option<(usize, usize, usize)> {
        for z in 0..self.points.len() {
            let cl: Vec<usize> = Elem(self.closures[z]).bits().collect();
            for (i, &x) in cl.iter().enumerate() {
                for &y in &cl[i + 1..] {
                    if !self.specializes(x, y) && !self.specializes(y, x) {
                        return Some((z, x, y));
                    }
                }
            }
        }
        None
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n");
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(s, "  p{i} [label=\"{}\"];", p.replace('"', "\\\""));
        }
        for p in 0..self.points.len() {
            for q in Elem(self.closures[p]).bits() {
                let direct = q != p
                    && !Elem(self.closures[p]).bits().any(|r| r != p && r != q && self.specializes(r, q));
                if direct {
                    let _ = writeln!(s, "  p{p} -> p{q};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Complete normality of the space: every point closure is a chain.
pub fn is_cn_space(s: &SpecSpace) -> bool {
    s.cn_failure().is_none()
}
