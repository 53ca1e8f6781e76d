//! Brute-force oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cnrep::arrangement::{Arrangement, Sign};
use cnrep::exact::{cone_member, to_q, Q};
use cnrep::fixtures;
use cnrep::lattice::{Elem, FiniteDistLattice};

pub const MAX_FIXTURE_ELEMENTS: usize = 64;

/// Fifty random Birkhoff lattices with at most eight join-irreducibles and
/// at most 64 elements, drawn from seed 1.
pub fn random_family() -> Vec<(String, FiniteDistLattice)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut out = Vec::new();
    while out.len() < 50 {
        let k = rng.random_range(1..=8);
        let l = fixtures::random_birkhoff(&mut rng, k, 0.35);
        if l.len() <= MAX_FIXTURE_ELEMENTS {
            out.push((format!("random{}", out.len()), l));
        }
    }
    out
}

/// The named fixtures with at most 64 elements, then the random ones.
pub fn fixture_family() -> Vec<(String, FiniteDistLattice)> {
    let mut out: Vec<_> = fixtures::named_family().into_iter().filter(|(_, l)| l.len() <= MAX_FIXTURE_ELEMENTS).collect();
    out.extend(random_family());
    out
}

/// Consonance by witness search: some `x, y` with `a ≤ b ∨ x`, `b ≤ a ∨ y`, `x ∧ y = 0`.
pub struct ConsonanceOracle {
    elems: Vec<Elem>,
    /// `disjoint[i]` has bit `j` set when element `i` meets element `j` in zero.
    disjoint: Vec<Vec<u64>>,
}

impl ConsonanceOracle {
    pub fn new(l: &FiniteDistLattice) -> Self {
        let elems = l.elements().to_vec();
        let words = elems.len().div_ceil(64);
        let disjoint = elems
            .iter()
            .map(|&x| {
                let mut row = vec![0u64; words];
                for (j, &y) in elems.iter().enumerate() {
                    if x.meet(y).is_zero() {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
                row
            })
            .collect();
        ConsonanceOracle { elems, disjoint }
    }

    pub fn consonant(&self, a: Elem, b: Elem) -> bool {
        let words = self.elems.len().div_ceil(64);
        let mut ys = vec![0u64; words];
        for (j, &y) in self.elems.iter().enumerate() {
            if b.leq(a.join(y)) {
                ys[j / 64] |= 1 << (j % 64);
            }
        }
        self.elems
            .iter()
            .enumerate()
            .filter(|&(_, &x)| a.leq(b.join(x)))
            .any(|(i, _)| self.disjoint[i].iter().zip(&ys).any(|(d, y)| d & y != 0))
    }
}

/// Every 0-lattice homomorphism `E → L`, as tables indexed like `E`.
///
/// Such maps correspond to order-preserving maps from the join-irreducibles
/// of `L` to those of `E` with a new top `∞`: `q ≤ g(x)` iff `ψ(q) ≤ x`.
pub fn all_homs(e: &FiniteDistLattice, l: &FiniteDistLattice) -> Vec<Vec<Elem>> {
    let (ke, kl) = (e.ji_count(), l.ji_count());
    let mut out = Vec::new();
    let mut psi = vec![0usize; kl];
    loop {
        // `ke` stands for `∞`.
        let leq = |p: usize, q: usize| q == ke || (p != ke && e.ji_leq(p, q));
        let monotone = (0..kl).all(|q| (0..kl).all(|r| !l.ji_leq(q, r) || leq(psi[q], psi[r])));
        if monotone {
            let table = e
                .elements()
                .iter()
                .map(|&x| Elem((0..kl).filter(|&q| psi[q] != ke && x.contains(psi[q])).fold(0, |acc, q| acc | 1 << q)))
                .collect();
            out.push(table);
        }
        let mut i = 0;
        while i < kl && psi[i] == ke {
            psi[i] = 0;
            i += 1;
        }
        if i == kl {
            return out;
        }
        psi[i] += 1;
    }
}

/// Generators of the cone of functionals nonnegative on the closure of face `f`.
pub fn closed_face_dual(arr: &Arrangement, f: usize) -> Vec<Vec<Q>> {
    let face = arr.face(f);
    let mut gens = Vec::new();
    for (k, h) in arr.hyperplanes().iter().enumerate() {
        let n = to_q(h.normal());
        let neg: Vec<Q> = n.iter().map(|x| -x).collect();
        match face.sign(k) {
            Sign::Zero => {
                gens.push(n);
                gens.push(neg);
            }
            Sign::Pos => gens.push(n),
            Sign::Neg => gens.push(neg),
        }
    }
    gens
}

/// Whether `C_m⁻ ⊆ P† ⇒ B⁺ ⊆ P†` for every join-irreducible `P = ↑F`, by Farkas.
pub fn implication_holds(arr: &Arrangement, a: &[BigInt], b: &[BigInt], m: i64) -> bool {
    let d = a.len().max(b.len()).max(arr.dim());
    let get = |v: &[BigInt], i: usize| v.get(i).cloned().unwrap_or_default();
    let am: Vec<BigInt> = (0..d).map(|i| get(a, i) - BigInt::from(m) * get(b, i)).collect();
    let nb: Vec<BigInt> = (0..d).map(|i| -get(b, i)).collect();
    (0..arr.face_count()).all(|f| {
        let gens = closed_face_dual(arr, f);
        !cone_member(&to_q(&am), &gens) || cone_member(&to_q(&nb), &gens)
    })
}

/// Least `m` such that the implication holds for every `m' ∈ [m, limit]`.
pub fn search_m0(arr: &Arrangement, a: &[BigInt], b: &[BigInt], limit: i64) -> u64 {
    (1..=limit).rev().find(|&m| !implication_holds(arr, a, b, m)).map_or(1, |m| m as u64 + 1)
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Twelve small arrangements: at most four hyperplanes in dimension at most three.
pub fn small_arrangements() -> Vec<(String, Arrangement)> {
    let specs: Vec<(&str, Vec<Vec<i64>>)> = vec![
        ("line", vec![vec![1]]),
        ("plane-one", vec![vec![1, 0]]),
        ("plane-axes", vec![vec![1, 0], vec![0, 1]]),
        ("plane-three", vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
        ("plane-four", vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]),
        ("plane-skew", vec![vec![1, 2], vec![2, 1]]),
        ("space-axes", vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]),
        ("space-axes-diagonal", vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]),
        ("space-cycle", vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]),
        ("space-pencil", vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]),
        ("space-mixed", vec![vec![1, 0, 0], vec![0, 1, 1], vec![0, 1, -1], vec![1, 1, 1]]),
        ("space-pencil-four", vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![1, -1, 0]]),
    ];
    specs
        .into_iter()
        .map(|(name, rows)| {
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            (name.to_string(), Arrangement::from_ints(&refs).expect("valid fixture"))
        })
        .collect()
}

/// Every basic open set: intersections of open half-spaces over sign patterns.
pub fn basic_opens(arr: &Arrangement) -> Vec<cnrep::arrangement::ConeElem> {
    let n = arr.len();
    let mut out: Vec<cnrep::arrangement::ConeElem> = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut pattern = Vec::new();
        for i in 0..n {
            match c % 3 {
                1 => pattern.push((i, Sign::Pos)),
                2 => pattern.push((i, Sign::Neg)),
                _ => {}
            }
            c /= 3;
        }
        let p = arr.basic_open(&pattern);
        if !p.is_empty() && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}
