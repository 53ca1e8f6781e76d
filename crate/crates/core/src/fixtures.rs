//! Small named lattices used by tests, the CLI and the acceptance suite.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Elem, FiniteDistLattice, DEFAULT_ELEMENT_CAP};

pub const DEFAULT_DJ_BOUND: usize = 4;

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The `n`-element chain `0 < 1 < … < n-1`.
pub fn chain(n: usize) -> FiniteDistLattice {
    assert!(n >= 1);
    let labels: Vec<String> = (1..n).map(|i| i.to_string()).collect();
    let order: Vec<(usize, usize)> = (1..n.saturating_sub(1)).map(|i| (i - 1, i)).collect();
    FiniteDistLattice::from_ji_poset(labels, &order, DEFAULT_ELEMENT_CAP)
        .expect("chains are small")
        .with_names(|e| Some(e.0.count_ones().to_string()))
}

/// The Boolean lattice on `k` atoms.
pub fn boolean(k: usize) -> FiniteDistLattice {
    let labels: Vec<String> = (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    FiniteDistLattice::from_ji_poset(labels, &[], DEFAULT_ELEMENT_CAP).expect("small Boolean lattice")
}

/// The product of an `m`-chain and an `n`-chain.
pub fn grid(m: usize, n: usize) -> FiniteDistLattice {
    chain(m).product(&chain(n), DEFAULT_ELEMENT_CAP).expect("small grid")
}

/// `0 < c < a, b < 1` with `a` and `b` incomparable.
pub fn kite() -> FiniteDistLattice {
    let (names, covers) = kite_hasse();
    FiniteDistLattice::build_from_hasse(&names, &covers, DEFAULT_ELEMENT_CAP).expect("kite is distributive")
}

pub fn kite_hasse() -> (Vec<String>, Vec<(usize, usize)>) {
    (strings(&["0", "c", "a", "b", "1"]), vec![(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)])
}

/// The pentagon `0 < a < c < 1`, `0 < b < 1`.
pub fn n5_hasse() -> (Vec<String>, Vec<(usize, usize)>) {
    (strings(&["0", "a", "b", "c", "1"]), vec![(0, 1), (1, 3), (3, 4), (0, 2), (2, 4)])
}

/// `B_n × 3`: the Boolean lattice on `n` atoms times the 3-chain.
pub fn dj(n: usize, bound: usize) -> Result<FiniteDistLattice> {
    if n > bound {
        return Err(Error::BoundExceeded { value: n, max: bound });
    }
    boolean(n).product(&chain(3), DEFAULT_ELEMENT_CAP)
}

/// A random poset on `k` join-irreducibles, each pair `i < j` related with probability `p`.
pub fn random_birkhoff<R: Rng>(rng: &mut R, k: usize, p: f64) -> FiniteDistLattice {
    let labels: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
    let mut order = Vec::new();
    for j in 0..k {
        for i in 0..j {
            if rng.random_bool(p) {
                order.push((i, j));
            }
        }
    }
    FiniteDistLattice::from_ji_poset(labels, &order, DEFAULT_ELEMENT_CAP).expect("at most 2^k elements")
}

/// A random completely normal lattice with at most `max_elements` elements and
/// at least one pair of comparable join-irreducibles.
///
/// Every join-irreducible has at most one upper cover, so principal up-sets are chains.
pub fn random_cn<R: Rng>(rng: &mut R, max_elements: usize) -> FiniteDistLattice {
    loop {
        let k = rng.random_range(2..=4);
        let labels: Vec<String> = (0..k).map(|i| format!("q{i}")).collect();
        let mut order = Vec::new();
        for i in 1..k {
            let parent = rng.random_range(0..=i);
            if parent < i {
                order.push((i, parent));
            }
        }
        if order.is_empty() {
            continue;
        }
        let l = FiniteDistLattice::from_ji_poset(labels, &order, DEFAULT_ELEMENT_CAP).expect("tiny poset");
        if l.len() <= max_elements {
            return l;
        }
    }
}

/// Every lattice of the difference-axiom fixture family except the random ones.
pub fn named_family() -> Vec<(String, FiniteDistLattice)> {
    let mut out = Vec::new();
    for n in 1..=8 {
        out.push((format!("chain{n}"), chain(n)));
    }
    for k in 0..=3 {
        out.push((format!("bool{k}"), boolean(k)));
    }
    for (m, n) in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (4, 4)] {
        out.push((format!("grid{m}x{n}"), grid(m, n)));
    }
    out.push(("kite".into(), kite()));
    for n in 0..=2 {
        out.push((format!("dj{n}"), dj(n, DEFAULT_DJ_BOUND).expect("within bound")));
    }
    out
}

/// Element names of a lattice, for diagnostics.
pub fn names(l: &FiniteDistLattice, es: &[Elem]) -> Vec<String> {
    es.iter().map(|&e| l.name(e).to_string()).collect()
}
