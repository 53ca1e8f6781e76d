//! Exact rational linear algebra: rank and feasibility of linear systems.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_q(v: &[BigInt]) -> Vec<Q> {
    v.iter().map(|x| Q::from_integer(x.clone())).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Integer dot product; missing trailing coordinates are zero.
pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Row-reduces in place and returns the rank.
fn eliminate(m: &mut [Vec<Q>]) -> usize {
    let cols = m.iter().map(Vec::len).max().unwrap_or(0);
    for row in m.iter_mut() {
        row.resize(cols, Q::zero());
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for x in m[rank].iter_mut() {
            *x /= &pivot;
        }
        let prow = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let k = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &k * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| to_q(r)).collect();
    eliminate(&mut m)
}

/// Whether `v` lies in the row span of `rows`.
pub fn in_span(rows: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(&ext) == rank(rows)
}

/// Searches for `x ≥ 0` with `a x = b` by phase-one simplex under Bland's rule.
pub fn nonneg_solution(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let m = a.len();
    let n = a.iter().map(Vec::len).max().unwrap_or(0);
    // Tableau over [x | artificials | rhs]; every row gets an artificial basis variable.
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let flip = b[i].is_negative();
        let mut r = vec![Q::zero(); width];
        for (j, x) in row.iter().enumerate() {
            r[j] = if flip { -x.clone() } else { x.clone() };
        }
        r[n + i] = Q::one();
        r[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the phase-one objective: minimize the sum of artificials.
    let mut cost = vec![Q::zero(); width];
    for r in &t {
        for j in 0..width {
            if j < n || j == width - 1 {
                cost[j] -= &r[j];
            }
        }
    }
    while let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for (i, r) in t.iter().enumerate() {
            if r[enter].is_positive() {
                let ratio = &r[width - 1] / &r[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (p, _) = leave?;
        let pivot = t[p][enter].clone();
        for x in t[p].iter_mut() {
            *x /= &pivot;
        }
        let prow = t[p].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != p && !r[enter].is_zero() {
                let k = r[enter].clone();
                for (x, y) in r.iter_mut().zip(&prow) {
                    *x -= &k * y;
                }
            }
        }
        let k = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&prow) {
            *x -= &k * y;
        }
        basis[p] = enter;
    }
    if !cost[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

/// Whether `c = Σ λᵢ gᵢ` for some `λ ≥ 0`.
pub fn cone_member(c: &[Q], gens: &[Vec<Q>]) -> bool {
    let d = gens.iter().map(Vec::len).chain([c.len()]).max().unwrap_or(0);
    let get = |v: &[Q], i: usize| v.get(i).cloned().unwrap_or_else(Q::zero);
    let a: Vec<Vec<Q>> = (0..d).map(|i| gens.iter().map(|g| get(g, i)).collect()).collect();
    let b: Vec<Q> = (0..d).map(|i| get(c, i)).collect();
    nonneg_solution(&a, &b).is_some()
}

/// A point `x` in `dim`-space with `⟨n, x⟩ = 0` for `zero` rows and
/// `⟨n, x⟩ > 0` for `positive` rows, if one exists.
pub fn realize(dim: usize, zero: &[Vec<Q>], positive: &[Vec<Q>]) -> Option<Vec<Q>> {
    let get = |v: &[Q], i: usize| v.get(i).cloned().unwrap_or_else(Q::zero);
    // Variables: x⁺ (dim), x⁻ (dim), one surplus per positive row.
    let k = positive.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for row in zero {
        let mut r: Vec<Q> = (0..dim).map(|i| get(row, i)).collect();
        r.extend((0..dim).map(|i| -get(row, i)));
        r.extend((0..k).map(|_| Q::zero()));
        a.push(r);
        b.push(Q::zero());
    }
    for (s, row) in positive.iter().enumerate() {
        let mut r: Vec<Q> = (0..dim).map(|i| get(row, i)).collect();
        r.extend((0..dim).map(|i| -get(row, i)));
        r.extend((0..k).map(|j| if j == s { -Q::one() } else { Q::zero() }));
        a.push(r);
        b.push(Q::one());
    }
    let sol = nonneg_solution(&a, &b)?;
    Some((0..dim).map(|i| &sol[i] - &sol[dim + i]).collect())
}
