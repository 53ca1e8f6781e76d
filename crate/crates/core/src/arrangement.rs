//! Central hyperplane arrangements over rational space, their faces and the
//! lattices `Op` and `Op⁻` of open cones.
//!
//! Faces are sign vectors kept in lexicographic order (`-` < `0` < `+`,
//! first hyperplane most significant). They are maintained incrementally:
//! the arrangement stores a basis of its lineality space and one
//! representative vector per ray (a face one dimension above the
//! lineality space). A new hyperplane either cuts the lineality space, in
//! which case every face splits, or vanishes on it, in which case a face
//! splits exactly when the rays below it take both signs.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::exact;
use crate::lattice::{Elem, FiniteDistLattice, DEFAULT_ELEMENT_CAP};

pub const MAX_HYPERPLANES: usize = 128;
pub const DEFAULT_FACE_CAP: usize = 20_000;

/// A linear hyperplane, stored as its primitive normal with first nonzero
/// entry positive and no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane {
    normal: Vec<BigInt>,
}

pub fn normalize(v: &[BigInt]) -> Result<Hyperplane> {
    let mut normal = v.to_vec();
    while normal.last().is_some_and(Zero::is_zero) {
        normal.pop();
    }
    let first = normal.iter().find(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    let flip = first.is_negative();
    let g = normal.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    for x in normal.iter_mut() {
        *x /= &g;
        if flip {
            *x = -&*x;
        }
    }
    Ok(Hyperplane { normal })
}

impl Hyperplane {
    pub fn from_ints(v: &[i64]) -> Result<Self> {
        normalize(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// The coordinate hyperplane `xᵢ = 0`.
    pub fn coordinate(i: usize) -> Self {
        let mut normal = vec![BigInt::zero(); i + 1];
        normal[i] = BigInt::one();
        Hyperplane { normal }
    }

    pub fn normal(&self) -> &[BigInt] {
        &self.normal
    }

    /// Number of coordinates the normal touches, i.e. one past its largest support index.
    pub fn width(&self) -> usize {
        self.normal.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.normal.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i)
    }

    pub fn l1(&self) -> BigInt {
        self.normal.iter().map(|x| x.abs()).sum()
    }

    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        exact::dot_int(&self.normal, x)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.normal.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Integers serialize as JSON numbers when they fit in `i64`, as strings otherwise.
pub(crate) struct JsonInt<'a>(pub &'a BigInt);

impl Serialize for JsonInt<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl Serialize for Hyperplane {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.normal.len()))?;
        for x in &self.normal {
            seq.serialize_element(&JsonInt(x))?;
        }
        seq.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(x: &BigInt) -> Sign {
        if x.is_positive() {
            Sign::Pos
        } else if x.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }
}

/// A sign vector: bit `i` of `pos` (of `neg`) is set when the face lies on
/// the positive (negative) side of hyperplane `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Face {
    pub pos: u128,
    pub neg: u128,
}

impl Face {
    pub const ZERO: Face = Face { pos: 0, neg: 0 };

    pub fn sign(self, i: usize) -> Sign {
        if self.pos >> i & 1 == 1 {
            Sign::Pos
        } else if self.neg >> i & 1 == 1 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn zeros(self, n: usize) -> u128 {
        !(self.pos | self.neg) & mask(n)
    }

    /// Specialization order: `self` lies in the closure of `other`.
    pub fn leq(self, other: Face) -> bool {
        self.pos & !other.pos == 0 && self.neg & !other.neg == 0
    }

    pub fn with(self, i: usize, s: Sign) -> Face {
        let b = 1u128 << i;
        match s {
            Sign::Pos => Face { pos: self.pos | b, neg: self.neg },
            Sign::Neg => Face { pos: self.pos, neg: self.neg | b },
            Sign::Zero => self,
        }
    }

    pub fn render(self, n: usize) -> String {
        (0..n).map(|i| self.sign(i).symbol()).collect()
    }

    pub fn parse(s: &str) -> Result<Face> {
        s.chars().enumerate().try_fold(Face::ZERO, |f, (i, c)| match c {
            '+' => Ok(f.with(i, Sign::Pos)),
            '-' | '−' => Ok(f.with(i, Sign::Neg)),
            '0' => Ok(f),
            _ => Err(Error::Input(format!("bad sign character {c:?} in {s:?}"))),
        })
    }
}

pub(crate) fn mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// The values a linear functional takes on a face: the face is relatively
/// open, so these are `{0}`, `(0,∞)`, `(−∞,0)` or all of ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignClass {
    Zero,
    Pos,
    Neg,
    Both,
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

fn padded(mut v: Vec<BigInt>, n: usize) -> Vec<BigInt> {
    v.resize(n, BigInt::zero());
    v
}

fn axpy(a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

pub type FaceSet = FixedBitSet;

/// An up-closed set of faces, i.e. an element of `Op`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConeElem(FixedBitSet);

impl ConeElem {
    pub fn faces(&self) -> &FaceSet {
        &self.0
    }

    pub fn contains(&self, face: usize) -> bool {
        self.0.contains(face)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &ConeElem) -> ConeElem {
        let mut s = self.0.clone();
        s.union_with(&other.0);
        ConeElem(s)
    }

    pub fn intersection(&self, other: &ConeElem) -> ConeElem {
        let mut s = self.0.clone();
        s.intersect_with(&other.0);
        ConeElem(s)
    }

    pub fn is_subset(&self, other: &ConeElem) -> bool {
        self.0.is_subset(&other.0)
    }
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    hyperplanes: Vec<Hyperplane>,
    dim: usize,
    faces: Vec<Face>,
    /// Dimension of each face as a cone in the ambient space.
    adims: Vec<usize>,
    /// Representative vector of each ray, absent on other faces.
    rays: Vec<Option<Vec<BigInt>>>,
    rays_below: Vec<Vec<u32>>,
    lineality: Vec<Vec<BigInt>>,
    index: HashMap<Face, usize>,
    face_cap: usize,
    upper: OnceLock<Vec<Vec<u32>>>,
}

impl Default for Arrangement {
    fn default() -> Self {
        Self::new()
    }
}

impl Arrangement {
    /// The empty arrangement in 0-space: a single face.
    pub fn new() -> Self {
        Self::with_face_cap(DEFAULT_FACE_CAP)
    }

    pub fn with_face_cap(face_cap: usize) -> Self {
        Arrangement {
            hyperplanes: Vec::new(),
            dim: 0,
            faces: vec![Face::ZERO],
            adims: vec![0],
            rays: vec![None],
            rays_below: vec![Vec::new()],
            lineality: Vec::new(),
            index: HashMap::from([(Face::ZERO, 0)]),
            face_cap,
            upper: OnceLock::new(),
        }
    }

    pub fn from_hyperplanes(hs: impl IntoIterator<Item = Hyperplane>, face_cap: usize) -> Result<Self> {
        let mut a = Self::with_face_cap(face_cap);
        for h in hs {
            a.add(h)?;
        }
        Ok(a)
    }

    pub fn from_ints(normals: &[&[i64]]) -> Result<Self> {
        let hs = normals.iter().map(|v| Hyperplane::from_ints(v)).collect::<Result<Vec<_>>>()?;
        Self::from_hyperplanes(hs, DEFAULT_FACE_CAP)
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn face_cap(&self) -> usize {
        self.face_cap
    }

    pub fn set_face_cap(&mut self, cap: usize) {
        self.face_cap = cap;
    }

    pub fn position(&self, h: &Hyperplane) -> Option<usize> {
        self.hyperplanes.iter().position(|g| g == h)
    }

    /// Coordinates appearing in some normal.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.hyperplanes.iter().flat_map(|h| h.support().collect::<Vec<_>>()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face(&self, i: usize) -> Face {
        self.faces[i]
    }

    pub fn face_index(&self, f: Face) -> Option<usize> {
        self.index.get(&f).copied()
    }

    pub fn zero_face(&self) -> usize {
        self.index[&Face::ZERO]
    }

    pub fn face_dim(&self, i: usize) -> usize {
        self.adims[i]
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    pub fn render(&self, i: usize) -> String {
        self.faces[i].render(self.len())
    }

    pub fn parse_face(&self, s: &str) -> Result<usize> {
        if s.chars().count() != self.len() {
            return Err(Error::Input(format!("face {s:?} has wrong length for {} hyperplanes", self.len())));
        }
        let f = Face::parse(s)?;
        self.face_index(f).ok_or_else(|| Error::Input(format!("{s:?} is not a face")))
    }

    pub fn face_leq(&self, i: usize, j: usize) -> bool {
        self.faces[i].leq(self.faces[j])
    }

    pub fn ray_rep(&self, i: usize) -> Option<&[BigInt]> {
        self.rays[i].as_deref()
    }

    pub fn rays(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&i| self.rays[i].is_some())
    }

    /// Rays in the closure of face `i`.
    pub fn rays_below(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rays_below[i].iter().map(|&r| r as usize)
    }

    pub fn lineality_basis(&self) -> &[Vec<BigInt>] {
        &self.lineality
    }

    /// A point in the relative interior of face `i`.
    pub fn witness(&self, i: usize) -> Vec<BigInt> {
        let mut x = vec![BigInt::zero(); self.dim];
        for r in self.rays_below(i) {
            for (xi, ri) in x.iter_mut().zip(self.rays[r].as_ref().expect("ray")) {
                *xi += ri;
            }
        }
        x
    }

    /// Faces covering face `i` in the specialization order.
    pub fn upper_covers(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.upper.get_or_init(|| self.compute_upper_covers())[i].iter().map(|&j| j as usize)
    }

    fn compute_upper_covers(&self) -> Vec<Vec<u32>> {
        let top = self.adims.iter().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); top + 2];
        for (i, &d) in self.adims.iter().enumerate() {
            layers[d].push(i);
        }
        (0..self.faces.len())
            .map(|i| {
                let f = self.faces[i];
                layers[self.adims[i] + 1].iter().filter(|&&j| f.leq(self.faces[j])).map(|&j| j as u32).collect()
            })
            .collect()
    }

    /// Values of a linear functional on every face.
    pub fn classify(&self, c: &[BigInt]) -> Vec<SignClass> {
        // Coordinates past the ambient dimension are free directions.
        let cuts_new = c.iter().skip(self.dim).any(|x| !x.is_zero());
        if cuts_new || self.lineality.iter().any(|v| !exact::dot_int(c, v).is_zero()) {
            return vec![SignClass::Both; self.faces.len()];
        }
        let ray_sign: Vec<Sign> = self
            .rays
            .iter()
            .map(|r| r.as_ref().map_or(Sign::Zero, |r| Sign::of(&exact::dot_int(c, r))))
            .collect();
        (0..self.faces.len())
            .map(|i| {
                let (mut p, mut n) = (false, false);
                for r in self.rays_below(i) {
                    match ray_sign[r] {
                        Sign::Pos => p = true,
                        Sign::Neg => n = true,
                        Sign::Zero => {}
                    }
                }
                match (p, n) {
                    (false, false) => SignClass::Zero,
                    (true, false) => SignClass::Pos,
                    (false, true) => SignClass::Neg,
                    (true, true) => SignClass::Both,
                }
            })
            .collect()
    }

    /// Adds a hyperplane and returns, for every new face, the old face it refines.
    pub fn add(&mut self, h: Hyperplane) -> Result<Vec<usize>> {
        if self.position(&h).is_some() {
            return Err(Error::DuplicateHyperplane(h.to_string()));
        }
        if self.len() >= MAX_HYPERPLANES {
            return Err(Error::CapExceeded { what: "hyperplanes".into(), limit: MAX_HYPERPLANES });
        }
        let k = self.len();
        let dim = self.dim.max(h.width());
        let grow = dim - self.dim;
        let mut lin: Vec<Vec<BigInt>> = self.lineality.iter().map(|v| padded(v.clone(), dim)).collect();
        for j in self.dim..dim {
            let mut e = vec![BigInt::zero(); dim];
            e[j] = BigInt::one();
            lin.push(e);
        }
        let rays: Vec<Option<Vec<BigInt>>> = self.rays.iter().map(|r| r.clone().map(|r| padded(r, dim))).collect();
        let adims: Vec<usize> = self.adims.iter().map(|d| d + grow).collect();
        let hv: Vec<BigInt> = lin.iter().map(|v| h.eval(v)).collect();

        let mut faces = Vec::new();
        let mut new_adims = Vec::new();
        let mut new_rays = Vec::new();
        let mut parents = Vec::new();
        let mut push = |parent: usize, f: Face, d: usize, r: Option<Vec<BigInt>>| {
            faces.push(f);
            new_adims.push(d);
            new_rays.push(r.map(primitive));
            parents.push(parent);
        };
        let new_lin;
        if let Some(p) = hv.iter().position(|x| !x.is_zero()) {
            // The new hyperplane cuts the lineality space, so every face splits.
            let (pv, hp) = (lin[p].clone(), hv[p].clone());
            let s = BigInt::from(if hp.is_positive() { 1 } else { -1 });
            new_lin = (0..lin.len())
                .filter(|&j| j != p)
                .map(|j| primitive(axpy(&hp, &lin[j], &-&hv[j], &pv)))
                .collect::<Vec<_>>();
            let pos_dir: Vec<BigInt> = pv.iter().map(|x| x * &s).collect();
            let neg_dir: Vec<BigInt> = pos_dir.iter().map(|x| -x).collect();
            for (i, &f) in self.faces.iter().enumerate() {
                let d = adims[i];
                let zero_face = f == Face::ZERO;
                let proj = rays[i].as_ref().map(|r| axpy(&hp.abs(), r, &(-&s * h.eval(r)), &pv));
                push(i, f.with(k, Sign::Neg), d, zero_face.then(|| neg_dir.clone()));
                push(i, f, d - 1, proj);
                push(i, f.with(k, Sign::Pos), d, zero_face.then(|| pos_dir.clone()));
            }
        } else {
            // The new hyperplane contains the lineality space.
            new_lin = lin;
            let hr: Vec<Option<BigInt>> = rays.iter().map(|r| r.as_ref().map(|r| h.eval(r))).collect();
            let line_dim = new_lin.len();
            for (i, &f) in self.faces.iter().enumerate() {
                let d = adims[i];
                let below = &self.rays_below[i];
                let pos_ray = below.iter().find(|&&r| hr[r as usize].as_ref().is_some_and(Signed::is_positive));
                let neg_ray = below.iter().find(|&&r| hr[r as usize].as_ref().is_some_and(Signed::is_negative));
                match (pos_ray, neg_ray) {
                    (None, None) => push(i, f, d, rays[i].clone()),
                    (Some(_), None) => push(i, f.with(k, Sign::Pos), d, rays[i].clone()),
                    (None, Some(_)) => push(i, f.with(k, Sign::Neg), d, rays[i].clone()),
                    (Some(&r1), Some(&r2)) => {
                        let (r1, r2) = (r1 as usize, r2 as usize);
                        let cut = (d == line_dim + 2).then(|| {
                            let (h1, h2) = (hr[r1].as_ref().unwrap(), hr[r2].as_ref().unwrap());
                            axpy(h1, rays[r2].as_ref().unwrap(), &-h2, rays[r1].as_ref().unwrap())
                        });
                        push(i, f.with(k, Sign::Neg), d, None);
                        push(i, f, d - 1, cut);
                        push(i, f.with(k, Sign::Pos), d, None);
                    }
                }
            }
        }
        if faces.len() > self.face_cap {
            return Err(Error::CapExceeded { what: "faces".into(), limit: self.face_cap });
        }
        let ray_list: Vec<usize> = (0..faces.len()).filter(|&i| new_rays[i].is_some()).collect();
        self.rays_below = faces
            .iter()
            .map(|&f| ray_list.iter().filter(|&&r| faces[r].leq(f)).map(|&r| r as u32).collect())
            .collect();
        self.index = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        self.faces = faces;
        self.adims = new_adims;
        self.rays = new_rays;
        self.lineality = new_lin;
        self.dim = dim;
        self.hyperplanes.push(h);
        self.upper = OnceLock::new();
        Ok(parents)
    }

    pub fn empty_cone(&self) -> ConeElem {
        ConeElem(FixedBitSet::with_capacity(self.faces.len()))
    }

    pub fn whole(&self) -> ConeElem {
        let mut s = FixedBitSet::with_capacity(self.faces.len());
        s.insert_range(..);
        ConeElem(s)
    }

    /// All faces except the zero face: the top of `Op⁻`.
    pub fn punctured(&self) -> ConeElem {
        let mut c = self.whole();
        c.0.set(self.zero_face(), false);
        c
    }

    /// The open half-space on side `s` of hyperplane `i`.
    pub fn half_space(&self, i: usize, s: Sign) -> ConeElem {
        self.cone_where(|f| f.sign(i) == s)
    }

    /// Faces satisfying a sign pattern; the empty pattern gives the whole space.
    pub fn basic_open(&self, pattern: &[(usize, Sign)]) -> ConeElem {
        self.cone_where(|f| pattern.iter().all(|&(i, s)| f.sign(i) == s))
    }

    fn cone_where(&self, pred: impl Fn(Face) -> bool) -> ConeElem {
        let mut s = FixedBitSet::with_capacity(self.faces.len());
        for (i, &f) in self.faces.iter().enumerate() {
            if pred(f) {
                s.insert(i);
            }
        }
        ConeElem(s)
    }

    /// The principal up-set of face `i`.
    pub fn star(&self, i: usize) -> ConeElem {
        let f = self.faces[i];
        self.cone_where(|g| f.leq(g))
    }

    pub fn up_closure(&self, s: &FaceSet) -> ConeElem {
        let mut out = FixedBitSet::with_capacity(self.faces.len());
        for j in 0..self.faces.len() {
            if s.ones().any(|i| self.faces[i].leq(self.faces[j])) {
                out.insert(j);
            }
        }
        ConeElem(out)
    }

    pub fn is_up_set(&self, s: &FaceSet) -> bool {
        s.ones().all(|i| self.upper_covers(i).all(|j| s.contains(j)))
    }

    pub fn to_cone(&self, s: FaceSet) -> Option<ConeElem> {
        self.is_up_set(&s).then_some(ConeElem(s))
    }

    pub fn complement(&self, s: &FaceSet) -> FaceSet {
        let mut c = s.clone();
        c.grow(self.faces.len());
        c.toggle_range(..);
        c
    }

    /// Topological closure: the down-closure in the face order.
    pub fn closure(&self, x: &ConeElem) -> FaceSet {
        let mut out = FixedBitSet::with_capacity(self.faces.len());
        for j in 0..self.faces.len() {
            if x.iter().any(|i| self.faces[j].leq(self.faces[i])) {
                out.insert(j);
            }
        }
        out
    }

    /// Largest up-set inside `s`.
    pub fn interior(&self, s: &FaceSet) -> ConeElem {
        let mut out = FixedBitSet::with_capacity(self.faces.len());
        for i in s.ones() {
            let f = self.faces[i];
            if self.faces.iter().enumerate().all(|(j, &g)| !f.leq(g) || s.contains(j)) {
                out.insert(i);
            }
        }
        ConeElem(out)
    }

    pub fn heyting_imp(&self, x: &ConeElem, y: &ConeElem) -> ConeElem {
        let mut s = self.complement(&x.0);
        s.union_with(&y.0);
        self.interior(&s)
    }

    /// Pseudo-difference `x ∖ y`: the up-closure of the faces of `x` outside `y`.
    pub fn pseudo_diff(&self, x: &ConeElem, y: &ConeElem) -> ConeElem {
        let mut s = x.0.clone();
        s.difference_with(&y.0);
        self.up_closure(&s)
    }

    /// Minimal faces of a cone; its join-irreducible components.
    pub fn minimal_faces(&self, x: &ConeElem) -> Vec<usize> {
        x.iter().filter(|&i| !x.iter().any(|j| j != i && self.face_leq(j, i))).collect()
    }

    pub fn render_cone(&self, x: &ConeElem) -> Vec<String> {
        x.iter().map(|i| self.render(i)).collect()
    }

    /// Hyperplanes meeting `u` and the rank of their normals; `∇u` is the
    /// intersection of those hyperplanes, of dimension `dim − rank`.
    pub fn nabla(&self, u: &ConeElem) -> (Vec<usize>, usize) {
        let n = self.len();
        let zeros = u.iter().fold(0u128, |acc, i| acc | self.faces[i].zeros(n));
        let hs: Vec<usize> = (0..n).filter(|&i| zeros >> i & 1 == 1).collect();
        let rows: Vec<Vec<BigInt>> = hs.iter().map(|&i| self.hyperplanes[i].normal.clone()).collect();
        (hs, exact::rank(&rows))
    }

    /// Faces lying in `∇u`.
    pub fn nabla_faces(&self, u: &ConeElem) -> FaceSet {
        let n = self.len();
        let zeros = u.iter().fold(0u128, |acc, i| acc | self.faces[i].zeros(n));
        let mut out = FixedBitSet::with_capacity(self.faces.len());
        for (j, f) in self.faces.iter().enumerate() {
            if f.zeros(n) & zeros == zeros {
                out.insert(j);
            }
        }
        out
    }

    /// The sign pattern defining `p` when `p` is an intersection of open half-spaces.
    pub fn basic_pattern(&self, p: &ConeElem) -> Result<Vec<(usize, Sign)>> {
        if p.is_empty() {
            return Err(Error::NotBasicOpen("empty set".into()));
        }
        let n = self.len();
        let all_pos = p.iter().fold(mask(n), |acc, i| acc & self.faces[i].pos);
        let all_neg = p.iter().fold(mask(n), |acc, i| acc & self.faces[i].neg);
        let pattern: Vec<(usize, Sign)> = (0..n)
            .filter_map(|i| {
                if all_pos >> i & 1 == 1 {
                    Some((i, Sign::Pos))
                } else if all_neg >> i & 1 == 1 {
                    Some((i, Sign::Neg))
                } else {
                    None
                }
            })
            .collect();
        if self.basic_open(&pattern) != *p {
            return Err(Error::NotBasicOpen(format!("{:?}", self.render_cone(p))));
        }
        Ok(pattern)
    }

    /// Join-irreducibility of a basic open set read off its geometry.
    pub fn jirr_geometric(&self, p: &ConeElem) -> Result<JirrInfo> {
        self.basic_pattern(p)?;
        let nabla = self.nabla_faces(p);
        let mut core = p.0.clone();
        core.intersect_with(&nabla);
        if core.is_clear() {
            return Ok(JirrInfo { join_irreducible: false, lower_cover: None, dagger: None });
        }
        let mut lower = p.0.clone();
        lower.difference_with(&core);
        let mut cl = self.closure(p);
        cl.intersect_with(&nabla);
        let dagger = ConeElem(self.complement(&cl));
        Ok(JirrInfo { join_irreducible: true, lower_cover: Some(ConeElem(lower)), dagger: Some(dagger) })
    }

    /// `Op` (or `Op⁻` when `proper`) as a lattice whose join-irreducibles are
    /// the principal up-sets of faces.
    pub fn op_lattice(&self, proper: bool) -> Result<OpLattice> {
        if self.is_empty() {
            return Err(Error::EmptyArrangement);
        }
        let zero = self.zero_face();
        let faces: Vec<usize> = (0..self.faces.len()).filter(|&i| !(proper && i == zero)).collect();
        let labels: Vec<String> = faces.iter().map(|&i| self.render(i)).collect();
        let mut order = Vec::new();
        for (p, &f) in faces.iter().enumerate() {
            for (q, &g) in faces.iter().enumerate() {
                if f != g && self.face_leq(g, f) {
                    order.push((p, q));
                }
            }
        }
        let lattice = FiniteDistLattice::from_ji_poset(labels, &order, DEFAULT_ELEMENT_CAP)?;
        Ok(OpLattice { lattice: Arc::new(lattice), faces, face_count: self.faces.len() })
    }

    /// Up-sets of the face poset in a fixed order, lazily.
    pub fn up_sets(&self, proper: bool) -> UpSets<'_> {
        let mut order: Vec<usize> = (0..self.faces.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(self.adims[i]), i));
        if proper {
            let z = self.zero_face();
            order.retain(|&i| i != z);
        }
        UpSets { arr: self, order, stack: vec![(0, FixedBitSet::with_capacity(self.faces.len()))] }
    }

    /// Lifts a cone along the refinement map returned by [`Arrangement::add`].
    pub fn lift(x: &ConeElem, parents: &[usize]) -> ConeElem {
        let mut s = FixedBitSet::with_capacity(parents.len());
        for (i, &p) in parents.iter().enumerate() {
            if x.contains(p) {
                s.insert(i);
            }
        }
        ConeElem(s)
    }

    /// Rebuilds a cone from rendered sign strings.
    pub fn cone_from_strings(&self, faces: &[String]) -> Result<ConeElem> {
        let mut s = FixedBitSet::with_capacity(self.faces.len());
        for f in faces {
            s.insert(self.parse_face(f)?);
        }
        self.to_cone(s).ok_or_else(|| Error::Input("face list is not up-closed".into()))
    }
}

#[derive(Clone, Debug)]
pub struct JirrInfo {
    pub join_irreducible: bool,
    pub lower_cover: Option<ConeElem>,
    pub dagger: Option<ConeElem>,
}

/// `Op` or `Op⁻` as a lattice; element bit `p` stands for face `faces[p]`.
#[derive(Clone, Debug)]
pub struct OpLattice {
    pub lattice: Arc<FiniteDistLattice>,
    faces: Vec<usize>,
    face_count: usize,
}

impl OpLattice {
    pub fn cone(&self, e: Elem) -> ConeElem {
        let mut s = FixedBitSet::with_capacity(self.face_count);
        for p in e.bits() {
            s.insert(self.faces[p]);
        }
        ConeElem(s)
    }

    pub fn elem(&self, c: &ConeElem) -> Option<Elem> {
        let mut bits = 0u64;
        for i in c.iter() {
            bits |= 1 << self.faces.iter().position(|&f| f == i)?;
        }
        Some(Elem(bits)).filter(|e| self.lattice.contains(*e))
    }
}

/// Depth-first enumeration of up-sets. Faces are decided from the top
/// dimension down, so a face may join only when all its upper covers have.
pub struct UpSets<'a> {
    arr: &'a Arrangement,
    order: Vec<usize>,
    stack: Vec<(usize, FixedBitSet)>,
}

impl Iterator for UpSets<'_> {
    type Item = ConeElem;

    fn next(&mut self) -> Option<ConeElem> {
        while let Some((i, cur)) = self.stack.pop() {
            if i == self.order.len() {
                return Some(ConeElem(cur));
            }
            let f = self.order[i];
            if self.arr.upper_covers(f).all(|g| cur.contains(g)) {
                let mut with = cur.clone();
                with.insert(f);
                self.stack.push((i + 1, with));
            }
            self.stack.push((i + 1, cur));
        }
        None
    }
}
