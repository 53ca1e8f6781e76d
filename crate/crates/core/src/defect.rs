//! Repairing closure defects by adding hyperplanes `ker(a − m·b)`.
//!
//! For a join-irreducible `P = ↑F` of `Op(A)`, `cl(P) ∩ ∇P` is the closed
//! face `cl(F)`, generated by the lineality space and the rays below `F`.
//! By Farkas, `⟦y > 0⟧ ⊆ P†` iff `−y ≥ 0` on those generators, so
//! `C_m⁻ ⊆ P†` iff `λ·a(r) ≥ b(r)` at `λ = 1/m` for every ray `r ≤ F`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arrangement::{normalize, Arrangement, ConeElem, Hyperplane, JsonInt, Sign};
use crate::diff::cn_failure;
use crate::error::{Error, Result};
use crate::extension::OpHom;
use crate::lattice::Elem;

pub type Functional = Vec<BigInt>;

/// The functional `s·n` whose positive side is the half-space `(i, s)`.
pub fn half_space_functional(arr: &Arrangement, i: usize, s: Sign) -> Functional {
    let n = arr.hyperplanes()[i].normal();
    match s {
        Sign::Neg => n.iter().map(|x| -x).collect(),
        _ => n.to_vec(),
    }
}

fn kernel_index(arr: &Arrangement, c: &[BigInt]) -> Result<usize> {
    let h = normalize(c)?;
    arr.position(&h).ok_or_else(|| Error::KernelNotInArrangement(h.to_string()))
}

/// `{λ ∈ (0,1] : −b + λa ∈ K_P}` for `P = ↑F`, when `P` lies in `𝒫`
/// (that is, `−b ∉ K_P`). `None` if `P ∉ 𝒫`; `Some(None)` if the interval is empty.
pub fn lambda_interval(arr: &Arrangement, face: usize, a: &[BigInt], b: &[BigInt]) -> Option<Option<(BigRational, BigRational)>> {
    let vals: Vec<(BigInt, BigInt)> = arr
        .rays_below(face)
        .map(|r| {
            let x = arr.ray_rep(r).expect("ray");
            (crate::exact::dot_int(a, x), crate::exact::dot_int(b, x))
        })
        .collect();
    if !vals.iter().any(|(_, bv)| bv.is_positive()) {
        return None;
    }
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    for (av, bv) in vals {
        let ratio = || BigRational::new(bv.clone(), av.clone());
        if av.is_positive() {
            lo = lo.max(ratio());
        } else if av.is_negative() {
            hi = hi.min(ratio());
        } else if bv.is_positive() {
            return Some(None);
        }
    }
    Some((lo <= hi).then_some((lo, hi)))
}

/// Least `m₀ ≥ 1` such that for all `m ≥ m₀` and every join-irreducible
/// `P` of `Op(A)`, `C_m⁻ ⊆ P†` implies `B⁺ ⊆ P†`.
pub fn compute_m0(arr: &Arrangement, a: &[BigInt], b: &[BigInt]) -> Result<u64> {
    kernel_index(arr, a)?;
    kernel_index(arr, b)?;
    let mut worst = 0u64;
    for face in 0..arr.face_count() {
        let Some(Some((lo, hi))) = lambda_interval(arr, face, a, b) else { continue };
        // Largest m with lo ≤ 1/m ≤ hi; lo > 0 because some ray has b > 0.
        let m = (lo.recip()).floor().to_integer();
        if BigRational::from_integer(m.clone()) * &hi >= BigRational::one() {
            worst = worst.max(m.to_u64().expect("threshold fits in u64"));
        }
    }
    Ok(worst + 1)
}

/// Outcome of one pair correction.
#[derive(Clone, Debug)]
pub struct PairCorrection {
    pub hom: OpHom,
    pub m0: u64,
    pub added: Option<Hyperplane>,
}

/// `g(A⁺ ∖ B⁺)` with the pseudo-difference taken in `Op(A)`.
fn diff_value(f: &OpHom, x: &ConeElem, y: &ConeElem) -> Elem {
    f.target.join_all(x.iter().filter(|&i| !y.contains(i)).map(|i| f.phi(i)))
}

fn positive_side(arr: &Arrangement, c: &[BigInt]) -> Result<ConeElem> {
    let i = kernel_index(arr, c)?;
    // Normal forms have a positive leading entry.
    let s = if c.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_positive) { Sign::Pos } else { Sign::Neg };
    Ok(arr.half_space(i, s))
}

/// Whether `g(A⁺ ∖ B⁺) = g(A⁺) ∖ g(B⁺)` already holds.
pub fn pair_identity_holds(f: &OpHom, a: &[BigInt], b: &[BigInt]) -> Result<bool> {
    let (ap, bp) = (positive_side(&f.arr, a)?, positive_side(&f.arr, b)?);
    let l = &f.target;
    Ok(diff_value(f, &ap, &bp) == l.pseudo_diff(f.apply(&ap), f.apply(&bp)))
}

/// Adds `C_m = ker(a − m₀·b)` by the geometric extension step, so that
/// `g(A⁺ ∖ B⁺) = f(A⁺) ∖ f(B⁺)`. A no-op when `C_m` is already present.
pub fn correct_pair(f: &OpHom, a: &[BigInt], b: &[BigInt]) -> Result<PairCorrection> {
    let m0 = compute_m0(&f.arr, a, b)?;
    let m = BigInt::from(m0);
    let c: Vec<BigInt> = (0..a.len().max(b.len()))
        .map(|i| a.get(i).cloned().unwrap_or_default() - &m * b.get(i).cloned().unwrap_or_default())
        .collect();
    let (hom, added) = match normalize(&c) {
        Ok(h) if f.arr.position(&h).is_none() => (f.extend(h.clone())?, Some(h)),
        _ => (f.clone(), None),
    };
    if !pair_identity_holds(&hom, a, b)? {
        return Err(Error::PostconditionFailed(format!("pair identity after adding C_{m0}")));
    }
    Ok(PairCorrection { hom, m0, added })
}

/// One step of [`correct_defect`]: the ordered pair of half-spaces and what was done.
#[derive(Clone, Debug)]
pub struct PairStep {
    pub a: (Hyperplane, Sign),
    pub b: (Hyperplane, Sign),
    pub m0: u64,
    pub added: Option<Hyperplane>,
}

#[derive(Clone, Debug)]
pub struct DefectCorrection {
    pub hom: OpHom,
    pub w: ConeElem,
    pub steps: Vec<PairStep>,
}

impl DefectCorrection {
    pub fn certificate(&self) -> Value {
        let sym = |s: Sign| s.symbol().to_string();
        json!({
            "m0": self.steps.iter().map(|s| s.m0).collect::<Vec<_>>(),
            "pairs": self.steps.iter().map(|s| json!([[s.a.0, sym(s.a.1)], [s.b.0, sym(s.b.1)]])).collect::<Vec<_>>(),
            "added": self.steps.iter().filter_map(|s| s.added.as_ref()).collect::<Vec<_>>(),
            "W": self.hom.arr.render_cone(&self.w),
            "checked": true,
        })
    }
}

/// Lifts a cone of `old` into `new`, whose hyperplanes extend those of `old`.
pub fn lift_cone(old: &Arrangement, new: &Arrangement, x: &ConeElem) -> ConeElem {
    let m = crate::arrangement::mask(old.len());
    let faces: fixedbitset::FixedBitSet = (0..new.face_count())
        .filter(|&i| {
            let f = new.face(i);
            let prefix = crate::arrangement::Face { pos: f.pos & m, neg: f.neg & m };
            old.face_index(prefix).is_some_and(|j| x.contains(j))
        })
        .collect();
    let mut s = faces;
    s.grow(new.face_count());
    new.to_cone(s).expect("lift of an up-set is an up-set")
}

/// Given `f(U) ≤ f(V) ∨ γ` on `Op⁻(A)`, grows the arrangement until
/// `W = U ∖ V` in `Op⁻(A')` satisfies `g(W) ≤ γ`.
pub fn correct_defect(f: &OpHom, u: &ConeElem, v: &ConeElem, gamma: Elem) -> Result<DefectCorrection> {
    let l = f.target.clone();
    if let Some((x, y)) = cn_failure(&l) {
        return Err(Error::NotCompletelyNormal(l.name(x).into(), l.name(y).into()));
    }
    let z = f.arr.zero_face();
    if u.contains(z) || v.contains(z) {
        return Err(Error::Input("defect sets must lie in Op⁻".into()));
    }
    if !f.apply(u).leq(f.apply(v).join(gamma)) {
        return Err(Error::DefectPremiseFails);
    }
    let mut halves: Vec<(Hyperplane, Sign, usize)> = f
        .arr
        .hyperplanes()
        .iter()
        .enumerate()
        .flat_map(|(i, h)| [(h.clone(), Sign::Neg, i), (h.clone(), Sign::Pos, i)])
        .collect();
    halves.sort();
    let mut g = f.clone();
    let mut steps = Vec::new();
    for (ha, sa, ia) in &halves {
        for (hb, sb, ib) in &halves {
            let a = half_space_functional(&f.arr, *ia, *sa);
            let b = half_space_functional(&f.arr, *ib, *sb);
            if pair_identity_holds(&g, &a, &b)? {
                continue;
            }
            let pc = correct_pair(&g, &a, &b)?;
            steps.push(PairStep { a: (ha.clone(), *sa), b: (hb.clone(), *sb), m0: pc.m0, added: pc.added });
            g = pc.hom;
        }
    }
    let (u2, v2) = (lift_cone(&f.arr, &g.arr, u), lift_cone(&f.arr, &g.arr, v));
    let w = g.arr.pseudo_diff(&u2, &v2);
    if !u2.is_subset(&v2.union(&w)) {
        return Err(Error::PostconditionFailed("U ⊄ V ∪ W".into()));
    }
    if !g.apply(&w).leq(gamma) {
        return Err(Error::PostconditionFailed(format!("g(W) = {} exceeds γ = {}", l.name(g.apply(&w)), l.name(gamma))));
    }
    Ok(DefectCorrection { hom: g, w, steps })
}

/// Numbers of a functional for JSON output.
pub fn functional_json(c: &[BigInt]) -> Value {
    Value::Array(c.iter().map(|x| serde_json::to_value(JsonInt(x)).expect("integer")).collect())
}
