//! Extending lattice homomorphisms: the free product with `J₂`, the Main
//! Extension Lemma on explicit lattices, and its geometric form on `Op`.

use std::collections::HashSet;
use std::sync::Arc;

use crate::arrangement::{Arrangement, ConeElem, Hyperplane, OpLattice, Sign, SignClass};
use crate::diff::consonance_failure_in;
use crate::error::{Error, Result};
use crate::lattice::{Elem, FiniteDistLattice, HomKind, LatticeHom, DEFAULT_ELEMENT_CAP};

/// `D ∗ J₂`: triples `(x, y, z)` of `D` with `z ≤ x` and `z ≤ y`.
///
/// Its join-irreducibles are three copies `X_p`, `Y_p`, `Z_p` of those of
/// `D`, with `X_p, Y_p ≤ Z_q` whenever `p ≤ q`. The triple `(x, y, z)` is
/// the element with bits `x | y << k | z << 2k`.
#[derive(Clone, Debug)]
pub struct JStar {
    pub base: Arc<FiniteDistLattice>,
    pub lattice: Arc<FiniteDistLattice>,
}

impl JStar {
    pub fn new(d: Arc<FiniteDistLattice>) -> Result<Self> {
        let k = d.ji_count();
        let mut labels = Vec::with_capacity(3 * k);
        for tag in ["x", "y", "z"] {
            labels.extend(d.ji_labels().iter().map(|l| format!("{tag}:{l}")));
        }
        let mut order = Vec::new();
        for p in 0..k {
            for q in 0..k {
                if d.ji_leq(p, q) {
                    if p != q {
                        order.extend([(p, q), (k + p, k + q), (2 * k + p, 2 * k + q)]);
                    }
                    order.extend([(p, 2 * k + q), (k + p, 2 * k + q)]);
                }
            }
        }
        let lattice = FiniteDistLattice::from_ji_poset(labels, &order, DEFAULT_ELEMENT_CAP)?;
        Ok(JStar { base: d, lattice: Arc::new(lattice) })
    }

    fn k(&self) -> usize {
        self.base.ji_count()
    }

    pub fn triple(&self, e: Elem) -> (Elem, Elem, Elem) {
        let k = self.k();
        let m = if k == 0 { 0 } else { (1u64 << k) - 1 };
        (Elem(e.0 & m), Elem(e.0 >> k & m), Elem(e.0 >> (2 * k) & m))
    }

    pub fn elem(&self, x: Elem, y: Elem, z: Elem) -> Elem {
        let k = self.k();
        Elem(x.0 | y.0 << k | z.0 << (2 * k))
    }
}

/// The unique 0,1-homomorphism `D ∗ J₂ → E` sending `(1,0,0)` to `a`,
/// `(0,1,0)` to `b` and `(x,x,x)` to `f(x)`.
pub fn jstar_hom(js: &JStar, f: &LatticeHom, a: Elem, b: Elem) -> Result<LatticeHom> {
    let e = &f.target;
    if !a.meet(b).is_zero() {
        return Err(Error::NotDisjoint);
    }
    LatticeHom::from_fn(js.lattice.clone(), e.clone(), |t| {
        let (x, y, z) = js.triple(t);
        f.apply(x).meet(a).join(f.apply(y).meet(b)).join(f.apply(z))
    })
}

/// Data of the Main Extension Lemma: `D ↪ E`, disjoint `a, b ∈ E`, and a
/// homomorphism `f: D → L`.
#[derive(Clone, Debug)]
pub struct ExtensionProblem {
    pub d: Arc<FiniteDistLattice>,
    pub e: Arc<FiniteDistLattice>,
    /// Image in `E` of each element of `D`, by element index of `D`.
    pub embed: Vec<Elem>,
    pub a: Elem,
    pub b: Elem,
    pub f: LatticeHom,
}

impl ExtensionProblem {
    fn emb(&self, x: Elem) -> Elem {
        self.embed[self.d.index_of(x)]
    }

    fn target(&self) -> &FiniteDistLattice {
        &self.f.target
    }

    /// Checks conditions (i)–(v) and consonance of the range of `f`.
    pub fn validate(&self) -> Result<()> {
        let (d, e) = (&*self.d, &*self.e);
        let violated = |condition: u8, detail: String| Err(Error::PreconditionViolated { condition, detail });
        if self.embed.len() != d.len() || self.embed.iter().any(|&x| !e.contains(x)) {
            return Err(Error::Input("embedding table does not match D and E".into()));
        }
        let emb = LatticeHom::new(self.d.clone(), self.e.clone(), self.embed.clone())
            .map_err(|err| Error::Input(format!("embedding: {err}")))?;
        if emb.kind != HomKind::ZeroOnePreserving || self.embed.iter().collect::<HashSet<_>>().len() != d.len() {
            return Err(Error::Input("embedding is not an injective 0,1-homomorphism".into()));
        }
        if !self.a.meet(self.b).is_zero() {
            return violated(3, "a ∧ b ≠ 0".into());
        }
        let mut gen: HashSet<Elem> = self.embed.iter().copied().chain([self.a, self.b]).collect();
        loop {
            let v: Vec<Elem> = gen.iter().copied().collect();
            let before = gen.len();
            for &x in &v {
                for &y in &v {
                    gen.insert(x.join(y));
                    gen.insert(x.meet(y));
                }
            }
            if gen.len() == before {
                break;
            }
        }
        if gen.len() != e.len() {
            return violated(1, format!("D, a, b generate {} of {} elements", gen.len(), e.len()));
        }
        for &x in d.elements() {
            for &y in d.elements() {
                if e.heyting_imp(self.emb(x), self.emb(y)) != self.emb(d.heyting_imp(x, y)) {
                    return violated(2, format!("{} → {}", d.name(x), d.name(y)));
                }
            }
        }
        let (marked_a, marked_b) = self.marked();
        for p in 0..d.ji_count() {
            let (ep, ps) = (self.emb(d.ji(p)), self.emb(d.lower_cover(p)));
            if ep.leq(ps.join(self.a).join(self.b)) && !marked_a.contains(&p) && !marked_b.contains(&p) {
                return violated(4, d.ji_labels()[p].clone());
            }
        }
        for &p in &marked_a {
            for &q in &marked_b {
                if d.ji_leq(p, q) || d.ji_leq(q, p) {
                    return violated(5, format!("{} and {}", d.ji_labels()[p], d.ji_labels()[q]));
                }
            }
        }
        let range: Vec<Elem> = self.f.table().iter().copied().collect::<HashSet<_>>().into_iter().collect();
        if let Some((x, y)) = consonance_failure_in(self.target(), &range) {
            let l = self.target();
            return Err(Error::NotConsonantRange(l.name(x).into(), l.name(y).into()));
        }
        Ok(())
    }

    /// Join-irreducibles `p` of `D` with `p ≤ p_* ∨ a`, and those with `p ≤ p_* ∨ b`.
    fn marked(&self) -> (Vec<usize>, Vec<usize>) {
        let d = &self.d;
        let side = |t: Elem| -> Vec<usize> {
            (0..d.ji_count()).filter(|&p| self.emb(d.ji(p)).leq(self.emb(d.lower_cover(p)).join(t))).collect()
        };
        (side(self.a), side(self.b))
    }

    /// `f_*(t) = ⋁ { f(p) ∖ f(p_*) : p ∈ Ji D, p ≤ p_* ∨ t }`.
    pub fn f_star(&self, t: Elem) -> Elem {
        let (d, l) = (&self.d, self.target());
        l.join_all((0..d.ji_count()).filter(|&p| self.emb(d.ji(p)).leq(self.emb(d.lower_cover(p)).join(t))).map(|p| {
            l.pseudo_diff(self.f.apply(d.ji(p)), self.f.apply(d.lower_cover(p)))
        }))
    }

    /// `f^*(t) = ⋀ { f(x) : x ∈ D, t ≤ x }`.
    pub fn f_upper(&self, t: Elem) -> Elem {
        let l = self.target();
        l.meet_all(self.d.elements().iter().filter(|&&x| t.leq(self.emb(x))).map(|&x| self.f.apply(x)))
    }

    pub fn admissible(&self, alpha: Elem, beta: Elem) -> bool {
        self.f_star(self.a).leq(alpha)
            && alpha.leq(self.f_upper(self.a))
            && self.f_star(self.b).leq(beta)
            && beta.leq(self.f_upper(self.b))
            && alpha.meet(beta).is_zero()
    }

    /// Writes `t = (x ∧ a) ∨ (y ∧ b) ∨ z` with `x, y, z ∈ D` as large as possible.
    pub fn canonical_form(&self, t: Elem) -> (Elem, Elem, Elem) {
        let d = &self.d;
        let largest = |pred: &dyn Fn(Elem) -> bool| d.join_all(d.elements().iter().copied().filter(|&x| pred(self.emb(x))));
        let x = largest(&|ex| ex.meet(self.a).leq(t));
        let y = largest(&|ex| ex.meet(self.b).leq(t));
        let z = largest(&|ex| ex.leq(t));
        (x, y, z)
    }

    /// The homomorphism `g: E → L` extending `f` with `g(a) = α`, `g(b) = β`.
    pub fn main_extend(&self, alpha: Elem, beta: Elem) -> Result<LatticeHom> {
        self.validate()?;
        if !self.admissible(alpha, beta) {
            let l = self.target();
            return Err(Error::NotAdmissible(format!("({}, {})", l.name(alpha), l.name(beta))));
        }
        let l = self.f.target.clone();
        LatticeHom::from_fn(self.e.clone(), l, |t| {
            let (x, y, z) = self.canonical_form(t);
            self.f.apply(x).meet(alpha).join(self.f.apply(y).meet(beta)).join(self.f.apply(z))
        })
    }
}

/// A 0-lattice homomorphism `Op(A) → L`, stored by its values
/// `φ(F) = f(↑F)` on faces; `f(U)` is the join of `φ` over `U`.
#[derive(Clone, Debug)]
pub struct OpHom {
    pub arr: Arrangement,
    pub target: Arc<FiniteDistLattice>,
    phi: Vec<Elem>,
}

impl OpHom {
    pub fn new(arr: Arrangement, target: Arc<FiniteDistLattice>, phi: Vec<Elem>) -> Result<Self> {
        let h = Self::new_unchecked(arr, target, phi)?;
        if let Some(msg) = h.violation() {
            return Err(Error::NotAHomomorphism(msg));
        }
        Ok(h)
    }

    pub fn new_unchecked(arr: Arrangement, target: Arc<FiniteDistLattice>, phi: Vec<Elem>) -> Result<Self> {
        if phi.len() != arr.face_count() || phi.iter().any(|&x| !target.contains(x)) {
            return Err(Error::Input("face table does not match arrangement and target".into()));
        }
        Ok(OpHom { arr, target, phi })
    }

    /// The map sending every nonempty basic open of `{Δ₀}` to `a` on the
    /// positive side and `0` on the negative side, and `𝔼` to the top.
    pub fn initial(target: Arc<FiniteDistLattice>, a: Elem) -> Result<Self> {
        let arr = Arrangement::from_hyperplanes([Hyperplane::coordinate(0)], crate::arrangement::DEFAULT_FACE_CAP)?;
        let top = target.top();
        let phi = (0..3).map(|i| match arr.face(i).sign(0) {
            Sign::Pos => a,
            Sign::Neg => Elem::ZERO,
            Sign::Zero => top,
        }).collect();
        Self::new(arr, target, phi)
    }

    pub fn phi(&self, face: usize) -> Elem {
        self.phi[face]
    }

    pub fn phis(&self) -> &[Elem] {
        &self.phi
    }

    pub fn apply(&self, u: &ConeElem) -> Elem {
        self.target.join_all(u.iter().map(|i| self.phi[i]))
    }

    pub fn kind(&self) -> HomKind {
        if self.phi[self.arr.zero_face()] == self.target.top() {
            HomKind::ZeroOnePreserving
        } else {
            HomKind::ZeroPreserving
        }
    }

    /// Homomorphism test: `φ` antitone, and for each join-irreducible `q`
    /// of `L` the faces with `q ≤ φ(F)` form an empty or principal down-set.
    pub fn violation(&self) -> Option<String> {
        let (a, l) = (&self.arr, &*self.target);
        for i in 0..a.face_count() {
            for j in a.upper_covers(i) {
                if !self.phi[j].leq(self.phi[i]) {
                    return Some(format!("value at {} is not below value at {}", a.render(j), a.render(i)));
                }
            }
        }
        for q in 0..l.ji_count() {
            let sq: Vec<usize> = (0..a.face_count()).filter(|&i| self.phi[i].contains(q)).collect();
            let top = sq.iter().copied().find(|&i| sq.iter().all(|&j| a.face_leq(j, i)));
            if !sq.is_empty() && top.is_none() {
                return Some(format!("preimage of {} is not a filter", l.ji_labels()[q]));
            }
        }
        None
    }

    /// Restriction to `Op(A)` or `Op⁻(A)` as an explicit lattice homomorphism.
    pub fn to_lattice_hom(&self, proper: bool) -> Result<(OpLattice, LatticeHom)> {
        let op = self.arr.op_lattice(proper)?;
        let table = op.lattice.elements().iter().map(|&e| self.apply(&op.cone(e))).collect();
        let h = LatticeHom::new_unchecked(op.lattice.clone(), self.target.clone(), table)?;
        Ok((op, h))
    }

    /// The range on `Op⁻`: joins of values on nonzero faces.
    pub fn proper_range(&self) -> Vec<Elem> {
        let z = self.arr.zero_face();
        let mut range: HashSet<Elem> = HashSet::from([Elem::ZERO]);
        for (i, &v) in self.phi.iter().enumerate() {
            if i != z {
                let grown: Vec<Elem> = range.iter().map(|&r| r.join(v)).collect();
                range.extend(grown);
            }
        }
        let mut out: Vec<Elem> = range.into_iter().collect();
        out.sort_by_key(|&e| self.target.index_of(e));
        out
    }

    pub fn range(&self) -> Vec<Elem> {
        let mut r = self.proper_range();
        let whole = self.phi[self.arr.zero_face()];
        if !r.contains(&whole) {
            r.push(whole);
        }
        r
    }

    /// Whether `x` is the image of some element of `Op⁻`.
    pub fn attains(&self, x: Elem) -> bool {
        let z = self.arr.zero_face();
        let below = self.phi.iter().enumerate().filter(|&(i, v)| i != z && v.leq(x)).map(|(_, &v)| v);
        self.target.join_all(below) == x
    }

    /// First nonzero face `F` where `φ(F) ∖ f(↑F†) ≠ φ(F)` on `Op⁻`; the
    /// restriction to `Op⁻` is closed exactly when there is none.
    pub fn closure_defect(&self) -> Option<usize> {
        let (a, l) = (&self.arr, &*self.target);
        let z = a.zero_face();
        (0..a.face_count()).filter(|&i| i != z).find(|&i| {
            let dagger = l.join_all((0..a.face_count()).filter(|&j| j != z && !a.face_leq(j, i)).map(|j| self.phi[j]));
            l.pseudo_diff(self.phi[i], dagger) != self.phi[i]
        })
    }

    /// `f(↑F ∖ {F})`.
    fn below_star(&self, i: usize) -> Elem {
        self.target.join_all(self.arr.upper_covers(i).map(|j| self.phi[j]))
    }

    /// `f_*` and `f^*` at both open sides of a hyperplane not yet in the arrangement.
    pub fn bounds(&self, k: &Hyperplane) -> HalfSpaceBounds {
        let l = &*self.target;
        let classes = self.arr.classify(k.normal());
        let lower = |side: SignClass| {
            l.join_all((0..classes.len()).filter(|&i| classes[i] == side).map(|i| l.pseudo_diff(self.phi[i], self.below_star(i))))
        };
        let upper = |side: SignClass| {
            l.join_all((0..classes.len()).filter(|&i| classes[i] == side || classes[i] == SignClass::Both).map(|i| self.phi[i]))
        };
        HalfSpaceBounds {
            pos_lower: lower(SignClass::Pos),
            pos_upper: upper(SignClass::Pos),
            neg_lower: lower(SignClass::Neg),
            neg_upper: upper(SignClass::Neg),
            classes,
        }
    }

    fn check_consonant_range(&self) -> Result<()> {
        if let Some((x, y)) = consonance_failure_in(&self.target, &self.range()) {
            return Err(Error::NotConsonantRange(self.target.name(x).into(), self.target.name(y).into()));
        }
        Ok(())
    }

    /// Extends to `Op(A ∪ {K})` with `K⁺ ↦ f_*(K⁺)` and `K⁻ ↦ f_*(K⁻)`.
    pub fn extend(&self, k: Hyperplane) -> Result<OpHom> {
        let b = self.bounds(&k);
        self.extend_with(k, b.pos_lower, b.neg_lower)
    }

    /// Extends to `Op(A ∪ {K})` with `K⁺ ↦ α` and `K⁻ ↦ β` for an admissible pair.
    pub fn extend_with(&self, k: Hyperplane, alpha: Elem, beta: Elem) -> Result<OpHom> {
        if self.arr.position(&k).is_some() {
            return Err(Error::DuplicateHyperplane(k.to_string()));
        }
        self.check_consonant_range()?;
        let b = self.bounds(&k);
        let a = &self.arr;
        // Conditions (iv) and (v) read off the sign classes: relatively open
        // faces never straddle the hyperplane without meeting it.
        for i in 0..a.face_count() {
            if b.classes[i] == SignClass::Neg {
                if let Some(j) = (0..a.face_count()).find(|&j| b.classes[j] == SignClass::Pos && (a.face_leq(i, j) || a.face_leq(j, i))) {
                    return Err(Error::PreconditionViolated { condition: 5, detail: format!("{} and {}", a.render(i), a.render(j)) });
                }
            }
        }
        let l = &*self.target;
        if !(b.pos_lower.leq(alpha) && alpha.leq(b.pos_upper) && b.neg_lower.leq(beta) && beta.leq(b.neg_upper) && alpha.meet(beta).is_zero()) {
            return Err(Error::NotAdmissible(format!("({}, {})", l.name(alpha), l.name(beta))));
        }
        self.split(k, alpha, beta)
    }

    /// Adjoins the coordinate hyperplane `Δᵢ` with `Δᵢ⁺ ↦ a` and `Δᵢ⁻ ↦ b`.
    pub fn adjoin_indep(&self, i: usize, a: Elem, b: Elem) -> Result<OpHom> {
        if self.arr.support().contains(&i) {
            return Err(Error::CoordinateInSupport(i));
        }
        if !a.meet(b).is_zero() {
            return Err(Error::NotDisjoint);
        }
        if self.kind() != HomKind::ZeroOnePreserving {
            return Err(Error::NotAHomomorphism("adjoining requires a 0,1-homomorphism".into()));
        }
        self.split(Hyperplane::coordinate(i), a, b)
    }

    /// Face values after adding `k`: `↑(F,0)` is the lift of `↑F`, and
    /// `↑(F,±)` is that lift cut by the open half-space.
    fn split(&self, k: Hyperplane, alpha: Elem, beta: Elem) -> Result<OpHom> {
        let mut arr = self.arr.clone();
        let parents = arr.add(k)?;
        let last = arr.len() - 1;
        let phi = parents
            .iter()
            .enumerate()
            .map(|(i, &p)| match arr.face(i).sign(last) {
                Sign::Zero => self.phi[p],
                Sign::Pos => self.phi[p].meet(alpha),
                Sign::Neg => self.phi[p].meet(beta),
            })
            .collect();
        Ok(OpHom { arr, target: self.target.clone(), phi })
    }

    /// Whether `self` restricts to `old` on the older arrangement, whose
    /// hyperplanes must form a prefix of the current ones.
    pub fn extends(&self, old: &OpHom) -> bool {
        let (a, b) = (&self.arr, &old.arr);
        if a.hyperplanes().get(..b.len()) != Some(b.hyperplanes()) {
            return false;
        }
        let m = crate::arrangement::mask(b.len());
        let l = &*self.target;
        // The lift of `↑G` is the set of faces projecting into `↑G`.
        let mut acc = vec![Elem::ZERO; b.face_count()];
        for i in 0..a.face_count() {
            let h = a.face(i);
            let Some(p) = b.face_index(crate::arrangement::Face { pos: h.pos & m, neg: h.neg & m }) else { return false };
            acc[p] = acc[p].join(self.phi[i]);
        }
        let mut order: Vec<usize> = (0..b.face_count()).collect();
        order.sort_by_key(|&g| std::cmp::Reverse(b.face_dim(g)));
        for g in order {
            acc[g] = l.join_all(b.upper_covers(g).map(|c| acc[c]).chain([acc[g]]));
        }
        acc == old.phi
    }
}

/// Bounds `f_* ≤ g ≤ f^*` on the two open sides of a new hyperplane, with
/// the sign class of every face.
#[derive(Clone, Debug)]
pub struct HalfSpaceBounds {
    pub pos_lower: Elem,
    pub pos_upper: Elem,
    pub neg_lower: Elem,
    pub neg_upper: Elem,
    pub classes: Vec<SignClass>,
}

/// `ε(X, Y, Z) = (X ∩ Δ⁺) ∪ (Y ∩ Δ⁻) ∪ Z`, from `Op(A) ∗ J₂` to
/// `Op(A ∪ {Δ})`, where the new hyperplane is the last one of `after`.
pub fn epsilon(after: &Arrangement, parents: &[usize], x: &ConeElem, y: &ConeElem, z: &ConeElem) -> ConeElem {
    let last = after.len() - 1;
    let (lx, ly, lz) = (Arrangement::lift(x, parents), Arrangement::lift(y, parents), Arrangement::lift(z, parents));
    let sides = lx.intersection(&after.half_space(last, Sign::Pos)).union(&ly.intersection(&after.half_space(last, Sign::Neg)));
    sides.union(&lz)
}
