//! Round-robin construction of a 0,1-lattice homomorphism from `Op(A)` onto a
//! finite completely normal lattice, and certification of the result.
//!
//! Round `n = 3m` adjoins a fresh coordinate hyperplane whose positive side
//! maps to the generator `a_m`; round `3m + 1` adds the next integral
//! hyperplane; round `3m + 2` repairs the next scheduled defect triples.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arrangement::{normalize, Arrangement, ConeElem, Hyperplane, DEFAULT_FACE_CAP, MAX_HYPERPLANES};
use crate::defect::{correct_defect, lift_cone};
use crate::diff::{cn_failure, Report, Status};
use crate::error::{Error, Result};
use crate::extension::OpHom;
use crate::json::{arrangement_to_json, lattice_to_json, parse_lattice, parse_normals};
use crate::lattice::{Elem, FiniteDistLattice, DEFAULT_ELEMENT_CAP};

/// Resource limits. Hitting one stops the builder with a log entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub faces: usize,
    pub hyperplanes: usize,
    pub elements: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { faces: DEFAULT_FACE_CAP, hyperplanes: MAX_HYPERPLANES, elements: DEFAULT_ELEMENT_CAP }
    }
}

impl std::str::FromStr for Caps {
    type Err = Error;

    /// `faces=N,hyperplanes=N,elements=N`, any subset.
    fn from_str(s: &str) -> Result<Caps> {
        let mut caps = Caps::default();
        for part in s.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| Error::Input(format!("cap {part} is not key=value")))?;
            let v: usize = v.parse().map_err(|_| Error::Input(format!("cap {part} has a bad value")))?;
            match k.trim() {
                "faces" => caps.faces = v,
                "hyperplanes" => caps.hyperplanes = v.min(MAX_HYPERPLANES),
                "elements" => caps.elements = v,
                other => return Err(Error::Input(format!("unknown cap {other}"))),
            }
        }
        Ok(caps)
    }
}

/// Canonical integral normals in strata `h = max(width, ‖n‖₁)`, each
/// stratum ordered by width, then `‖n‖₁`, then lexicographically.
#[derive(Clone, Debug, Default)]
pub struct HyperplaneStream {
    stratum: usize,
    buf: VecDeque<Hyperplane>,
}

impl HyperplaneStream {
    fn fill(&mut self) {
        while self.buf.is_empty() {
            self.stratum += 1;
            let h = self.stratum;
            let mut found: Vec<(usize, i64, Hyperplane)> = Vec::new();
            for w in 1..=h {
                let mut cur = Vec::with_capacity(w);
                vectors(w, h as i64, &mut cur, &mut |v: &[i64]| {
                    let l1: i64 = v.iter().map(|x| x.abs()).sum();
                    if v[w - 1] == 0 || w.max(l1 as usize) != h {
                        return;
                    }
                    let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                    let hp = normalize(&big).expect("nonzero");
                    if hp.normal() == big.as_slice() {
                        found.push((w, l1, hp));
                    }
                });
            }
            found.sort();
            self.buf.extend(found.into_iter().map(|(_, _, hp)| hp));
        }
    }
}

/// Calls `f` on every integer vector of length `w` with `‖v‖₁ ≤ budget`.
fn vectors(w: usize, budget: i64, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if cur.len() == w {
        f(cur);
        return;
    }
    for x in -budget..=budget {
        cur.push(x);
        vectors(w, budget - x.abs(), cur, f);
        cur.pop();
    }
}

impl Iterator for HyperplaneStream {
    type Item = Hyperplane;

    fn next(&mut self) -> Option<Hyperplane> {
        self.fill();
        self.buf.pop_front()
    }
}

pub fn enumerate_hyperplanes(budget: usize) -> Vec<Hyperplane> {
    HyperplaneStream::default().take(budget).collect()
}

/// The pair `(i, j)` at position `p` of the square-shell order: shell `s`
/// holds the pairs with `max(i, j) = s`, so shells grow by `2s + 1`.
fn shell_pair(p: usize) -> (usize, usize) {
    let s = p.isqrt();
    let r = p - s * s;
    if r == 2 * s {
        (s, s)
    } else if r.is_multiple_of(2) {
        (r / 2, s)
    } else {
        (s, r / 2)
    }
}

/// Pairs `(U, V)` over `Op⁻` of the arrangement made of the first `prefix`
/// hyperplanes: first `(↑F, F†)` for every nonzero face `F`, then all pairs
/// of up-sets in shell order. Each pair stands for the triples `(U, V, γ)`
/// over all `γ`; only `γ = f(U) ∖ f(V)` needs work.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub prefix: usize,
    pub consumed: usize,
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cursors {
    /// Index into the hyperplane stream of the next candidate.
    pub next_hyperplane: usize,
    /// Number of triples drawn so far.
    pub next_triple: usize,
    /// Round-robin position over segments.
    pub next_segment: usize,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleAction {
    AlreadyClosed,
    Repaired,
}

/// A processed triple, with `U` and `V` rendered in the prefix arrangement.
/// Scheduled triples carry their index; a priority repair of the current
/// closure defect has none.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedTriple {
    pub index: Option<usize>,
    pub prefix: usize,
    pub u: Vec<String>,
    pub v: Vec<String>,
    pub gamma: String,
    pub action: TripleAction,
}

/// The builder state after some number of rounds.
#[derive(Clone, Debug)]
pub struct RepState {
    pub target: Arc<FiniteDistLattice>,
    pub generators: Vec<Elem>,
    pub caps: Caps,
    pub round: usize,
    pub hom: OpHom,
    pub cursors: Cursors,
    pub processed: Vec<ProcessedTriple>,
    pub log: Vec<Value>,
    pub stopped: Option<String>,
    prefixes: RefCell<HashMap<usize, Arrangement>>,
}

/// `F† = ⋃ {↑G : G ≠ 0, G ≰ F}`, the largest cone of `Op⁻` not containing `F`.
pub fn dagger(a: &Arrangement, f: usize) -> ConeElem {
    let z = a.zero_face();
    (0..a.face_count()).filter(|&g| g != z && !a.face_leq(g, f)).fold(a.empty_cone(), |acc, g| acc.union(&a.star(g)))
}

/// Join-irreducibles in a linear extension: by size of principal down-set, then index.
pub fn default_generators(l: &FiniteDistLattice) -> Vec<Elem> {
    let mut ji: Vec<usize> = (0..l.ji_count()).collect();
    ji.sort_by_key(|&i| (l.ji(i).0.count_ones(), i));
    ji.into_iter().map(|i| l.ji(i)).collect()
}

impl RepState {
    /// Checks complete normality and sets up `f₀(Δ₀⁺) = a₀`, `f₀(Δ₀⁻) = 0`.
    pub fn new(l: &FiniteDistLattice, generators: Option<Vec<Elem>>, caps: Caps) -> Result<RepState> {
        if let Some((x, y)) = cn_failure(l) {
            return Err(Error::NotCompletelyNormal(l.name(x).into(), l.name(y).into()));
        }
        let generators = generators.unwrap_or_else(|| default_generators(l));
        if let Some(g) = generators.iter().find(|g| !l.contains(**g)) {
            return Err(Error::Input(format!("generator {g:?} is not an element")));
        }
        // Element names must survive the state file, so keep the canonical
        // form; it has the same join-irreducibles in the same order.
        let canon = parse_lattice(&lattice_to_json(l), caps.elements)?.lattice;
        let target = Arc::new(canon);
        let a0 = generators.first().copied().unwrap_or(Elem::ZERO);
        let mut hom = OpHom::initial(target.clone(), a0)?;
        hom.arr.set_face_cap(caps.faces);
        let log = vec![
            json!({ "round": null, "step": "bound", "note": "finite target already has a top; identity reduction" }),
            json!({ "round": null, "step": "initial", "hyperplane": hom.arr.hyperplanes()[0], "positive": target.name(a0) }),
        ];
        Ok(RepState {
            target,
            generators,
            caps,
            round: 0,
            hom,
            cursors: Cursors { next_hyperplane: 0, next_triple: 0, next_segment: 0, segments: Vec::new() },
            processed: Vec::new(),
            log,
            stopped: None,
            prefixes: RefCell::new(HashMap::new()),
        })
    }

    fn name(&self, e: Elem) -> String {
        self.target.name(e).to_string()
    }

    /// Replaces the hom after checking that it extends the current one.
    fn advance(&mut self, next: OpHom) -> Result<()> {
        if !next.extends(&self.hom) {
            return Err(Error::PostconditionFailed(format!("round {} does not extend the previous map", self.round)));
        }
        if let Some(msg) = next.violation() {
            return Err(Error::PostconditionFailed(format!("round {}: {msg}", self.round)));
        }
        self.hom = next;
        Ok(())
    }

    /// Runs one round, unless a cap already stopped the builder.
    pub fn step(&mut self) -> Result<()> {
        if self.stopped.is_some() {
            return Ok(());
        }
        let outcome = match self.round % 3 {
            0 => self.adjoin_generator(),
            1 => self.add_next_hyperplane(),
            _ => self.repair_triples(),
        };
        match outcome {
            Err(Error::CapExceeded { what, limit }) => {
                let reason = format!("{what} cap {limit} reached");
                self.log.push(json!({ "round": self.round, "step": "stop", "reason": reason }));
                self.stopped = Some(reason);
                Ok(())
            }
            Err(e) => Err(e),
            Ok(()) => {
                self.round += 1;
                Ok(())
            }
        }
    }

    fn check_hyperplane_cap(&self) -> Result<()> {
        if self.hom.arr.len() >= self.caps.hyperplanes {
            return Err(Error::CapExceeded { what: "hyperplanes".into(), limit: self.caps.hyperplanes });
        }
        Ok(())
    }

    fn adjoin_generator(&mut self) -> Result<()> {
        let (n, m) = (self.round, self.round / 3);
        let Some(&a) = self.generators.get(m) else {
            self.log.push(json!({ "round": n, "step": "generator", "action": "none", "note": "generators exhausted" }));
            return Ok(());
        };
        if self.hom.attains(a) {
            self.log.push(json!({ "round": n, "step": "generator", "action": "none", "generator": self.name(a), "note": "already attained" }));
            return Ok(());
        }
        self.check_hyperplane_cap()?;
        let support = self.hom.arr.support();
        let i = (0..).find(|i| !support.contains(i)).expect("finite support");
        let next = self.hom.adjoin_indep(i, a, Elem::ZERO)?;
        self.advance(next)?;
        self.log.push(json!({ "round": n, "step": "generator", "action": "adjoin", "coordinate": i, "generator": self.name(a) }));
        Ok(())
    }

    fn add_next_hyperplane(&mut self) -> Result<()> {
        self.check_hyperplane_cap()?;
        let mut stream = HyperplaneStream::default().skip(self.cursors.next_hyperplane);
        let mut idx = self.cursors.next_hyperplane;
        let k = loop {
            let h = stream.next().expect("the stream is infinite");
            idx += 1;
            if self.hom.arr.position(&h).is_none() {
                break h;
            }
        };
        let b = self.hom.bounds(&k);
        let next = self.hom.extend(k.clone())?;
        self.advance(next)?;
        self.cursors.next_hyperplane = idx;
        self.log.push(json!({
            "round": self.round, "step": "domain", "hyperplane": k,
            "positive": self.name(b.pos_lower), "negative": self.name(b.neg_lower),
        }));
        Ok(())
    }

    /// The arrangement made of the first `prefix` hyperplanes.
    fn prefix_arrangement(&self, prefix: usize) -> Arrangement {
        self.prefixes
            .borrow_mut()
            .entry(prefix)
            .or_insert_with(|| {
                Arrangement::from_hyperplanes(self.hom.arr.hyperplanes()[..prefix].iter().cloned(), usize::MAX)
                    .expect("prefixes of a valid arrangement are valid")
            })
            .clone()
    }

    /// The next pair of segment `s`, or `None` when it is exhausted.
    fn draw(&mut self, s: usize) -> Option<(ConeElem, ConeElem)> {
        let seg = &self.cursors.segments[s];
        let arr = self.prefix_arrangement(seg.prefix);
        let t = seg.consumed;
        let z = arr.zero_face();
        let proper: Vec<usize> = (0..arr.face_count()).filter(|&i| i != z).collect();
        let pair = if let Some(&f) = proper.get(t) {
            // `(↑F, F†)`: the pairs that decide closedness.
            Some((arr.star(f), dagger(&arr, f)))
        } else {
            let (i, j) = shell_pair(t - proper.len());
            let shell = i.max(j);
            let items: Vec<Option<ConeElem>> = arr.up_sets(true).map(Some).chain(std::iter::repeat(None)).take(shell + 1).collect();
            match (&items[i], &items[j], &items[shell]) {
                (Some(u), Some(v), Some(_)) => Some((u.clone(), v.clone())),
                _ => None,
            }
        };
        match pair {
            Some(_) => self.cursors.segments[s].consumed += 1,
            None => self.cursors.segments[s].exhausted = true,
        }
        pair
    }

    fn next_pair(&mut self) -> Option<(usize, ConeElem, ConeElem)> {
        let k = self.cursors.segments.len();
        for _ in 0..k {
            let s = self.cursors.next_segment % k;
            self.cursors.next_segment = (s + 1) % k;
            if self.cursors.segments[s].exhausted {
                continue;
            }
            if let Some((u, v)) = self.draw(s) {
                return Some((self.cursors.segments[s].prefix, u, v));
            }
        }
        None
    }

    fn repair_triples(&mut self) -> Result<()> {
        let n = self.round;
        let len = self.hom.arr.len();
        if self.cursors.segments.last().is_none_or(|s| s.prefix != len) {
            self.cursors.segments.push(Segment { prefix: len, consumed: 0, exhausted: false });
        }
        // The current closure defect goes first, then the schedule.
        if let Some(f) = self.hom.closure_defect() {
            let a = &self.hom.arr;
            let (u, v) = (a.star(f), dagger(a, f));
            self.process(None, len, u, v)?;
        }
        while self.cursors.next_triple <= n {
            let saved = self.cursors.clone();
            let Some((prefix, u, v)) = self.next_pair() else {
                self.log.push(json!({ "round": n, "step": "closedness", "action": "none", "note": "all segments exhausted" }));
                break;
            };
            self.process(Some(self.cursors.next_triple), prefix, u, v).inspect_err(|_| self.cursors = saved)?;
            self.cursors.next_triple += 1;
        }
        Ok(())
    }

    /// Repairs `(U, V, f(U) ∖ f(V))`, given over the first `prefix` hyperplanes, if needed.
    fn process(&mut self, index: Option<usize>, prefix: usize, u: ConeElem, v: ConeElem) -> Result<()> {
        let old = self.prefix_arrangement(prefix);
        let (u2, v2) = (lift_cone(&old, &self.hom.arr, &u), lift_cone(&old, &self.hom.arr, &v));
        let l = self.target.clone();
        // Larger γ are implied and smaller ones fail the premise.
        let gamma = l.pseudo_diff(self.hom.apply(&u2), self.hom.apply(&v2));
        let action = if self.hom.apply(&self.hom.arr.pseudo_diff(&u2, &v2)).leq(gamma) {
            TripleAction::AlreadyClosed
        } else {
            self.check_hyperplane_cap()?;
            let dc = correct_defect(&self.hom, &u2, &v2, gamma)?;
            let added = dc.steps.iter().filter(|s| s.added.is_some()).count();
            if self.hom.arr.len() + added > self.caps.hyperplanes {
                return Err(Error::CapExceeded { what: "hyperplanes".into(), limit: self.caps.hyperplanes });
            }
            let cert = dc.certificate();
            self.advance(dc.hom)?;
            self.log.push(json!({ "round": self.round, "step": "closedness", "action": "repaired", "triple": index, "certificate": cert }));
            TripleAction::Repaired
        };
        self.processed.push(ProcessedTriple {
            index,
            prefix,
            u: old.render_cone(&u),
            v: old.render_cone(&v),
            gamma: l.name(gamma).to_string(),
            action,
        });
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let a = &self.hom.arr;
        json!({
            "round": self.round,
            "target": lattice_to_json(&self.target),
            "generators": self.generators.iter().map(|&g| self.name(g)).collect::<Vec<_>>(),
            "caps": self.caps,
            "arrangement": arrangement_to_json(a),
            "hom": (0..a.face_count()).map(|i| json!([a.render(i), self.name(self.hom.phi(i))])).collect::<Vec<_>>(),
            "cursors": self.cursors,
            "processed": self.processed,
            "log": self.log,
            "stopped": self.stopped,
        })
    }

    pub fn from_json(v: &Value) -> Result<RepState> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Input(format!("state has no {k}")));
        let parse = |k: &str| -> Result<Value> { field(k).cloned() };
        let caps: Caps = serde_json::from_value(parse("caps")?).map_err(|e| Error::Input(e.to_string()))?;
        let target = Arc::new(parse_lattice(field("target")?, caps.elements)?.lattice);
        let elem = |name: &str| target.find(name).ok_or_else(|| Error::Input(format!("unknown element {name}")));
        let names: Vec<String> = serde_json::from_value(parse("generators")?).map_err(|e| Error::Input(e.to_string()))?;
        let generators = names.iter().map(|n| elem(n)).collect::<Result<Vec<_>>>()?;
        let hs = parse_normals(&field("arrangement")?["normals"])?;
        let arr = Arrangement::from_hyperplanes(hs, caps.faces)?;
        let pairs: Vec<(String, String)> = serde_json::from_value(parse("hom")?).map_err(|e| Error::Input(e.to_string()))?;
        if pairs.len() != arr.face_count() {
            return Err(Error::Input(format!("hom lists {} faces, arrangement has {}", pairs.len(), arr.face_count())));
        }
        let mut phi = vec![Elem::ZERO; arr.face_count()];
        for (face, name) in &pairs {
            phi[arr.parse_face(face)?] = elem(name)?;
        }
        let hom = OpHom::new_unchecked(arr, target.clone(), phi)?;
        let de = |k: &str| -> Result<Value> { parse(k) };
        let bad = |e: serde_json::Error| Error::Input(e.to_string());
        Ok(RepState {
            target,
            generators,
            caps,
            round: serde_json::from_value(de("round")?).map_err(bad)?,
            hom,
            cursors: serde_json::from_value(de("cursors")?).map_err(bad)?,
            processed: serde_json::from_value(de("processed")?).map_err(bad)?,
            log: serde_json::from_value(de("log")?).map_err(bad)?,
            stopped: serde_json::from_value(de("stopped")?).map_err(bad)?,
            prefixes: RefCell::new(HashMap::new()),
        })
    }
}

/// Runs `rounds` rounds from the initial state.
pub fn represent(l: &FiniteDistLattice, generators: Option<Vec<Elem>>, rounds: usize, caps: Caps) -> Result<RepState> {
    let mut st = RepState::new(l, generators, caps)?;
    for _ in 0..rounds {
        st.step()?;
    }
    Ok(st)
}

/// The four certification checks, in order: homomorphism, surjectivity,
/// processed triples, closedness.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub round: usize,
    pub checks: Vec<Report>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|r| r.status == Status::Pass)
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|r| r.status == Status::Fail)
    }
}

pub fn certify(st: &RepState) -> Certificate {
    let (f, l) = (&st.hom, &*st.target);
    let a = &f.arr;
    let hom = match f.violation() {
        Some(msg) => Report::fail("homomorphism", json!({ "detail": msg })),
        None if f.phi(a.zero_face()) != l.top() => Report::fail("homomorphism", json!({ "detail": "whole space does not map to the top" })),
        None => Report::pass("homomorphism", json!({ "faces": a.face_count(), "hyperplanes": a.len() })),
    };
    let missing: Vec<String> = st.generators.iter().filter(|&&g| !f.attains(g)).map(|&g| st.name(g)).collect();
    let surj = if missing.is_empty() {
        Report::pass("surjectivity", json!({ "generators": st.generators.len() }))
    } else {
        Report { check: "surjectivity".into(), status: Status::Pending, witness: json!({ "unattained": missing }) }
    };
    let mut offending = None;
    for t in st.processed.iter() {
        let old = st.prefix_arrangement(t.prefix);
        let lift = |faces: &[String]| old.cone_from_strings(faces).map(|c| lift_cone(&old, a, &c));
        let (Ok(u), Ok(v), Some(gamma)) = (lift(&t.u), lift(&t.v), l.find(&t.gamma)) else {
            offending = Some(json!({ "triple": t.index, "detail": "unreadable triple" }));
            break;
        };
        let w = a.pseudo_diff(&u, &v);
        if f.apply(&u).leq(f.apply(&v).join(gamma)) && !f.apply(&w).leq(gamma) {
            offending = Some(json!({ "triple": t.index, "U": t.u, "V": t.v, "gamma": t.gamma, "g(W)": l.name(f.apply(&w)) }));
            break;
        }
    }
    let triples = match offending {
        Some(w) => Report::fail("processed-triples", w),
        None => Report::pass("processed-triples", json!({ "processed": st.processed.len() })),
    };
    let closed = match f.closure_defect() {
        None => Report::pass("closedness", json!({ "faces": a.face_count() })),
        Some(i) => Report {
            check: "closedness".into(),
            status: Status::Pending,
            witness: json!({ "face": a.render(i), "value": l.name(f.phi(i)) }),
        },
    };
    Certificate { round: st.round, checks: vec![hom, surj, triples, closed] }
}
