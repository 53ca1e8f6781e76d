//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//! All arithmetic is exact, so every check is an equality or containment;
//! the only tolerances are the runtime limits below.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use cnrep::arrangement::{Arrangement, Hyperplane, Sign};
use cnrep::builder::{certify, Caps, RepState};
use cnrep::defect::{compute_m0, correct_defect, correct_pair, half_space_functional, lift_cone, pair_identity_holds};
use cnrep::diff::{check_difference_axioms, closure_defect, is_closed_hom, is_completely_normal, is_consonant, CheckConfig, DiffTable, Status};
use cnrep::extension::{ExtensionProblem, OpHom};
use cnrep::lattice::{is_cn_space, spectrum, Elem, FiniteDistLattice, LatticeHom, DEFAULT_ELEMENT_CAP};
use cnrep::{fixtures, json as formats, Error};

use common::*;

/// Builder rounds allowed per target.
const MAX_ROUNDS: usize = 60;
/// Face cap for the end-to-end runs; reaching it stops a run early.
const BUILD_FACE_CAP: usize = 8000;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let family = fixture_family();
    let cfg = CheckConfig::default();
    for (name, l) in &family {
        let r = check_difference_axioms(&DiffTable::pseudo(Arc::new(l.clone())), &cfg);
        ensure(r.status == Status::Pass, || format!("{name}: {}", r.witness))?;
    }
    Ok(format!("{} lattices, all six axiom groups on all tuples", family.len()))
}

fn criterion_2() -> Outcome {
    let family = fixture_family();
    let mut pairs = 0usize;
    for (name, l) in &family {
        let oracle = ConsonanceOracle::new(l);
        for &a in l.elements() {
            for &b in l.elements() {
                pairs += 1;
                let fast = is_consonant(l, a, b).holds();
                ensure(fast == oracle.consonant(a, b), || format!("{name}: ({}, {}) disagrees", l.name(a), l.name(b)))?;
            }
        }
    }
    let kite = fixtures::kite();
    let (a, b) = (kite.find("a").unwrap(), kite.find("b").unwrap());
    ensure(!is_consonant(&kite, a, b).holds() && cnrep::diff::cn_failure(&kite) == Some((a, b)), || "kite not reported at (a, b)".into())?;
    for (name, l) in family.iter().filter(|(n, _)| n.starts_with("chain") || n.starts_with("bool") || n.starts_with("dj")) {
        ensure(is_completely_normal(l), || format!("{name} reported non-CN"))?;
    }
    Ok(format!("{pairs} pairs agree with witness search; kite fails at (a, b)"))
}

fn criterion_3() -> Outcome {
    let family = fixture_family();
    for (name, l) in &family {
        ensure(is_cn_space(&spectrum(l)) == is_completely_normal(l), || format!("{name} disagrees"))?;
    }
    Ok(format!("{} lattices", family.len()))
}

fn criterion_4() -> Outcome {
    let (c3, c2) = (Arc::new(fixtures::chain(3)), Arc::new(fixtures::chain(2)));
    let e = |l: &FiniteDistLattice, n: &str| l.find(n).unwrap();
    let f = LatticeHom::from_fn(c3.clone(), c2.clone(), |x| if x.is_zero() { Elem::ZERO } else { c2.top() }).map_err(|e| e.to_string())?;
    let defect = closure_defect(&f);
    ensure(defect == Some((e(&c3, "2"), e(&c3, "1"), Elem::ZERO)), || format!("defect {defect:?}"))?;
    ensure(!is_closed_hom(&f), || "3 ↠ 2 reported closed".into())?;
    ensure(is_closed_hom(&LatticeHom::identity(c3.clone())), || "identity not closed".into())?;
    let point = Arc::new(fixtures::chain(1));
    let collapse = LatticeHom::from_fn(c3.clone(), point, |_| Elem::ZERO).map_err(|e| e.to_string())?;
    ensure(is_closed_hom(&collapse), || "collapse not closed".into())?;
    Ok("3 ↠ 2 has defect (2, 1, 0); identity and collapse are closed".into())
}

fn criterion_5() -> Outcome {
    let line = Arrangement::from_ints(&[&[1]]).unwrap();
    ensure(line.face_count() == 3, || format!("line has {} faces", line.face_count()))?;
    let op = line.op_lattice(false).map_err(|e| e.to_string())?;
    ensure(op.lattice.len() == 5, || format!("|Op| = {} on the line", op.lattice.len()))?;
    let named: Vec<usize> = [(0, Sign::Pos), (0, Sign::Neg)]
        .iter()
        .map(|&(i, s)| line.half_space(i, s).len())
        .chain([line.half_space(0, Sign::Pos).union(&line.half_space(0, Sign::Neg)).len()])
        .collect();
    ensure(named == [1, 1, 2], || format!("half-space sizes {named:?}"))?;
    let axes = Arrangement::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
    ensure(axes.face_count() == 9, || format!("axes have {} faces", axes.face_count()))?;
    let (full, proper) = (axes.up_sets(false).count(), axes.up_sets(true).count());
    let (op, opm) = (axes.op_lattice(false).unwrap().lattice.len(), axes.op_lattice(true).unwrap().lattice.len());
    ensure((full, proper, op, opm) == (48, 47, 48, 47), || format!("sizes {full}, {proper}, {op}, {opm}"))?;
    let three = Arrangement::from_ints(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    ensure(three.face_count() == 13, || format!("three lines have {} faces", three.face_count()))?;
    Ok("3 faces and |Op| = 5; 9 faces, |Op| = 48, |Op⁻| = 47; 13 faces".into())
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    for (name, arr) in small_arrangements() {
        let opens = basic_opens(&arr);
        let mut jirr = Vec::new();
        for p in &opens {
            let geo = arr.jirr_geometric(p).map_err(|e| format!("{name}: {e}"))?.join_irreducible;
            // Lower covers of an up-set drop exactly one face.
            let covers = p
                .iter()
                .filter(|&f| {
                    let mut s = p.faces().clone();
                    s.set(f, false);
                    arr.is_up_set(&s)
                })
                .count();
            ensure(geo == (covers == 1), || format!("{name}: {:?} geometric {geo}, {covers} lower covers", arr.render_cone(p)))?;
            if geo {
                jirr.push(p.clone());
            }
            checked += 1;
        }
        for p in &jirr {
            for q in &jirr {
                if p != q && p.is_subset(q) {
                    let (np, nq) = (arr.nabla_faces(p), arr.nabla_faces(q));
                    ensure(nq.is_subset(&np) && nq != np, || format!("{name}: ∇ not strictly antitone"))?;
                }
            }
        }
    }
    Ok(format!("{checked} basic opens over 12 arrangements"))
}

/// Extension problems `Op({Δ₀}) ↪ Op({Δ₀, K})` with `a = K⁺`, `b = K⁻`, and `2 ↪ J₂`.
fn extension_problems() -> Vec<(String, ExtensionProblem)> {
    let targets = [("3", fixtures::chain(3)), ("4", fixtures::chain(4)), ("2²", fixtures::boolean(2)), ("2×3", fixtures::grid(2, 3))];
    let mut out = Vec::new();
    for (t, (tname, l)) in targets.iter().enumerate() {
        let l = Arc::new(l.clone());
        for (k, normal) in [[0i64, 1], [1, 1], [1, -1], [1, 2]].iter().enumerate() {
            let d_arr = Arrangement::from_ints(&[&[1, 0]]).unwrap();
            let mut e_arr = d_arr.clone();
            let parents = e_arr.add(Hyperplane::from_ints(normal).unwrap()).unwrap();
            let (dop, eop) = (d_arr.op_lattice(false).unwrap(), e_arr.op_lattice(false).unwrap());
            let embed = dop.lattice.elements().iter().map(|&x| eop.elem(&Arrangement::lift(&dop.cone(x), &parents)).unwrap()).collect();
            let homs: Vec<Vec<Elem>> = all_homs(&dop.lattice, &l).into_iter().filter(|h| h[dop.lattice.len() - 1] == l.top()).collect();
            let table = homs[(7 * k + 3 * t) % homs.len()].clone();
            let f = LatticeHom::new(dop.lattice.clone(), l.clone(), table).unwrap();
            let a = eop.elem(&e_arr.half_space(1, Sign::Pos)).unwrap();
            let b = eop.elem(&e_arr.half_space(1, Sign::Neg)).unwrap();
            out.push((format!("{tname}, K = {normal:?}"), ExtensionProblem { d: dop.lattice.clone(), e: eop.lattice.clone(), embed, a, b, f }));
        }
        let two = Arc::new(fixtures::chain(2));
        let j2 = Arc::new(FiniteDistLattice::build_from_hasse(
            &["0", "a", "b", "ab", "1"].map(String::from),
            &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)],
            DEFAULT_ELEMENT_CAP,
        ).unwrap());
        let embed = vec![Elem::ZERO, j2.top()];
        let c = l.elements()[(t + 1) % l.len()].join(l.elements()[l.len() / 2]);
        let f = LatticeHom::from_fn(two.clone(), l.clone(), |x| if x.is_zero() { Elem::ZERO } else { c }).unwrap();
        let (a, b) = (j2.find("a").unwrap(), j2.find("b").unwrap());
        out.push((format!("{tname}, 2 ↪ J₂"), ExtensionProblem { d: two, e: j2, embed, a, b, f }));
    }
    out
}

fn criterion_7() -> Outcome {
    let problems = extension_problems();
    ensure(problems.len() == 20, || format!("{} problems", problems.len()))?;
    for (name, p) in &problems {
        p.validate().map_err(|e| format!("{name}: {e}"))?;
        ensure(p.e.len() <= 60, || format!("{name}: |E| = {}", p.e.len()))?;
        let l = p.f.target.clone();
        let g = p.main_extend(p.f_star(p.a), p.f_star(p.b)).map_err(|e| format!("{name}: {e}"))?;
        for &x in p.d.elements() {
            ensure(g.apply(p.embed[p.d.index_of(x)]) == p.f.apply(x), || format!("{name}: g does not extend f at {}", p.d.name(x)))?;
        }
        let mut extendable: Vec<(Elem, Elem)> = all_homs(&p.e, &l)
            .into_iter()
            .filter(|t| p.d.elements().iter().all(|&x| t[p.e.index_of(p.embed[p.d.index_of(x)])] == p.f.apply(x)))
            .map(|t| (t[p.e.index_of(p.a)], t[p.e.index_of(p.b)]))
            .collect();
        extendable.sort();
        extendable.dedup();
        let mut admissible: Vec<(Elem, Elem)> =
            l.elements().iter().flat_map(|&x| l.elements().iter().map(move |&y| (x, y))).filter(|&(x, y)| p.admissible(x, y)).collect();
        admissible.sort();
        ensure(admissible == extendable, || format!("{name}: admissible {} pairs, extendable {}", admissible.len(), extendable.len()))?;
        for &(x, y) in &admissible {
            p.main_extend(x, y).map_err(|e| format!("{name}: ({}, {}): {e}", l.name(x), l.name(y)))?;
        }
    }
    Ok(format!("{} problems; admissible pairs equal extendable pairs", problems.len()))
}

/// Homomorphisms `Op(axes) → L`, as face tables, every `step`-th one.
fn axis_homs(l: &Arc<FiniteDistLattice>, step: usize) -> Vec<OpHom> {
    let arr = Arrangement::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
    let op = arr.op_lattice(false).unwrap();
    let top = op.lattice.len() - 1;
    all_homs(&op.lattice, l)
        .into_iter()
        .filter(|t| t[top] == l.top())
        .step_by(step)
        .map(|t| {
            let phi = (0..arr.face_count()).map(|i| t[op.lattice.index_of(op.elem(&arr.star(i)).unwrap())]).collect();
            OpHom::new(arr.clone(), l.clone(), phi).unwrap()
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let axes = Arrangement::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
    let (a, b) = (ints(&[1, 0]), ints(&[0, 1]));
    let m0 = compute_m0(&axes, &a, &b).map_err(|e| e.to_string())?;
    let searched = search_m0(&axes, &a, &b, 8);
    ensure(m0 == 1 && searched == 1, || format!("m0 = {m0}, search = {searched}"))?;

    let mut minimal = 0;
    for (name, arr) in small_arrangements().into_iter().filter(|(_, a)| a.len() <= 3 && a.dim() >= 2) {
        for i in 0..arr.len() {
            for j in 0..arr.len() {
                for (si, sj) in [(Sign::Pos, Sign::Pos), (Sign::Pos, Sign::Neg), (Sign::Neg, Sign::Pos), (Sign::Neg, Sign::Neg)] {
                    let (fa, fb) = (half_space_functional(&arr, i, si), half_space_functional(&arr, j, sj));
                    let m0 = compute_m0(&arr, &fa, &fb).map_err(|e| e.to_string())? as i64;
                    for m in m0..=m0 + 5 {
                        ensure(implication_holds(&arr, &fa, &fb, m), || format!("{name}: fails at m = {m} ≥ m0 = {m0}"))?;
                    }
                    ensure(m0 == 1 || !implication_holds(&arr, &fa, &fb, m0 - 1), || format!("{name}: m0 = {m0} not minimal"))?;
                    minimal += 1;
                }
            }
        }
    }
    let steep = Arrangement::from_ints(&[&[1, 0], &[0, 1], &[1, -2]]).unwrap();
    let m_steep = compute_m0(&steep, &a, &b).map_err(|e| e.to_string())?;
    ensure(m_steep == search_m0(&steep, &a, &b, 8), || format!("steep m0 = {m_steep} disagrees with search"))?;

    let mut pairs = 0;
    let mut defects = 0;
    for l in [fixtures::chain(4), fixtures::grid(2, 3), fixtures::boolean(2)] {
        let l = Arc::new(l);
        for f in axis_homs(&l, 11) {
            for i in 0..2 {
                for j in 0..2 {
                    for (si, sj) in [(Sign::Pos, Sign::Pos), (Sign::Pos, Sign::Neg), (Sign::Neg, Sign::Pos), (Sign::Neg, Sign::Neg)] {
                        let (fa, fb) = (half_space_functional(&f.arr, i, si), half_space_functional(&f.arr, j, sj));
                        let pc = correct_pair(&f, &fa, &fb).map_err(|e| e.to_string())?;
                        ensure(pc.hom.extends(&f) && pair_identity_holds(&pc.hom, &fa, &fb).unwrap(), || "pair identity".into())?;
                        // The difference is the same computed in Op or in Op⁻.
                        let g = &pc.hom;
                        let (ap, bp) = (g.arr.half_space(i, si), g.arr.half_space(j, sj));
                        let op = g.arr.op_lattice(true).map_err(|e| e.to_string())?;
                        let in_opm = op.cone(op.lattice.pseudo_diff(op.elem(&ap).unwrap(), op.elem(&bp).unwrap()));
                        ensure(in_opm == g.arr.pseudo_diff(&ap, &bp), || "Op and Op⁻ differences disagree".into())?;
                        pairs += 1;
                    }
                }
            }
            let ups: Vec<_> = f.arr.up_sets(true).step_by(9).collect();
            for u in &ups {
                for v in &ups {
                    let gamma = l.pseudo_diff(f.apply(u), f.apply(v));
                    let dc = correct_defect(&f, u, v, gamma).map_err(|e| e.to_string())?;
                    let g = &dc.hom;
                    let (u2, v2) = (lift_cone(&f.arr, &g.arr, u), lift_cone(&f.arr, &g.arr, v));
                    ensure(g.extends(&f), || "g does not extend f".into())?;
                    ensure(u2.is_subset(&v2.union(&dc.w)) && g.apply(&dc.w).leq(gamma), || "postconditions".into())?;
                    ensure(dc.certificate()["checked"] == json!(true), || "certificate".into())?;
                    if g.arr.face_count() <= 25 {
                        for w in g.arr.up_sets(true) {
                            ensure(!u2.is_subset(&v2.union(&w)) || dc.w.is_subset(&w), || "W is not least".into())?;
                        }
                    }
                    defects += 1;
                }
            }
        }
    }
    let kite = Arc::new(fixtures::kite());
    let fk = OpHom::new(Arrangement::from_ints(&[&[1]]).unwrap(), kite.clone(), vec![Elem::ZERO, kite.top(), kite.top()]).unwrap();
    let err = correct_defect(&fk, &fk.arr.empty_cone(), &fk.arr.empty_cone(), Elem::ZERO).unwrap_err();
    ensure(matches!(err, Error::NotCompletelyNormal(..)), || format!("kite target gave {err}"))?;
    Ok(format!("m0 = 1 on the axes; {minimal} thresholds minimal; {pairs} pair repairs; {defects} defect repairs"))
}

/// The targets of the end-to-end runs.
fn build_targets() -> Vec<(String, FiniteDistLattice)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    vec![
        ("2".into(), fixtures::chain(2)),
        ("3-chain".into(), fixtures::chain(3)),
        ("4-chain".into(), fixtures::chain(4)),
        ("2²".into(), fixtures::boolean(2)),
        ("2³".into(), fixtures::boolean(3)),
        ("2×3".into(), fixtures::grid(2, 3)),
        ("D_J(1)".into(), fixtures::dj(1, fixtures::DEFAULT_DJ_BOUND).unwrap()),
        ("random CN".into(), fixtures::random_cn(&mut rng, 10)),
    ]
}

/// Runs until certification passes, the round limit, or a cap; returns the state text.
fn build(l: &FiniteDistLattice) -> Result<(RepState, Option<usize>), Error> {
    let caps = Caps { faces: BUILD_FACE_CAP, ..Caps::default() };
    let mut st = RepState::new(l, None, caps)?;
    let mut passed = certify(&st).passed().then_some(0);
    while passed.is_none() && st.round < MAX_ROUNDS && st.stopped.is_none() {
        st.step()?;
        if certify(&st).passed() {
            passed = Some(st.round);
        }
    }
    Ok((st, passed))
}

fn criterion_9(states: &mut Vec<String>) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, l) in build_targets() {
        let (st, passed) = build(&l).map_err(|e| format!("{name}: {e}"))?;
        let cert = certify(&st);
        let status: Vec<String> = cert.checks.iter().map(|r| format!("{}={}", r.check, serde_json::to_value(r.status).unwrap().as_str().unwrap())).collect();
        let end = st.stopped.clone().unwrap_or_else(|| format!("round {}", st.round));
        match passed {
            Some(r) => lines.push(format!("{name}: certified at round {r}")),
            None => {
                ok = false;
                lines.push(format!("{name}: not certified ({end}; {})", status.join(", ")));
            }
        }
        states.push(serde_json::to_string(&st.to_json()).unwrap());
    }
    let kite = RepState::new(&fixtures::kite(), None, Caps::default()).map(|_| ()).unwrap_err();
    let (labels, covers) = fixtures::n5_hasse();
    let n5 = formats::parse_lattice(&json!({ "labels": labels, "covers": covers }), DEFAULT_ELEMENT_CAP).map(|_| ()).unwrap_err();
    let rejected = kite == Error::NotCompletelyNormal("a".into(), "b".into()) && matches!(n5, Error::NotDistributive { .. });
    lines.push(format!("kite: {kite}; N5: {n5}"));
    if ok && rejected {
        Ok(lines.join("\n    "))
    } else {
        Err(lines.join("\n    "))
    }
}

/// Brute force over every homomorphism `Op⁻(A) → L`: none is both closed
/// and surjective when `L` has two comparable join-irreducibles.
fn obstruction() -> String {
    let axes = Arrangement::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
    let three = Arrangement::from_ints(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let cases = [
        ("axes", &axes, "3-chain", fixtures::chain(3)),
        ("axes", &axes, "2×3", fixtures::grid(2, 3)),
        ("axes", &axes, "2²", fixtures::boolean(2)),
        ("three lines", &three, "3-chain", fixtures::chain(3)),
    ];
    let mut lines = Vec::new();
    for (aname, arr, lname, l) in cases {
        let op = arr.op_lattice(true).unwrap();
        let l = Arc::new(l);
        let homs = all_homs(&op.lattice, &l);
        let good = homs
            .iter()
            .filter(|t| {
                let h = LatticeHom::new_unchecked(op.lattice.clone(), l.clone(), (*t).clone()).unwrap();
                h.is_surjective() && is_closed_hom(&h)
            })
            .count();
        lines.push(format!("{aname} → {lname}: {good} of {} homomorphisms closed and surjective", homs.len()));
    }
    lines.join("\n    ")
}

fn criterion_10(first: &[String]) -> Outcome {
    let mut again = Vec::new();
    for (name, l) in build_targets() {
        let (st, _) = build(&l).map_err(|e| format!("{name}: {e}"))?;
        again.push(serde_json::to_string(&st.to_json()).unwrap());
    }
    ensure(first.len() == again.len() && first.iter().zip(&again).all(|(x, y)| x == y), || "state files differ between runs".into())?;
    let bytes: usize = again.iter().map(String::len).sum();
    Ok(format!("{} state files, {bytes} bytes, byte-identical", again.len()))
}

fn run(n: usize, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    let took = start.elapsed();
    let (pass, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the time limit")),
        Err(d) => (false, d),
    };
    println!(
        "criterion {n:>2} {} {title}: {detail} [{:.1}s of {}s]",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut results = vec![
        run(1, "difference axioms", secs(30), criterion_1),
        run(2, "consonance oracle", secs(10), criterion_2),
        run(3, "spectral bridge", secs(5), criterion_3),
        run(4, "closedness detector", secs(1), criterion_4),
        run(5, "arrangement counts", secs(5), criterion_5),
        run(6, "join-irreducibility", secs(60), criterion_6),
        run(7, "main extension lemma", secs(120), criterion_7),
        run(8, "defect correction", secs(60), criterion_8),
    ];
    let mut states = Vec::new();
    results.push(run(9, "end-to-end representation", secs(600), || criterion_9(&mut states)));
    println!("  note obstruction to full closedness at a finite stage:\n    {}", obstruction());
    results.push(run(10, "determinism", secs(600), || criterion_10(&states)));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed} of {} criteria pass", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
