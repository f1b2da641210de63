//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbplab::analysis::{
    build_schemes, check_klauck, check_nayak, entropy_accumulation, is_k_stable, min_obdd_size, min_reversible_obdd,
    verify_scheme, BoundStatus,
};
use qbplab::families::random::{random_qbp, random_randomized_obdd};
use qbplab::families::{
    fig1_example, gm_exact_obdd, ind_zero_error_qobdd, isa_tree, linear_obdd, perm_component, perm_qobdd,
    reversible_tree, FunctionOracle, LinearFamily,
};
use qbplab::gateset::{approx_search, product_error_bound, ElementaryGate, GateWord, SearchOptions};
use qbplab::linalg::{
    exp_i_hermitian, is_unitary, operator_norm_svd, random_density, random_hermitian, random_unitary, CMatrix,
};
use qbplab::qtm::{self, compile_to_qbp, simulate_qtm};
use qbplab::semantics::{
    absolute_probabilities, classical_eval, evolve, evolve_gm, perturbation_check, running_times, DensityState, Method,
};
use qbplab::transforms::{amplify, clock_wrap, levelize, randomized_to_gm, realify, ClockParams, Combiner};
use qbplab::validate::{validate_profile, Rule};
use qbplab::{Assignment, BranchingProgram, Mode};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const TOL: f64 = 1e-9;

fn depth(bp: &BranchingProgram) -> usize {
    bp.depth().expect("acyclic program")
}

fn perm_one_sided() -> Result<(), String> {
    let start = Instant::now();
    let bp = perm_qobdd(3, None).map_err(|e| e.to_string())?;
    let f = FunctionOracle::perm(3);
    let t = depth(&bp);
    for a in Assignment::all(9) {
        let p = evolve(&bp, &a, t).probabilities();
        if f.eval(&a).unwrap() {
            ensure!(p[1] >= 1.0 - 1e-6, "permutation {a} accepted with {}", p[1]);
        } else {
            ensure!(p[1] <= 1.0 / 3.0 + 1e-6, "non-permutation {a} accepted with {}", p[1]);
        }
    }
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(60), "took {el:?}");
    Ok(())
}

fn fig1_narrative() -> Result<(), String> {
    let bp = fig1_example();
    let tr = evolve(&bp, &Assignment::zeros(2), 3);
    // Measurements happen at t = 0, 1, 2, ...; the third one is t = 2.
    for (t, h) in tr.halting.iter().enumerate() {
        let want = if t == 2 { [0.0, 1.0, 0.0] } else { [0.0; 3] };
        for r in 0..3 {
            ensure!((h[r] - want[r]).abs() <= TOL, "h({t}) = {h:?}");
        }
    }
    ensure!((tr.probabilities()[1] - 1.0).abs() <= TOL, "p_1 = {}", tr.probabilities()[1]);
    Ok(())
}

fn bundled_programs() -> Vec<(String, BranchingProgram)> {
    let mut out: Vec<(String, BranchingProgram)> = vec![("fig1".into(), fig1_example())];
    for n in [2, 3] {
        out.push((format!("perm_qobdd({n})"), perm_qobdd(n, None).unwrap()));
    }
    out.push(("perm_component(5, 3)".into(), perm_component(5, 3).unwrap()));
    for f in [LinearFamily::Disj, LinearFamily::Ip] {
        for n in [4, 8] {
            out.push((format!("linear_obdd({f:?}, {n})"), linear_obdd(f, n).unwrap()));
            out.push((format!("gm_exact_obdd({f:?}, {n})"), gm_exact_obdd(f, n).unwrap()));
        }
    }
    let disj6 = FunctionOracle::disj(6).unwrap();
    out.push(("reversible_tree(DISJ_6)".into(), reversible_tree(&disj6, &[0, 1, 2, 3, 4, 5]).unwrap()));
    out.push(("isa_tree(8)".into(), isa_tree(8).unwrap()));
    for n in [4, 8] {
        out.push((format!("ind_zero_error_qobdd({n}, 1/2)"), ind_zero_error_qobdd(n, 0.5).unwrap()));
    }
    let xor4 = FunctionOracle::xor(4);
    out.push(("min_reversible_obdd(XOR_4)".into(), min_reversible_obdd(&xor4, &[0, 1, 2, 3]).unwrap()));
    let p2 = perm_qobdd(2, None).unwrap();
    out.push(("clock_wrap(PERM_2, 4)".into(), clock_wrap(&p2, 4).unwrap()));
    out.push(("levelize(fig1, 3)".into(), levelize(&fig1_example(), 3).unwrap()));
    out.push(("realify(PERM_2)".into(), realify(&p2).unwrap()));
    out.push(("amplify(PERM_2, 2)".into(), amplify(&p2, 2, Combiner::AllAccept).unwrap()));
    for (name, spec) in [
        ("or(3)", qtm::or_machine(3)),
        ("parity(3)", qtm::parity_machine(3)),
        ("interference", qtm::interference()),
        ("leaky_loop", qtm::leaky_loop()),
    ] {
        let m = spec.build().unwrap();
        out.push((format!("qtm {name}"), compile_to_qbp(&m).unwrap().program));
    }
    out
}

fn validation_soundness() -> Result<(), String> {
    for (name, bp) in bundled_programs() {
        let rep = validate_profile(&bp, TOL);
        ensure!(rep.ok, "{name} fails validation:\n{rep}");
        ensure!(rep.max_residual <= TOL, "{name}: residual {}", rep.max_residual);
    }
    let disj = linear_obdd(LinearFamily::Disj, 4).unwrap().with_mode(Mode::Quantum).map_err(|e| e.to_string())?;
    let rep = validate_profile(&disj, TOL);
    ensure!(!rep.ok, "DISJ_4 as a QBP passed (W)");
    let named = rep.violations.iter().any(|v| v.rule == Rule::WellFormed && v.nodes.len() == 2);
    ensure!(named, "no (W) violation names a node pair:\n{rep}");
    Ok(())
}

fn leveling() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..50 {
        let n = rng.gen_range(1..=4);
        let g = random_qbp(&mut rng, n, 12);
        let t = rng.gen_range(0..=5);
        let l = levelize(&g, t).map_err(|e| e.to_string())?;
        ensure!(l.size() <= (t + 1) * (t + 1) * g.size(), "trial {trial}: {} > (t+1)^2 {}", l.size(), g.size());
        for a in Assignment::all(n) {
            let p = evolve(&g, &a, t).cumulative(t);
            let q = evolve(&l, &a, t).cumulative(t);
            for r in 0..3 {
                ensure!((p[r] - q[r]).abs() <= TOL, "trial {trial}, t = {t}, a = {a}: {p:?} vs {q:?}");
            }
        }
    }
    Ok(())
}

fn realification() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut programs: Vec<BranchingProgram> = vec![fig1_example(), perm_qobdd(2, None).unwrap()];
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        programs.push(random_qbp(&mut rng, n, 10));
    }
    for (i, g) in programs.iter().enumerate() {
        let r = realify(g).map_err(|e| e.to_string())?;
        ensure!(r.size() <= 2 * g.size(), "program {i}: {} > 2 * {}", r.size(), g.size());
        ensure!(r.edges().iter().all(|e| e.amp.im == 0.0), "program {i}: complex amplitude left");
        for a in Assignment::all(g.n_vars()) {
            let p = evolve(g, &a, 15);
            let q = evolve(&r, &a, 15);
            for t in 0..=15 {
                for k in 0..3 {
                    ensure!((p.halting[t][k] - q.halting[t][k]).abs() <= TOL, "program {i}, a = {a}, t = {t}");
                }
            }
        }
    }
    Ok(())
}

fn perturbation() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    for trial in 0..200 {
        let n = rng.gen_range(1..=3);
        let g = random_qbp(&mut rng, n, 10);
        let a = Assignment::from_index(n, rng.gen_range(0..1u64 << n));
        let eps = if trial % 2 == 0 { 1e-3 } else { 1e-2 };
        let t = rng.gen_range(1..=10);
        let out = perturbation_check(&g, &a, t, eps, &mut rng).map_err(|e| e.to_string())?;
        if !out.bound_ok {
            violations += 1;
        }
    }
    ensure!(violations == 0, "{violations} violations");
    Ok(())
}

fn clock() -> Result<(), String> {
    for t in 1..=30 {
        ensure!(ClockParams::identity_exact(t), "integer identity fails at t = {t}");
        let p = ClockParams::new(t).map_err(|e| e.to_string())?;
        ensure!(p.defect() <= 1e-12, "t = {t}: beta^2 + gamma^2 - 1 = {}", p.defect());
    }
    let bp = perm_qobdd(2, None).unwrap();
    let g = clock_wrap(&bp, 12).map_err(|e| e.to_string())?;
    let m = Method::Iterate { t_max: 1_000_000, tail_tol: 1e-13 };
    for a in Assignment::all(4) {
        let p = absolute_probabilities(&bp, &a, m).map_err(|e| e.to_string())?.p;
        let q = absolute_probabilities(&g, &a, m).map_err(|e| e.to_string())?.p;
        ensure!(q[1] <= p[1] + TOL, "a = {a}: p'_1 = {} > p_1 = {}", q[1], p[1]);
        ensure!((q[1] - p[1]).abs() <= 1e-3, "a = {a}: |p'_1 - p_1| = {}", (q[1] - p[1]).abs());
        let rt = running_times(&g, &a, 100_000, 1e-6);
        ensure!(rt.expected.is_finite(), "a = {a}: expected time not finite");
        ensure!(rt.tail_bound <= 1e-6, "a = {a}: tail bound {}", rt.tail_bound);
    }
    Ok(())
}

fn gm_exactness() -> Result<(), String> {
    for f in [LinearFamily::Disj, LinearFamily::Ip] {
        let n = 8;
        let g = gm_exact_obdd(f, n).map_err(|e| e.to_string())?;
        ensure!(g.size() <= 4 * n, "{f:?}: size {} > 4n", g.size());
        let o = FunctionOracle::linear(f, n).unwrap();
        for a in Assignment::all(n) {
            let p = evolve_gm(&g, &a, n + 1).map_err(|e| e.to_string())?.probabilities();
            let want = o.eval(&a).unwrap() as usize;
            ensure!((p[want] - 1.0).abs() <= TOL && p[1 - want].abs() <= TOL, "{f:?}, a = {a}: {p:?}");
        }
    }
    Ok(())
}

fn randomized_to_gm_check() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..100 {
        let n = rng.gen_range(1..=8);
        let bp = random_randomized_obdd(&mut rng, n, 3);
        let g = randomized_to_gm(&bp).map_err(|e| e.to_string())?;
        ensure!(g.size() <= bp.size(), "trial {trial}: size grew");
        for a in Assignment::all(n) {
            let want = classical_eval(&bp, &a).map_err(|e| e.to_string())?;
            let got = evolve_gm(&g, &a, n + 1).map_err(|e| e.to_string())?.probabilities();
            for r in 0..3 {
                ensure!((want[r] - got[r]).abs() <= TOL, "trial {trial}, a = {a}: {want:?} vs {got:?}");
            }
        }
    }
    Ok(())
}

fn zero_error_ind() -> Result<(), String> {
    let bp = ind_zero_error_qobdd(4, 0.5).map_err(|e| e.to_string())?;
    let f = FunctionOracle::ind(4).unwrap();
    let t = depth(&bp);
    for a in Assignment::all(6) {
        let p = evolve(&bp, &a, t).probabilities();
        let right = f.eval(&a).unwrap() as usize;
        ensure!(p[1 - right] <= TOL, "a = {a}: wrong output with {}", p[1 - right]);
        ensure!(p[2] <= 0.5 + TOL, "a = {a}: p_? = {}", p[2]);
    }
    Ok(())
}

fn random_projector(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> (CMatrix, CMatrix) {
    let u = random_unitary(rng, d);
    let cols = u.columns(0, rank).into_owned();
    let p = &cols * cols.adjoint();
    let q = CMatrix::identity(d, d) - &p;
    (p, q)
}

/// Random density matrix supported on the range of the projector `p`.
fn supported_on(rng: &mut ChaCha8Rng, p: &CMatrix) -> CMatrix {
    let d = p.nrows();
    let rank = rng.gen_range(1..=d);
    let r = random_density(rng, d, rank);
    let s = p * r * p;
    let tr = s.trace().re;
    s / C64::new(tr, 0.0)
}

fn mix(a: &CMatrix, b: &CMatrix, w: f64) -> CMatrix {
    a * C64::new(1.0 - w, 0.0) + b * C64::new(w, 0.0)
}

fn entropy_invariants() -> Result<(), String> {
    let f = FunctionOracle::disj(6).unwrap();
    let bp = reversible_tree(&f, &[0, 1, 2, 3, 4, 5]).map_err(|e| e.to_string())?;
    let acc = entropy_accumulation(&bp, &f, 1.0).map_err(|e| e.to_string())?;
    for k in 1..=3 {
        let pt = acc.points.iter().find(|p| p.k == k).ok_or(format!("no point for k = {k}"))?;
        ensure!(pt.entropy >= k as f64 - 1e-6, "S(sigma({k})) = {}", pt.entropy);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nayak_bad = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=8);
        let rank = rng.gen_range(1..d);
        let (p0, p1) = random_projector(&mut rng, d, rank);
        let noise = random_density(&mut rng, d, d);
        let l0 = rng.gen_range(0.0..0.5);
        let l1 = rng.gen_range(0.0..0.5);
        let s0 = mix(&supported_on(&mut rng, &p0), &noise, l0);
        let s1 = mix(&supported_on(&mut rng, &p1), &noise, l1);
        let q0 = (&p0 * &s0).trace().re;
        let q1 = (&p1 * &s1).trace().re;
        let p = q0.min(q1).clamp(0.5, 1.0);
        let s0 = DensityState::new(s0, 1e-9).map_err(|e| e.to_string())?;
        let s1 = DensityState::new(s1, 1e-9).map_err(|e| e.to_string())?;
        let r = check_nayak(&s0, &s1, &p0, &p1, p, 1e-9).map_err(|e| e.to_string())?;
        ensure!(r.status != BoundStatus::PremiseFailed, "generated Nayak instance misses its premise: {:?}", r.note);
        if r.status == BoundStatus::Violated {
            nayak_bad += 1;
        }
    }
    ensure!(nayak_bad == 0, "{nayak_bad} Nayak violations");

    let mut klauck_bad = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(3..=8);
        // Split C^d into E_0, E_1 and E_? along a random basis.
        let u = random_unitary(&mut rng, d);
        let k0 = rng.gen_range(1..=d - 2);
        let k1 = rng.gen_range(1..=d - 1 - k0);
        let proj = |a: usize, b: usize| {
            let c = u.columns(a, b - a).into_owned();
            &c * c.adjoint()
        };
        let (m0, m1, mq) = (proj(0, k0), proj(k0, k0 + k1), proj(k0 + k1, d));
        let s0 = mix(&supported_on(&mut rng, &m0), &supported_on(&mut rng, &mq), rng.gen_range(0.0..1.0));
        let s1 = mix(&supported_on(&mut rng, &m1), &supported_on(&mut rng, &mq), rng.gen_range(0.0..1.0));
        let fail0 = (&mq * &s0).trace().re;
        let fail1 = (&mq * &s1).trace().re;
        let eps = fail0.max(fail1).clamp(0.0, 1.0);
        let p = rng.gen_range(0.0..=1.0);
        let s0 = DensityState::new(s0, 1e-9).map_err(|e| e.to_string())?;
        let s1 = DensityState::new(s1, 1e-9).map_err(|e| e.to_string())?;
        let r = check_klauck(&s0, &s1, &m0, &m1, &mq, p, eps, 1e-9).map_err(|e| e.to_string())?;
        ensure!(r.status != BoundStatus::PremiseFailed, "generated Klauck instance misses its premise: {:?}", r.note);
        if r.status == BoundStatus::Violated {
            klauck_bad += 1;
        }
    }
    ensure!(klauck_bad == 0, "{klauck_bad} Klauck violations");
    Ok(())
}

fn measurement_schemes() -> Result<(), String> {
    let xor = FunctionOracle::xor(4);
    let g = min_reversible_obdd(&xor, &[0, 1, 2, 3]).map_err(|e| e.to_string())?;
    let gq = g.with_mode(Mode::Quantum).map_err(|e| e.to_string())?;
    let ind = FunctionOracle::ind(4).unwrap();
    let h = min_reversible_obdd(&ind, &[0, 1, 2, 3, 4, 5]).map_err(|e| e.to_string())?;
    let hq = ind_zero_error_qobdd(4, 0.5).map_err(|e| e.to_string())?;
    for (name, g, gq, eps) in [("parity_4", &g, &gq, 0.0), ("IND_4", &h, &hq, 0.5)] {
        let all = build_schemes(g, gq).map_err(|e| format!("{name}: {e}"))?;
        ensure!(!all.is_empty(), "{name}: no levels");
        for c in all {
            let rep = verify_scheme(&c.scheme, TOL);
            ensure!(rep.ok, "{name} level {}: {rep}", c.level);
            let need = (c.rev_level_size as f64).powf(1.0 - eps);
            ensure!(
                c.qobdd_level_size as f64 >= need - 1e-9 && c.size_bound_holds,
                "{name} level {}: |L'| = {} < |L|^(1-eps) = {need}",
                c.level,
                c.qobdd_level_size
            );
        }
    }
    Ok(())
}

fn gate_basis() -> Result<(), String> {
    for d in 2..=4 {
        let id = CMatrix::identity(d, d);
        for g in ElementaryGate::all(d) {
            let w = g.matrix();
            ensure!(is_unitary(&w, 1e-12), "{g} not unitary");
            if g.i <= 3 {
                let inv = ElementaryGate::new(g.i + 3, g.j, d).map_err(|e| e.to_string())?;
                let defect = (&w * inv.matrix() - &id).iter().fold(0.0f64, |m, z| m.max(z.norm()));
                ensure!(defect <= 1e-12, "{g} * inverse differs from I by {defect}");
            }
        }
    }
    // Every word of length <= 2 is found again with zero error.
    for d in [2, 3] {
        let gates = ElementaryGate::all(d);
        let mut words = vec![GateWord::identity(d)];
        for a in &gates {
            words.push(GateWord::from_gates(d, vec![*a]).unwrap());
            for b in &gates {
                words.push(GateWord::from_gates(d, vec![*a, *b]).unwrap());
            }
        }
        for w in words {
            let res = approx_search(w.product(), 1e-9, SearchOptions::new(2)).map_err(|e| e.to_string())?;
            ensure!(res.is_found(), "word {w} not recovered");
            ensure!(res.error() <= 1e-12, "word {w} recovered with error {}", res.error());
            ensure!(res.word().len() <= w.len(), "word {w} recovered by a longer word");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..100 {
        let d = rng.gen_range(2..=4);
        let k = rng.gen_range(1..=6);
        let mut u = CMatrix::identity(d, d);
        let mut v = CMatrix::identity(d, d);
        let mut errors = Vec::new();
        for _ in 0..k {
            let ui = random_unitary(&mut rng, d);
            let size = rng.gen_range(0.0..0.2);
            let vi = &ui * exp_i_hermitian(&random_hermitian(&mut rng, d, size));
            errors.push(operator_norm_svd(&(&ui - &vi)));
            u = u * ui;
            v = v * vi;
        }
        let actual = operator_norm_svd(&(u - v));
        let bound = product_error_bound(&errors);
        ensure!(actual <= bound + 1e-12, "trial {trial}: {actual} > {bound}");
    }
    Ok(())
}

fn qtm_cross_simulation() -> Result<(), String> {
    let mut machines = vec![qtm::immediate_halt(), qtm::interference(), qtm::leaky_loop()];
    for n in 1..=6 {
        machines.push(qtm::or_machine(n));
        machines.push(qtm::parity_machine(n));
    }
    let t = 20;
    for spec in machines {
        let m = spec.build().map_err(|e| e.to_string())?;
        let c = compile_to_qbp(&m).map_err(|e| e.to_string())?;
        ensure!(c.configurations.len() as f64 <= c.bound, "configuration bound exceeded");
        for a in Assignment::all(m.input_len()) {
            let p = simulate_qtm(&m, &a, t).map_err(|e| e.to_string())?;
            let q = evolve(&c.program, &a, t);
            for s in 0..=t {
                for r in 0..3 {
                    ensure!(
                        (p.halting[s][r] - q.halting[s][r]).abs() <= TOL,
                        "machine with {} states, a = {a}, t = {s}",
                        m.spec().states.len()
                    );
                }
            }
        }
    }
    Ok(())
}

fn oracle_sizes() -> Result<(), String> {
    let cases = [
        ("DISJ_4", FunctionOracle::disj(4).unwrap(), 6),
        ("IP_4", FunctionOracle::ip(4).unwrap(), 8),
        ("PERM_2", FunctionOracle::perm(2), 9),
    ];
    for (name, f, want) in cases {
        let order: Vec<usize> = (0..f.n_vars()).collect();
        let got = min_obdd_size(&f, &order).map_err(|e| e.to_string())?;
        ensure!(got == want, "{name}: {got} != {want}");
    }
    ensure!(is_k_stable(&FunctionOracle::det_z2(3), 2).map_err(|e| e.to_string())?, "DET_Z2 3x3 not 2-stable");
    ensure!(!is_k_stable(&FunctionOracle::xor(3), 2).map_err(|e| e.to_string())?, "XOR_3 reported 2-stable");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 15] = [
        ("PERM_3 one-sided error", perm_one_sided),
        ("introductory example halts with output 1", fig1_narrative),
        ("validation soundness", validation_soundness),
        ("leveling preserves probabilities and size bound", leveling),
        ("realification", realification),
        ("perturbation bound", perturbation),
        ("probabilistic clock", clock),
        ("exact linear-size gm OBDDs", gm_exactness),
        ("randomized to gm translation", randomized_to_gm_check),
        ("zero-error IND", zero_error_ind),
        ("entropy accumulation and inequalities", entropy_invariants),
        ("measurement schemes", measurement_schemes),
        ("gate basis and search", gate_basis),
        ("QTM and compiled QBP agree", qtm_cross_simulation),
        ("oracle OBDD sizes and stability", oracle_sizes),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {e}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

