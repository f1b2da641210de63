use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbplab::analysis::{entropy_of_matrix, min_obdd_size, subfunction_counts};
use qbplab::families::random::{random_leveled_qbp, random_qbp, random_randomized_obdd};
use qbplab::families::FunctionOracle;
use qbplab::gateset::{phase_distance, ElementaryGate, GateWord, UniversalCode};
use qbplab::linalg::{is_unitary, operator_norm, operator_norm_svd, random_density, random_unitary, CMatrix};
use qbplab::model::{parse_program, serialize_program};
use qbplab::semantics::{
    absolute_probabilities, classical_eval, complete_unitary, evolve, evolve_gm, Method,
};
use qbplab::transforms::{align_levels, amplify, levelize, randomized_to_gm, realify, ClockParams, Combiner};
use qbplab::validate::{check_leveled, check_unidirectional, check_well_formed, validate_profile};
use qbplab::{Assignment, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_programs_satisfy_their_profile(seed in any::<u64>(), n in 1usize..=4, size in 2usize..=12) {
        let g = random_qbp(&mut rng(seed), n, size);
        let rep = validate_profile(&g, 1e-9);
        prop_assert!(rep.ok, "{}", rep);
        prop_assert!(check_unidirectional(&g).ok);
    }

    #[test]
    fn completed_time_evolution_is_unitary(seed in any::<u64>(), n in 1usize..=3, idx in any::<u64>()) {
        let g = random_qbp(&mut rng(seed), n, 10);
        let a = Assignment::from_index(n, idx % (1 << n));
        let u = complete_unitary(&g, &a).unwrap();
        prop_assert!(is_unitary(&u, 1e-9));
    }

    #[test]
    fn probability_mass_is_conserved(seed in any::<u64>(), n in 1usize..=3, t in 0usize..12) {
        let g = random_qbp(&mut rng(seed), n, 10);
        for a in Assignment::all(n) {
            let tr = evolve(&g, &a, t);
            let total: f64 = tr.probabilities().iter().sum::<f64>() + tr.final_residual();
            prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
            // Cumulative probabilities never decrease.
            for s in 1..=t {
                for r in 0..3 {
                    prop_assert!(tr.cumulative(s)[r] >= tr.cumulative(s - 1)[r] - 1e-15);
                }
            }
        }
    }

    #[test]
    fn levelize_is_leveled_and_faithful(seed in any::<u64>(), n in 1usize..=3, t in 0usize..=5) {
        let g = random_qbp(&mut rng(seed), n, 10);
        let l = levelize(&g, t).unwrap();
        prop_assert!(check_leveled(&l).unwrap().levels().is_some());
        prop_assert!(check_well_formed(&l, 1e-9).unwrap().ok);
        prop_assert!(l.size() <= (t + 1) * (t + 1) * g.size());
        for a in Assignment::all(n) {
            let p = evolve(&g, &a, t).cumulative(t);
            let q = evolve(&l, &a, t).cumulative(t);
            for r in 0..3 {
                prop_assert!((p[r] - q[r]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn realify_is_real_and_faithful(seed in any::<u64>(), n in 1usize..=3) {
        let g = random_qbp(&mut rng(seed), n, 10);
        let r = realify(&g).unwrap();
        prop_assert!(r.size() <= 2 * g.size());
        prop_assert!(r.edges().iter().all(|e| e.amp.im == 0.0));
        prop_assert!(validate_profile(&r, 1e-9).ok);
        for a in Assignment::all(n) {
            let p = evolve(&g, &a, 10);
            let q = evolve(&r, &a, 10);
            for t in 0..=10 {
                for k in 0..3 {
                    prop_assert!((p.halting[t][k] - q.halting[t][k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>(), n in 1usize..=4) {
        let g = random_qbp(&mut rng(seed), n, 12);
        let text = serialize_program(&g);
        let h = parse_program(&text).unwrap();
        prop_assert_eq!(serialize_program(&h), text);
        for a in Assignment::all(n) {
            let p = evolve(&g, &a, 6).probabilities();
            let q = evolve(&h, &a, 6).probabilities();
            for r in 0..3 {
                prop_assert!((p[r] - q[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn methods_agree_on_acyclic_programs(seed in any::<u64>(), n in 1usize..=3, levels in 1usize..=4) {
        let g = random_leveled_qbp(&mut rng(seed), n, levels, 3);
        let depth = g.depth().unwrap();
        for a in Assignment::all(n) {
            let e = evolve(&g, &a, depth).probabilities();
            let it = absolute_probabilities(&g, &a, Method::Iterate { t_max: 100, tail_tol: 1e-14 }).unwrap().p;
            let dm = absolute_probabilities(&g, &a, Method::Damped { delta: 1e-10 }).unwrap().p;
            for r in 0..3 {
                prop_assert!((e[r] - it[r]).abs() < 1e-9);
                prop_assert!((e[r] - dm[r]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn aligned_programs_keep_their_distribution(seed in any::<u64>(), n in 1usize..=3, levels in 1usize..=4) {
        let g = random_leveled_qbp(&mut rng(seed), n, levels, 3);
        if let Ok(al) = align_levels(&g) {
            let d = al.levels.len();
            for a in Assignment::all(n) {
                let p = evolve(&g, &a, 2 * d).probabilities();
                let q = evolve(&al.program, &a, 2 * d).probabilities();
                for r in 0..3 {
                    prop_assert!((p[r] - q[r]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_copy_amplification_is_the_identity(seed in any::<u64>(), n in 1usize..=3, levels in 1usize..=3) {
        let g = random_leveled_qbp(&mut rng(seed), n, levels, 3);
        if let Ok(h) = amplify(&g, 1, Combiner::AllAccept) {
            for a in Assignment::all(n) {
                let p = evolve(&g, &a, 3 * levels + 3).probabilities();
                let q = evolve(&h, &a, 3 * levels + 3).probabilities();
                for r in 0..3 {
                    prop_assert!((p[r] - q[r]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn randomized_programs_translate_to_gm(seed in any::<u64>(), n in 1usize..=6) {
        let bp = random_randomized_obdd(&mut rng(seed), n, 3);
        prop_assert!(validate_profile(&bp, 1e-9).ok);
        let g = randomized_to_gm(&bp).unwrap();
        prop_assert!(validate_profile(&g, 1e-9).ok);
        for a in Assignment::all(n) {
            let want = classical_eval(&bp, &a).unwrap();
            let got = evolve_gm(&g, &a, n + 1).unwrap().probabilities();
            prop_assert!((want.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for r in 0..3 {
                prop_assert!((want[r] - got[r]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn entropy_lies_between_zero_and_log_dimension(seed in any::<u64>(), d in 1usize..=8, rank in 1usize..=8) {
        let rho = random_density(&mut rng(seed), d, rank.min(d));
        let s = entropy_of_matrix(&rho, 1e-9).unwrap();
        prop_assert!(s >= -1e-9);
        prop_assert!(s <= (d as f64).log2() + 1e-9);
        if rank.min(d) == 1 {
            prop_assert!(s.abs() < 1e-7);
        }
    }

    #[test]
    fn power_iteration_matches_svd(seed in any::<u64>(), d in 1usize..=6) {
        let mut r = rng(seed);
        let a = qbplab::linalg::random_complex_matrix(&mut r, d, d);
        prop_assert!((operator_norm(&a) - operator_norm_svd(&a)).abs() < 1e-7 * operator_norm_svd(&a).max(1.0));
    }

    #[test]
    fn phase_distance_is_a_pseudometric(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_unitary(&mut r, d);
        let b = random_unitary(&mut r, d);
        let c = random_unitary(&mut r, d);
        let ab = phase_distance(&a, &b);
        prop_assert!((ab - phase_distance(&b, &a)).abs() < 1e-9);
        prop_assert!(ab <= operator_norm_svd(&(&a - &b)) + 1e-9);
        prop_assert!(ab <= phase_distance(&a, &c) + phase_distance(&c, &b) + 1e-9);
        let phased = &a * C64::from_polar(1.0, 0.7);
        prop_assert!(phase_distance(&a, &phased) < 1e-9);
    }

    #[test]
    fn universal_code_round_trips(seed in any::<u64>(), d in 2usize..=3, ell in 1usize..=4) {
        use rand::Rng;
        let mut r = rng(seed);
        let all = ElementaryGate::all(d);
        let gates: Vec<ElementaryGate> = (0..ell).map(|_| all[r.gen_range(0..all.len())]).collect();
        let code = UniversalCode::new(ell, 6 * (d - 1), d).unwrap();
        let bits = code.encode(&gates).unwrap();
        prop_assert_eq!(bits.len(), code.len());
        // Decoding yields U_ell ... U_1, the word read right to left.
        let w = GateWord::from_gates(d, gates.into_iter().rev().collect()).unwrap();
        let dec = code.decode(&bits).unwrap();
        prop_assert!(operator_norm_svd(&(dec - w.product())) < 1e-12);
    }

    #[test]
    fn assignment_index_round_trips(n in 1usize..=20, idx in any::<u64>()) {
        let i = idx % (1u64 << n);
        let a = Assignment::from_index(n, i);
        prop_assert_eq!(a.to_index(), i);
        prop_assert_eq!(Assignment::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn obdd_size_is_sum_of_level_widths(n in 1usize..=4) {
        let f = FunctionOracle::xor(n);
        let order: Vec<usize> = (0..n).collect();
        let widths = subfunction_counts(&f, &order).unwrap();
        prop_assert_eq!(min_obdd_size(&f, &order).unwrap(), widths.iter().sum::<usize>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn clock_identity_is_exact(t in 1u32..=ClockParams::MAX_T) {
        prop_assert!(ClockParams::identity_exact(t));
        let p = ClockParams::new(t).unwrap();
        prop_assert!(p.defect() <= 1e-12);
        prop_assert!(p.beta > 0.0 && p.gamma > 0.0);
    }
}

#[test]
fn inverse_gates_cancel() {
    for d in 2..=5 {
        let id = CMatrix::identity(d, d);
        for g in ElementaryGate::all(d) {
            let p = g.matrix() * g.inverse().matrix();
            assert!((p - &id).iter().all(|z| z.norm() < 1e-12), "{g}");
        }
    }
}
