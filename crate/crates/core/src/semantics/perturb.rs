use rand::Rng;
use serde::Serialize;

use super::evolve::{complete_unitary, dense_trace};
use crate::error::Result;
use crate::linalg::{exp_i_hermitian, operator_norm_svd, random_hermitian};
use crate::model::{Assignment, BranchingProgram};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationOutcome {
    /// `p_r(a, T)` under the exact evolution.
    pub p: [f64; 3],
    /// `p_r(a, T)` under the perturbed evolution.
    pub p_prime: [f64; 3],
    /// Measured `‖U′ − U(a)‖`.
    pub distance: f64,
    /// `2Tε`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// Compare `U(a)` with `U′ = U(a)·exp(iH)`, `‖H‖ = ε`, over `T` steps.
///
/// Since `‖exp(iH) − I‖ = 2 sin(‖H‖/2) ≤ ε`, the perturbed operator stays
/// within distance `ε`.
pub fn perturbation_check<R: Rng>(
    bp: &BranchingProgram,
    a: &Assignment,
    t: usize,
    eps: f64,
    rng: &mut R,
) -> Result<PerturbationOutcome> {
    let u = complete_unitary(bp, a)?;
    let d = u.nrows();
    let u2 = if eps == 0.0 {
        u.clone()
    } else {
        &u * exp_i_hermitian(&random_hermitian(rng, d, eps))
    };
    let distance = operator_norm_svd(&(&u2 - &u));
    let p = dense_trace(bp, &u, t).cumulative(t);
    let p_prime = dense_trace(bp, &u2, t).cumulative(t);
    let bound = 2.0 * t as f64 * eps;
    let bound_ok = (0..3).all(|r| (p[r] - p_prime[r]).abs() <= bound + 1e-12) && distance <= eps + 1e-12;
    Ok(PerturbationOutcome {
        p,
        p_prime,
        distance,
        bound,
        bound_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::fig1_example;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_perturbation_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = perturbation_check(&fig1_example(), &Assignment::zeros(2), 4, 0.0, &mut rng).unwrap();
        assert_eq!(out.p, out.p_prime);
        assert!(out.bound_ok);
    }

    #[test]
    fn huge_perturbation_is_vacuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = perturbation_check(&fig1_example(), &Assignment::zeros(2), 3, 2.0, &mut rng).unwrap();
        assert!(out.bound >= 2.0 && out.bound_ok);
    }
}
