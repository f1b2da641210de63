use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::FunctionOracle;
use crate::linalg::{hermitian_eigenvalues, CMatrix, CVector};
use crate::model::{Assignment, BranchingProgram, Mode};
use crate::semantics::{evolve, step, DensityState};
use crate::transforms::align_levels;

fn xlog(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Entropy in bits of a Hermitian matrix with trace 1 within `tol`.
///
/// Eigenvalues in `[-tol, 0]` are treated as 0.
pub fn entropy_of_matrix(m: &CMatrix, tol: f64) -> Result<f64> {
    let tr = m.trace().re;
    if (tr - 1.0).abs() > tol.max(1e-9) {
        return Err(Error::InvalidArgument(format!("density matrix has trace {tr}, expected 1")));
    }
    let ev = hermitian_eigenvalues(m);
    if let Some(&min) = ev.first() {
        if min < -tol.max(1e-9) {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(ev.into_iter().map(xlog).sum::<f64>().max(0.0))
}

/// `S(σ) = −Σ λ log λ` in bits.
pub fn von_neumann_entropy(sigma: &DensityState) -> Result<f64> {
    entropy_of_matrix(sigma.matrix(), 1e-9)
}

/// `H(p)` in bits with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(xlog(p) + xlog(1.0 - p))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    Holds,
    Violated,
    PremiseFailed,
}

/// Both sides of an entropy inequality `lhs ≥ rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub status: BoundStatus,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub slack: f64,
    /// Why the premise failed, if it did.
    pub note: Option<String>,
}

const INEQ_TOL: f64 = 1e-9;

fn prob(m: &CMatrix, sigma: &CMatrix) -> f64 {
    // tr(M σ M†) = tr(M†M σ)
    (m.adjoint() * m * sigma).trace().re
}

fn finish(lhs: f64, rhs: f64) -> BoundCheck {
    BoundCheck {
        status: if lhs >= rhs - INEQ_TOL {
            BoundStatus::Holds
        } else {
            BoundStatus::Violated
        },
        lhs,
        rhs,
        slack: lhs - rhs,
        note: None,
    }
}

fn premise_failed(note: String) -> BoundCheck {
    BoundCheck {
        status: BoundStatus::PremiseFailed,
        lhs: f64::NAN,
        rhs: f64::NAN,
        slack: f64::NAN,
        note: Some(note),
    }
}

/// `S((σ_0+σ_1)/2) ≥ (S(σ_0)+S(σ_1))/2 + 1 − H(p)` given a two-outcome
/// measurement `(P_0, P_1)` that recognises `σ_b` with probability `≥ p ≥ 1/2`.
pub fn check_nayak(s0: &DensityState, s1: &DensityState, p0: &CMatrix, p1: &CMatrix, p: f64, tol: f64) -> Result<BoundCheck> {
    if !(0.5..=1.0).contains(&p) {
        return Ok(premise_failed(format!("p = {p} outside [1/2, 1]")));
    }
    for (b, (s, m)) in [(s0, p0), (s1, p1)].into_iter().enumerate() {
        let q = prob(m, s.matrix());
        if q < p - tol {
            return Ok(premise_failed(format!("Pr[M(sigma_{b}) = {b}] = {q:.6} < p")));
        }
    }
    let mix = (s0.matrix() + s1.matrix()) * crate::linalg::ONE.scale(0.5);
    let lhs = entropy_of_matrix(&mix, tol)?;
    let rhs = (von_neumann_entropy(s0)? + von_neumann_entropy(s1)?) / 2.0 + 1.0 - binary_entropy(p)?;
    Ok(finish(lhs, rhs))
}

/// `S(pσ_0+(1−p)σ_1) ≥ pS(σ_0)+(1−p)S(σ_1)+(1−ε)H(p)` given a zero-error
/// measurement `(M_0, M_1, M_?)` with failure probability at most `ε`.
#[allow(clippy::too_many_arguments)]
pub fn check_klauck(
    s0: &DensityState,
    s1: &DensityState,
    m0: &CMatrix,
    m1: &CMatrix,
    m_unknown: &CMatrix,
    p: f64,
    eps: f64,
    tol: f64,
) -> Result<BoundCheck> {
    let _ = m_unknown;
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&eps) {
        return Ok(premise_failed(format!("p = {p} or eps = {eps} outside [0, 1]")));
    }
    for (b, s) in [s0, s1].into_iter().enumerate() {
        let (right, wrong) = if b == 0 { (m0, m1) } else { (m1, m0) };
        let q = prob(right, s.matrix());
        let w = prob(wrong, s.matrix());
        if q < 1.0 - eps - tol {
            return Ok(premise_failed(format!("Pr[M(sigma_{b}) = {b}] = {q:.6} < 1 - eps")));
        }
        if w > tol {
            return Ok(premise_failed(format!("Pr[M(sigma_{b}) = {}] = {w:.3e} > 0", 1 - b)));
        }
    }
    let mix = s0.matrix() * crate::linalg::ONE.scale(p) + s1.matrix() * crate::linalg::ONE.scale(1.0 - p);
    let lhs = entropy_of_matrix(&mix, tol)?;
    let rhs = p * von_neumann_entropy(s0)? + (1.0 - p) * von_neumann_entropy(s1)? + (1.0 - eps) * binary_entropy(p)?;
    Ok(finish(lhs, rhs))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyPoint {
    pub k: usize,
    pub entropy: f64,
    /// `(1 − H(p))·k`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyAccumulation {
    pub points: Vec<EntropyPoint>,
    /// `2^{(1−H(p))·n/2}` for `n/2` variable pairs.
    pub size_bound: f64,
    pub size: usize,
    pub size_ok: bool,
}

/// Entropy of the average state after the first `k` variable pairs, with
/// the first variable of each pair uniform and its partner 0.
///
/// `σ(k)` is the exact uniform mixture over all `2^k` settings, restricted
/// to the nodes of the level reached after `2k` variables.
pub fn entropy_accumulation(bp: &BranchingProgram, f: &FunctionOracle, p: f64) -> Result<EntropyAccumulation> {
    let n = bp.n_vars();
    if n % 2 != 0 || f.n_vars() != n {
        return Err(Error::InvalidArgument(format!(
            "need an even number of variables matching the function, got {n} and {}",
            f.n_vars()
        )));
    }
    let q = bp.with_mode(Mode::Quantum)?;
    let horizon = q.depth().ok_or(Error::Cyclic)?;
    for a in Assignment::all(n) {
        let want = f.eval(&a).ok_or_else(|| Error::Premise(format!("function undefined on {a}")))?;
        let got = evolve(&q, &a, horizon).probabilities()[want as usize];
        if got < p - 1e-9 {
            return Err(Error::Premise(format!("success probability {got:.6} < {p} on input {a}")));
        }
    }
    let al = align_levels(&q)?;
    let h = binary_entropy(p)?;
    let mut points = Vec::new();
    for k in 1..=n / 2 {
        let mut prefix: Vec<usize> = al.order.iter().take(2 * k).cloned().collect();
        prefix.sort_unstable();
        if prefix != (0..2 * k).collect::<Vec<_>>() {
            return Err(Error::Premise(format!(
                "variable order {:?} does not read the first {k} pairs first",
                al.order
            )));
        }
        let level = &al.levels[2 * k];
        let dim = level.len();
        let index: std::collections::HashMap<usize, usize> = level.iter().enumerate().map(|(i, v)| (v.0, i)).collect();
        let mut sigma = CMatrix::zeros(dim, dim);
        for bits in 0..(1u64 << k) {
            let mut a = Assignment::zeros(n);
            for i in 0..k {
                a.set(2 * i, bits >> i & 1 == 1);
            }
            let mut psi = vec![crate::linalg::ZERO; al.program.size()];
            psi[al.program.start().0] = crate::linalg::ONE;
            for _ in 0..2 * k {
                psi = step(&al.program, &a, &psi);
            }
            let mut v = CVector::zeros(dim);
            for (w, amp) in psi.iter().enumerate() {
                if amp.norm_sqr() > 0.0 {
                    let i = index.get(&w).ok_or_else(|| {
                        Error::Structure(format!("node {w} carries amplitude off level {}", 2 * k))
                    })?;
                    v[*i] = *amp;
                }
            }
            sigma += &v * v.adjoint();
        }
        sigma /= crate::linalg::ONE.scale((1u64 << k) as f64);
        let entropy = entropy_of_matrix(&sigma, 1e-9)?;
        let bound = (1.0 - h) * k as f64;
        points.push(EntropyPoint {
            k,
            entropy,
            bound,
            holds: entropy >= bound - INEQ_TOL,
        });
    }
    let size_bound = 2f64.powf((1.0 - h) * (n / 2) as f64);
    Ok(EntropyAccumulation {
        points,
        size_bound,
        size: bp.size(),
        size_ok: size_bound <= bp.size() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_density, ONE, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn proj(d: usize, idx: &[usize]) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        for &i in idx {
            m[(i, i)] = ONE;
        }
        m
    }

    #[test]
    fn entropy_basics() {
        let pure = DensityState::new(proj(2, &[0]), 1e-9).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let mixed = DensityState::new(proj(2, &[0, 1]) * ONE.scale(0.5), 1e-9).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
        let _ = ZERO;
    }

    #[test]
    fn entropy_at_most_log_dim() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..6 {
            for _ in 0..20 {
                let m = random_density(&mut rng, d, d);
                let s = entropy_of_matrix(&m, 1e-9).unwrap();
                assert!(s >= -1e-9 && s <= (d as f64).log2() + 1e-9);
            }
        }
    }

    #[test]
    fn nayak_orthogonal_is_tight() {
        let s0 = DensityState::new(proj(2, &[0]), 1e-9).unwrap();
        let s1 = DensityState::new(proj(2, &[1]), 1e-9).unwrap();
        let r = check_nayak(&s0, &s1, &proj(2, &[0]), &proj(2, &[1]), 1.0, 1e-9).unwrap();
        assert_eq!(r.status, BoundStatus::Holds);
        assert!(r.slack.abs() < 1e-9);
        let r = check_nayak(&s0, &s0, &proj(2, &[0]), &proj(2, &[1]), 0.75, 1e-9).unwrap();
        assert_eq!(r.status, BoundStatus::PremiseFailed);
    }

    #[test]
    fn klauck_orthogonal_and_limit() {
        let s0 = DensityState::new(proj(3, &[0]), 1e-9).unwrap();
        let s1 = DensityState::new(proj(3, &[1]), 1e-9).unwrap();
        let (m0, m1, mq) = (proj(3, &[0]), proj(3, &[1]), proj(3, &[2]));
        let r = check_klauck(&s0, &s1, &m0, &m1, &mq, 0.5, 0.0, 1e-9).unwrap();
        assert_eq!(r.status, BoundStatus::Holds);
        assert!(r.slack.abs() < 1e-9);
        let r = check_klauck(&s0, &s1, &mq, &mq, &(m0 + m1), 0.5, 1.0, 1e-9).unwrap();
        assert_eq!(r.status, BoundStatus::Holds);
    }
}
