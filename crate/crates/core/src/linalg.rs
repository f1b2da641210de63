//! Small dense complex linear-algebra helpers built on nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entrywise modulus of `A†A − I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_defect(u) <= tol
}

/// Largest singular value via power iteration on `A†A`.
///
/// Iterates until the Rayleigh quotient changes by less than `1e-10`
/// relative, starting from a fixed vector so results are reproducible.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let ata = a.adjoint() * a;
    // Deterministic but generic start vector.
    let mut x = CVector::from_fn(n, |i, _| C64::new(1.0 + 0.37 * i as f64, 0.11 * (i as f64 + 1.0).sqrt()));
    x /= C64::new(x.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let y = &ata * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let next = x.dotc(&y).re;
        x = y / C64::new(ny, 0.0);
        if (next - lambda).abs() <= 1e-10 * next.abs().max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // One last Rayleigh quotient on the converged vector.
    let y = &ata * &x;
    lambda = lambda.max(x.dotc(&y).re);
    lambda.max(0.0).sqrt()
}

/// Largest singular value from a full SVD; used as an oracle.
pub fn operator_norm_svd(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `exp(i H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &CMatrix) -> CMatrix {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let q = eig.eigenvectors;
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        q.ncols(),
        eig.eigenvalues.iter().map(|&l| C64::new(0.0, l).exp()),
    ));
    &q * d * q.adjoint()
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; avoids an extra distribution dependency.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Random Hermitian matrix with operator norm exactly `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize, scale: f64) -> CMatrix {
    let g = random_complex_matrix(rng, d, d);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let ev = hermitian_eigenvalues(&h);
    let norm = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 {
        return CMatrix::zeros(d, d);
    }
    h * C64::new(scale / norm, 0.0)
}

/// Orthonormalize the columns of a random Gaussian matrix (rows >= cols).
pub fn random_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    loop {
        let g = random_complex_matrix(rng, rows, cols);
        let mut basis: Vec<CVector> = Vec::with_capacity(cols);
        let mut ok = true;
        for j in 0..cols {
            let mut v = g.column(j).into_owned();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&v);
                    v -= b * c;
                }
            }
            let n = v.norm();
            if n < 1e-8 {
                ok = false;
                break;
            }
            basis.push(v / C64::new(n, 0.0));
        }
        if ok {
            return CMatrix::from_columns(&basis);
        }
    }
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    random_isometry(rng, d, d)
}

/// Random density matrix of dimension `d` with the given rank.
pub fn random_density<R: Rng>(rng: &mut R, d: usize, rank: usize) -> CMatrix {
    let g = random_complex_matrix(rng, d, rank.max(1));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho / C64::new(tr, 0.0)
}

/// Extend orthonormal columns `cols` (each of length `dim`) to a basis,
/// drawing new vectors from residuals of standard basis vectors.
///
/// Candidates are visited in the order given by `order`; at each step the
/// candidate with the largest residual is taken (ties: earliest in `order`),
/// orthonormalized with two passes of modified Gram-Schmidt.
pub fn complete_basis(dim: usize, cols: &[CVector], needed: usize, order: &[usize]) -> Option<Vec<CVector>> {
    let mut basis: Vec<CVector> = cols.to_vec();
    let mut out = Vec::with_capacity(needed);
    let mut used = vec![false; dim];
    for _ in 0..needed {
        let mut best: Option<(f64, usize, CVector)> = None;
        for &j in order {
            if used[j] {
                continue;
            }
            let mut v = CVector::zeros(dim);
            v[j] = ONE;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&v);
                    v -= b * c;
                }
            }
            let n = v.norm();
            if best.as_ref().map_or(true, |(bn, _, _)| n > *bn + 1e-12) {
                best = Some((n, j, v));
            }
        }
        let (n, j, v) = best?;
        if n < 1e-6 {
            return None;
        }
        used[j] = true;
        let v = v / C64::new(n, 0.0);
        basis.push(v.clone());
        out.push(v);
    }
    Some(out)
}

/// Numerical rank: number of singular values above `threshold`.
pub fn numerical_rank(m: &CMatrix, threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_of_identity_multiples() {
        let i3 = CMatrix::identity(3, 3);
        assert!((operator_norm(&i3) - 1.0).abs() < 1e-10);
        assert!((operator_norm(&(i3 * C64::new(2.0, 0.0))) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..6 {
            let a = random_complex_matrix(&mut rng, d, d);
            assert!((operator_norm(&a) - operator_norm_svd(&a)).abs() < 1e-8);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 5);
        assert!(is_unitary(&u, 1e-12));
    }

    #[test]
    fn exp_of_scaled_hermitian_is_close_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 4, 0.01);
        let r = exp_i_hermitian(&h);
        assert!(is_unitary(&r, 1e-12));
        assert!(operator_norm_svd(&(r - CMatrix::identity(4, 4))) <= 0.01 + 1e-12);
    }

    #[test]
    fn completion_fills_the_complement() {
        let mut v = CVector::zeros(3);
        v[0] = C64::new(0.6, 0.0);
        v[1] = C64::new(0.8, 0.0);
        let extra = complete_basis(3, &[v.clone()], 2, &[0, 1, 2]).unwrap();
        let m = CMatrix::from_columns(&[v, extra[0].clone(), extra[1].clone()]);
        assert!(is_unitary(&m, 1e-12));
    }
}
