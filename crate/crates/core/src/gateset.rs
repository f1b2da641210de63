//! Finite universal gate set, product approximation search and the
//! universal-code encoding of unitaries by boolean variables.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{is_unitary, CMatrix, CVector, ONE, ZERO};
pub use crate::linalg::operator_norm;

/// Comparisons against `ε` allow this much floating-point slack.
pub const EPS_SLACK: f64 = 1e-12;

/// Grid used to deduplicate matrices during search.
pub const DEDUP_GRID: f64 = 1e-3;

fn base_gate(i: usize) -> Matrix2<C64> {
    let s = 1.0 / 5f64.sqrt();
    let c = |re: f64, im: f64| C64::new(re * s, im * s);
    let v = match (i - 1) % 3 {
        0 => Matrix2::new(c(1.0, 0.0), c(0.0, 2.0), c(0.0, 2.0), c(1.0, 0.0)),
        1 => Matrix2::new(c(1.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)),
        _ => Matrix2::new(c(1.0, 2.0), ZERO, ZERO, c(1.0, -2.0)),
    };
    if i <= 3 {
        v
    } else {
        v.adjoint()
    }
}

/// One of the gates `W_{i,j}` of dimension `d`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementaryGate {
    pub i: usize,
    pub j: usize,
    pub d: usize,
}

impl ElementaryGate {
    pub fn new(i: usize, j: usize, d: usize) -> Result<Self> {
        if !(1..=6).contains(&i) || j == 0 || j >= d {
            return Err(Error::InvalidArgument(format!(
                "elementary gate W_{{{i},{j}}} undefined for dimension {d}"
            )));
        }
        Ok(ElementaryGate { i, j, d })
    }

    /// Every gate of dimension `d`, `i`-major then `j`.
    pub fn all(d: usize) -> Vec<ElementaryGate> {
        (1..=6)
            .flat_map(|i| (1..d).map(move |j| ElementaryGate { i, j, d }))
            .collect()
    }

    /// Position in the fixed enumeration `W_0 .. W_{b-1}`.
    pub fn index(&self) -> usize {
        (self.i - 1) * (self.d - 1) + (self.j - 1)
    }

    pub fn from_index(k: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
        }
        Self::new(k / (d - 1) + 1, k % (d - 1) + 1, d)
    }

    pub fn inverse(&self) -> ElementaryGate {
        let i = if self.i <= 3 { self.i + 3 } else { self.i - 3 };
        ElementaryGate { i, ..*self }
    }

    pub fn matrix(&self) -> CMatrix {
        let v = base_gate(self.i);
        let mut m = CMatrix::identity(self.d, self.d);
        let j = self.j - 1;
        for r in 0..2 {
            for c in 0..2 {
                m[(j + r, j + c)] = v[(r, c)];
            }
        }
        m
    }

    /// `m · W` computed on the two affected columns only.
    pub fn apply_right(&self, m: &CMatrix) -> CMatrix {
        let v = base_gate(self.i);
        let j = self.j - 1;
        let mut out = m.clone();
        for r in 0..m.nrows() {
            let (a, b) = (m[(r, j)], m[(r, j + 1)]);
            out[(r, j)] = a * v[(0, 0)] + b * v[(1, 0)];
            out[(r, j + 1)] = a * v[(0, 1)] + b * v[(1, 1)];
        }
        out
    }
}

impl fmt::Display for ElementaryGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{},{}", self.i, self.j)
    }
}

/// The unitary `W_{i,j}` of dimension `d` (1-based `i`, `j`).
pub fn elementary(i: usize, j: usize, d: usize) -> Result<CMatrix> {
    Ok(ElementaryGate::new(i, j, d)?.matrix())
}

/// Word `U_1 ⋯ U_k` of elementary gates with its product.
#[derive(Clone, Debug, Serialize)]
pub struct GateWord {
    pub d: usize,
    pub gates: Vec<ElementaryGate>,
    #[serde(skip)]
    product: CMatrix,
}

impl GateWord {
    pub fn identity(d: usize) -> Self {
        GateWord {
            d,
            gates: Vec::new(),
            product: CMatrix::identity(d, d),
        }
    }

    pub fn from_gates(d: usize, gates: Vec<ElementaryGate>) -> Result<Self> {
        let mut w = Self::identity(d);
        for g in gates {
            if g.d != d {
                return Err(Error::InvalidArgument(format!("gate {g} has dimension {}, expected {d}", g.d)));
            }
            w = w.push(g);
        }
        Ok(w)
    }

    pub fn push(&self, g: ElementaryGate) -> Self {
        let mut gates = self.gates.clone();
        gates.push(g);
        GateWord {
            d: self.d,
            gates,
            product: g.apply_right(&self.product),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn product(&self) -> &CMatrix {
        &self.product
    }

    /// Product recomputed from scratch with dense multiplication.
    pub fn recompute(&self) -> CMatrix {
        self.gates
            .iter()
            .fold(CMatrix::identity(self.d, self.d), |acc, g| acc * g.matrix())
    }
}

impl fmt::Display for GateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gates.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Eigenvalue phases of a unitary matrix, if they can be computed.
fn unitary_phases(u: &CMatrix) -> Option<Vec<f64>> {
    let eig = u.clone().schur().eigenvalues()?;
    Some(eig.iter().map(|z| z.arg()).collect())
}

/// `min_φ ‖a − e^{iφ} b‖` for unitary `a`, `b`.
///
/// With `a†b` having eigenphases spanning an arc of width `w`, the optimum
/// is `2 sin(w/4)`. Falls back to the phase-free distance if the eigen
/// decomposition fails.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let direct = operator_norm(&(a - b));
    let Some(mut ph) = unitary_phases(&(a.adjoint() * b)) else {
        return direct;
    };
    ph.sort_by(|x, y| x.total_cmp(y));
    let tau = std::f64::consts::TAU;
    // Largest gap between consecutive phases on the circle.
    let mut gap = ph[0] + tau - ph[ph.len() - 1];
    for w in ph.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let width = (tau - gap).max(0.0);
    (2.0 * (width / 4.0).sin()).min(direct)
}

/// Distance used by the search: phase-invariant unless `strict`.
pub fn word_distance(target: &CMatrix, product: &CMatrix, strict: bool) -> f64 {
    if strict {
        operator_norm(&(target - product))
    } else {
        phase_distance(target, product)
    }
}

#[derive(Clone, Debug)]
pub enum SearchResult {
    Found { word: GateWord, error: f64 },
    NotFound { best: GateWord, best_error: f64, explored: usize },
}

impl SearchResult {
    pub fn word(&self) -> &GateWord {
        match self {
            SearchResult::Found { word, .. } => word,
            SearchResult::NotFound { best, .. } => best,
        }
    }

    pub fn error(&self) -> f64 {
        match self {
            SearchResult::Found { error, .. } => *error,
            SearchResult::NotFound { best_error, .. } => *best_error,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchResult::Found { .. })
    }
}

#[derive(Copy, Clone, Debug)]
pub struct SearchOptions {
    pub max_depth: usize,
    /// Compare without optimizing the global phase.
    pub strict: bool,
    /// Cap on stored words per level; `None` means unbounded.
    pub frontier_limit: Option<usize>,
}

impl SearchOptions {
    pub fn new(max_depth: usize) -> Self {
        SearchOptions {
            max_depth,
            strict: false,
            frontier_limit: None,
        }
    }
}

fn grid_key(m: &CMatrix, strict: bool) -> Vec<i64> {
    // Remove the global phase first unless comparisons are strict.
    let mut phase = ONE;
    if !strict {
        if let Some(z) = m.iter().find(|z| z.norm() > 0.25) {
            phase = z.conj() / z.norm();
        }
    }
    m.iter()
        .flat_map(|z| {
            let w = z * phase;
            [(w.re / DEDUP_GRID).round() as i64, (w.im / DEDUP_GRID).round() as i64]
        })
        .collect()
}

/// Shortest word over the elementary gates within `eps` of `target`.
///
/// Breadth-first over word length with deduplication on a coarse grid and
/// without immediate inverse pairs. Among the words of the first length
/// that succeeds, the one with the smallest error is returned.
pub fn approx_search(target: &CMatrix, eps: f64, opts: SearchOptions) -> Result<SearchResult> {
    let d = target.nrows();
    if d < 2 || target.ncols() != d {
        return Err(Error::InvalidArgument(format!(
            "target must be square of dimension at least 2, got {}x{}",
            target.nrows(),
            target.ncols()
        )));
    }
    if !is_unitary(target, 1e-9) {
        return Err(Error::InvalidArgument("target matrix is not unitary".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
    }
    let gates = ElementaryGate::all(d);
    let root = GateWord::identity(d);
    let mut best_error = word_distance(target, root.product(), opts.strict);
    let mut best = root.clone();
    if best_error <= eps + EPS_SLACK {
        return Ok(SearchResult::Found { word: root, error: best_error });
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(grid_key(root.product(), opts.strict));
    let mut frontier = vec![root];
    let mut explored = 1;
    for _ in 0..opts.max_depth {
        let mut next = Vec::new();
        let mut level_best: Option<(GateWord, f64)> = None;
        for w in &frontier {
            for &g in &gates {
                if w.gates.last() == Some(&g.inverse()) {
                    continue;
                }
                let nw = w.push(g);
                if !seen.insert(grid_key(nw.product(), opts.strict)) {
                    continue;
                }
                explored += 1;
                let err = word_distance(target, nw.product(), opts.strict);
                if err < best_error {
                    best_error = err;
                    best = nw.clone();
                }
                if err <= eps + EPS_SLACK && level_best.as_ref().map_or(true, |(_, e)| err < *e) {
                    level_best = Some((nw.clone(), err));
                }
                if opts.frontier_limit.map_or(true, |l| next.len() < l) {
                    next.push(nw);
                }
            }
        }
        if let Some((word, _)) = level_best {
            // Report the error of the returned word recomputed densely.
            let error = word_distance(target, &word.recompute(), opts.strict);
            return Ok(SearchResult::Found { word, error });
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(SearchResult::NotFound { best, best_error, explored })
}

/// Triangle bound `Σ ε_i` on `‖U_1⋯U_n − V_1⋯V_n‖` for factors of norm ≤ 1.
pub fn product_error_bound(errors: &[f64]) -> f64 {
    errors.iter().sum()
}

/// Layout of a universal `(ε, ℓ, m)`-code of `d×d` unitaries.
///
/// Bit `x_{i,j}` (1-based) sits at index `(i−1)(m+1) + (j−1)`; row `i`
/// contributes `v(x_i) = x_{i,1}+⋯+x_{i,m}` to the running index and its
/// last bit switches the gate on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalCode {
    pub ell: usize,
    pub m: usize,
    pub d: usize,
}

impl UniversalCode {
    pub fn new(ell: usize, m: usize, d: usize) -> Result<Self> {
        if d < 2 || ell == 0 {
            return Err(Error::InvalidArgument(format!("invalid code shape ell={ell}, m={m}, d={d}")));
        }
        Ok(UniversalCode { ell, m, d })
    }

    /// Number of distinct elementary gates, `6(d−1)`.
    pub fn b(&self) -> usize {
        6 * (self.d - 1)
    }

    pub fn len(&self) -> usize {
        self.ell * (self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gate applied by each row (`None` when the row is switched off).
    pub fn rows(&self, bits: &[bool]) -> Result<Vec<Option<ElementaryGate>>> {
        if bits.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "code needs {} bits, got {}",
                self.len(),
                bits.len()
            )));
        }
        let mut sum = 0usize;
        let mut out = Vec::with_capacity(self.ell);
        for row in bits.chunks(self.m + 1) {
            sum = (sum + row[..self.m].iter().filter(|&&x| x).count()) % self.b();
            out.push(if row[self.m] {
                Some(ElementaryGate::from_index(sum, self.d)?)
            } else {
                None
            });
        }
        Ok(out)
    }

    /// `W(x) = U_ℓ ⋯ U_1`.
    pub fn decode(&self, bits: &[bool]) -> Result<CMatrix> {
        let mut w = CMatrix::identity(self.d, self.d);
        for g in self.rows(bits)?.into_iter().flatten() {
            w = g.matrix() * w;
        }
        Ok(w)
    }

    /// Bits encoding `g_1` applied first, then `g_2`, ... (one row each,
    /// padded with switched-off rows). Requires `m ≥ b − 1`.
    pub fn encode(&self, gates: &[ElementaryGate]) -> Result<Vec<bool>> {
        if gates.len() > self.ell || self.m + 1 < self.b() {
            return Err(Error::InvalidArgument(format!(
                "cannot encode {} gates in a code with ell={}, m={}",
                gates.len(),
                self.ell,
                self.m
            )));
        }
        let mut bits = vec![false; self.len()];
        let mut sum = 0usize;
        for (r, g) in gates.iter().enumerate() {
            let want = g.index();
            let v = (want + self.b() - sum) % self.b();
            let row = &mut bits[r * (self.m + 1)..(r + 1) * (self.m + 1)];
            for x in row.iter_mut().take(v) {
                *x = true;
            }
            row[self.m] = true;
            sum = want;
        }
        Ok(bits)
    }
}

/// Distances of `y` to the spans of the first and last `d/2` basis vectors.
pub fn half_space_distances(y: &CVector) -> (f64, f64) {
    let h = y.len() / 2;
    let low: f64 = y.iter().take(h).map(|z| z.norm_sqr()).sum();
    let high: f64 = y.iter().skip(h).map(|z| z.norm_sqr()).sum();
    // Distance to V_0 is the weight outside V_0.
    (high.sqrt(), low.sqrt())
}

/// Evaluate the partial function on three codes: decode `A`, `B`, `C`,
/// form `y = CBA|1⟩` and answer `z` when `y` lies within `θ` of `V_z`.
pub fn r_function_eval(code: &UniversalCode, a: &[bool], b: &[bool], c: &[bool], theta: f64) -> Result<Option<bool>> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1/sqrt 2), got {theta}")));
    }
    if code.d % 2 != 0 {
        return Err(Error::InvalidArgument(format!("dimension must be even, got {}", code.d)));
    }
    let m = code.decode(c)? * code.decode(b)? * code.decode(a)?;
    let y = m.column(0).into_owned();
    let (d0, d1) = half_space_distances(&y);
    Ok(if d0 <= theta {
        Some(false)
    } else if d1 <= theta {
        Some(true)
    } else {
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm_svd, random_unitary, unitarity_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gates_are_unitary_with_inverses() {
        for d in 2..=4 {
            for g in ElementaryGate::all(d) {
                assert!(unitarity_defect(&g.matrix()) < 1e-12);
                let p = g.matrix() * g.inverse().matrix();
                assert!(operator_norm(&(p - CMatrix::identity(d, d))) < 1e-12);
            }
        }
        let v1 = elementary(1, 1, 2).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert!((v1[(0, 1)] - C64::new(0.0, 2.0 * s)).norm() < 1e-15);
        assert!(elementary(7, 1, 2).is_err());
        assert!(elementary(1, 2, 2).is_err());
    }

    #[test]
    fn enumeration_round_trips() {
        for d in 2..=5 {
            for (k, g) in ElementaryGate::all(d).iter().enumerate() {
                assert_eq!(g.index(), k);
                assert_eq!(ElementaryGate::from_index(k, d).unwrap(), *g);
            }
        }
    }

    #[test]
    fn untouched_coordinates_stay_fixed() {
        let w = elementary(2, 2, 4).unwrap();
        for k in [0, 3] {
            for r in 0..4 {
                let want = if r == k { ONE } else { ZERO };
                assert_eq!(w[(r, k)], want);
            }
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let v = elementary(2, 1, 2).unwrap();
        let w = &v * C64::from_polar(1.0, 0.7);
        assert!(phase_distance(&v, &w) < 1e-9);
        assert!(operator_norm(&(&v - &w)) > 0.5);
    }

    #[test]
    fn search_finds_short_words() {
        let v1 = elementary(1, 1, 2).unwrap();
        let r = approx_search(&v1, 0.0, SearchOptions::new(3)).unwrap();
        assert!(r.is_found());
        assert_eq!(r.word().len(), 1);
        let v12 = &v1 * elementary(2, 1, 2).unwrap();
        let r = approx_search(&v12, 1e-9, SearchOptions::new(3)).unwrap();
        assert_eq!(r.word().len(), 2);
        assert!(r.error() <= 1e-9);
    }

    #[test]
    fn search_error_improves_with_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_unitary(&mut rng, 2);
        let mut last = f64::INFINITY;
        for depth in 0..5 {
            let r = approx_search(&t, 0.0, SearchOptions::new(depth)).unwrap();
            assert!(r.error() <= last + 1e-12);
            last = r.error();
        }
    }

    #[test]
    fn svd_and_power_iteration_agree() {
        let a = elementary(1, 1, 2).unwrap() - elementary(2, 1, 2).unwrap();
        assert!((operator_norm(&a) - operator_norm_svd(&a)).abs() < 1e-8);
    }

    #[test]
    fn code_decoding() {
        let code = UniversalCode::new(3, 6, 2).unwrap();
        assert_eq!(code.b(), 6);
        let off = vec![false; code.len()];
        assert!(operator_norm(&(code.decode(&off).unwrap() - CMatrix::identity(2, 2))) < 1e-15);
        let mut one = off.clone();
        one[6] = true;
        let w0 = ElementaryGate::from_index(0, 2).unwrap().matrix();
        assert!(operator_norm(&(code.decode(&one).unwrap() - w0)) < 1e-15);
        let gates = [ElementaryGate::new(2, 1, 2).unwrap(), ElementaryGate::new(6, 1, 2).unwrap()];
        let bits = code.encode(&gates).unwrap();
        let want = gates[1].matrix() * gates[0].matrix();
        assert!(operator_norm(&(code.decode(&bits).unwrap() - want)) < 1e-14);
    }

    #[test]
    fn r_function_identity_codes() {
        let code = UniversalCode::new(2, 18, 4).unwrap();
        let off = vec![false; code.len()];
        assert_eq!(r_function_eval(&code, &off, &off, &off, 0.5).unwrap(), Some(false));
        assert!(r_function_eval(&code, &off, &off, &off, 0.8).is_err());
    }
}
