use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::evolve::step;
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::model::{Assignment, BranchingProgram, NodeId};
use crate::DEFAULT_TOL;

/// Reachable-set size up to which the damped system is solved densely.
/// The dense system has `r^2` unknowns, so LU costs `O(r^6)`.
pub const DENSE_LIMIT: usize = 24;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub enum Method {
    /// Run the evolution until the continuing mass is at most `tail_tol`.
    Iterate { t_max: usize, tail_tol: f64 },
    /// Solve the damped reachability series with `z = 1 - delta`.
    Damped { delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsoluteProbabilities {
    /// `[p_0, p_1, p_?]`.
    pub p: [f64; 3],
    pub uncertainty: f64,
    /// Human-readable description of the method actually used.
    pub method: String,
    /// Evolution steps or solver iterations performed.
    pub work: usize,
}

/// Nodes reachable from the start when following `L(a)`.
fn reachable_under(bp: &BranchingProgram, a: &Assignment) -> Vec<usize> {
    let mut seen = vec![false; bp.size()];
    let mut stack = vec![bp.start()];
    seen[bp.start().0] = true;
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        out.push(v.0);
        if let Some(var) = bp.var(v) {
            for e in bp.successors(v, a.get(var)) {
                if !seen[e.to.0] {
                    seen[e.to.0] = true;
                    stack.push(e.to);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Linear operator `ρ ↦ ρ − z·DρD†` on `r×r` matrices stored row-major.
struct DampedOperator {
    r: usize,
    z: f64,
    /// Sparse `D` entries `(row, col, value)`.
    entries: Vec<(usize, usize, C64)>,
}

impl DampedOperator {
    fn conj_apply(&self, x: &[C64]) -> Vec<C64> {
        // D ρ D† computed as (D (D ρ)†)†.
        let r = self.r;
        let mut dr = vec![ZERO; r * r];
        for &(i, k, d) in &self.entries {
            for l in 0..r {
                dr[i * r + l] += d * x[k * r + l];
            }
        }
        let mut out = vec![ZERO; r * r];
        for &(j, l, d) in &self.entries {
            let dc = d.conj();
            for i in 0..r {
                out[i * r + j] += dr[i * r + l] * dc;
            }
        }
        out
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let m = self.conj_apply(x);
        x.iter().zip(m).map(|(a, b)| a - b * self.z).collect()
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES; returns the solution and its residual norm.
fn gmres(op: &DampedOperator, b: &[C64], tol: f64, restart: usize, max_iter: usize) -> (Vec<C64>, f64, usize, bool) {
    let n = b.len();
    let mut x = vec![ZERO; n];
    let bnorm = norm(b).max(1e-300);
    let mut iters = 0;
    loop {
        let ax = op.apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        if beta <= tol * bnorm || iters >= max_iter {
            return (x, beta, iters, beta <= tol * bnorm);
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![ZERO; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            iters += 1;
            let mut w = op.apply(&v[k]);
            for (j, vj) in v.iter().enumerate() {
                let hjk = dot(vj, &w);
                h[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= hjk * vi;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = C64::new(wn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = ZERO;
            } else {
                cs[k] = a / den;
                sn[k] = bb / den;
            }
            h[k][k] = cs[k].conj() * a + sn[k].conj() * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() <= tol * bnorm || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|c| c / wn).collect());
        }
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vi;
            }
        }
    }
}

fn damped(bp: &BranchingProgram, a: &Assignment, delta: f64) -> Result<AbsoluteProbabilities> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0,1), got {delta}")));
    }
    let nodes = reachable_under(bp, a);
    let r = nodes.len();
    let mut index = vec![usize::MAX; bp.size()];
    for (i, &v) in nodes.iter().enumerate() {
        index[v] = i;
    }
    let mut entries = Vec::new();
    for &v in &nodes {
        if let Some(var) = bp.var(NodeId(v)) {
            for e in bp.successors(NodeId(v), a.get(var)) {
                entries.push((index[e.to.0], index[v], e.amp));
            }
        }
    }
    let z = 1.0 - delta;
    let op = DampedOperator { r, z, entries };
    let s = index[bp.start().0];
    let mut b = vec![ZERO; r * r];
    b[s * r + s] = C64::new(1.0, 0.0);
    let sinks: Vec<(usize, usize)> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| bp.label(NodeId(v)).map(|l| (i, l.index())))
        .collect();
    let collect = |x: &[C64]| {
        let mut p = [0.0; 3];
        for &(i, l) in &sinks {
            p[l] += x[i * r + i].re;
        }
        p
    };
    let (x, bias_vec, resid, work, method) = if r <= DENSE_LIMIT {
        let nn = r * r;
        let mut m = DMatrix::<C64>::identity(nn, nn);
        for &(i, k, d) in &op.entries {
            for &(j, l, e) in &op.entries {
                m[(i * r + j, k * r + l)] -= d * e.conj() * z;
            }
        }
        let lu = m.clone().lu();
        let rhs = nalgebra::DVector::from_vec(b.clone());
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Solve("damped system is singular".into()))?;
        let resid = (&m * &x - &rhs).norm();
        let mx = nalgebra::DVector::from_vec(op.conj_apply(x.as_slice()));
        let y = lu.solve(&mx).ok_or_else(|| Error::Solve("damped system is singular".into()))?;
        (x.as_slice().to_vec(), y.as_slice().to_vec(), resid, 1, "damped (dense LU)")
    } else {
        let (x, resid, it, ok) = gmres(&op, &b, 1e-13, 60, 20_000);
        if !ok {
            return Err(Error::Solve(format!("GMRES stalled at residual {resid:.3e}")));
        }
        let mx = op.conj_apply(&x);
        let (y, _, it2, _) = gmres(&op, &mx, 1e-10, 60, 20_000);
        (x, y, resid, it + it2, "damped (GMRES)")
    };
    let p = collect(&x);
    let slope = collect(&bias_vec);
    let bias = delta * (slope[0] + slope[1] + slope[2]).abs();
    Ok(AbsoluteProbabilities {
        p,
        uncertainty: bias + resid,
        method: method.into(),
        work,
    })
}

fn iterate(bp: &BranchingProgram, a: &Assignment, t_max: usize, tail_tol: f64) -> AbsoluteProbabilities {
    let mut psi = vec![ZERO; bp.size()];
    psi[bp.start().0] = C64::new(1.0, 0.0);
    let mut p = [0.0; 3];
    let mut t = 0;
    let cont = loop {
        let mut cont = 0.0;
        for (v, amp) in psi.iter().enumerate() {
            match bp.label(NodeId(v)) {
                Some(l) => p[l.index()] += amp.norm_sqr(),
                None => cont += amp.norm_sqr(),
            }
        }
        if cont <= tail_tol || t >= t_max {
            break cont;
        }
        psi = step(bp, a, &psi);
        t += 1;
    };
    AbsoluteProbabilities {
        p,
        uncertainty: cont,
        method: "iterate".into(),
        work: t,
    }
}

/// Probabilities of each output over unbounded time.
///
/// The damped method falls back to iteration (with `T_max = 10^6`,
/// tail `1e-12`) when the linear solve fails.
pub fn absolute_probabilities(bp: &BranchingProgram, a: &Assignment, method: Method) -> Result<AbsoluteProbabilities> {
    assert_eq!(a.len(), bp.n_vars(), "assignment length must equal the number of variables");
    match method {
        Method::Iterate { t_max, tail_tol } => Ok(iterate(bp, a, t_max, tail_tol)),
        Method::Damped { delta } => match damped(bp, a, delta) {
            Ok(r) => Ok(r),
            Err(Error::Solve(msg)) => {
                let mut r = iterate(bp, a, 1_000_000, 1e-12);
                r.method = format!("iterate (fallback: {msg})");
                Ok(r)
            }
            Err(e) => Err(e),
        },
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WorstCase {
    /// Least `T` whose cumulative halting mass is 1 within tolerance.
    Finite(usize),
    /// Halting mass still growing when the step budget ran out.
    NotReached,
    /// Halting mass plateaus strictly below 1.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunningTimes {
    pub worst_case: WorstCase,
    /// `Σ_t t·‖E_stop ψ_t‖²` over the simulated steps plus the tail estimate.
    pub expected: f64,
    /// Estimated contribution of the unsimulated tail (`∞` if not decaying).
    pub tail_bound: f64,
    pub steps: usize,
    pub residual: f64,
}

/// Worst-case and expected running time from the halting series.
///
/// Simulation stops once the tail estimate `R_T (T + 1/(1-q))` drops to
/// `tail_tol`, where `q` is the observed per-step decay of the continuing
/// mass `R_t` over the last ten steps.
pub fn running_times(bp: &BranchingProgram, a: &Assignment, t_max: usize, tail_tol: f64) -> RunningTimes {
    let mut psi = vec![ZERO; bp.size()];
    psi[bp.start().0] = C64::new(1.0, 0.0);
    let mut resid: Vec<f64> = Vec::new();
    let mut expected = 0.0;
    let mut worst = None;
    let mut t = 0usize;
    let tail = loop {
        let mut halt = 0.0;
        let mut cont = 0.0;
        for (v, amp) in psi.iter().enumerate() {
            if bp.is_sink(NodeId(v)) {
                halt += amp.norm_sqr();
            } else {
                cont += amp.norm_sqr();
            }
        }
        expected += t as f64 * halt;
        resid.push(cont);
        if worst.is_none() && cont <= DEFAULT_TOL {
            worst = Some(t);
        }
        let tail = if cont == 0.0 {
            0.0
        } else if t == 0 {
            f64::INFINITY
        } else {
            let w = t.min(10);
            let q = (cont / resid[t - w]).powf(1.0 / w as f64);
            if q < 1.0 {
                cont * (t as f64 + 1.0 / (1.0 - q))
            } else {
                f64::INFINITY
            }
        };
        if cont == 0.0 || tail <= tail_tol || t >= t_max {
            break tail;
        }
        psi = step(bp, a, &psi);
        t += 1;
    };
    let residual = *resid.last().unwrap();
    let worst_case = match worst {
        Some(w) => WorstCase::Finite(w),
        None => {
            let half = resid[t / 2];
            if residual >= 0.999 * half {
                WorstCase::Undefined
            } else {
                WorstCase::NotReached
            }
        }
    };
    RunningTimes {
        worst_case,
        expected: expected + if tail.is_finite() { tail } else { 0.0 },
        tail_bound: tail,
        steps: t,
        residual,
    }
}
