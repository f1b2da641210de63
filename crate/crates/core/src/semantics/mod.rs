//! Computation semantics: measurement/evolution alternation for pure and
//! mixed states, absolute probabilities, running times and classical
//! evaluation.

mod absolute;
mod classical;
mod evolve;
mod gm;
mod perturb;

pub use absolute::{absolute_probabilities, running_times, AbsoluteProbabilities, Method, RunningTimes, WorstCase};
pub use classical::classical_eval;
pub use evolve::{
    complete_unitary, complete_unitary_with, dense_trace, evolve, evolve_states, step, transition_matrix,
    CompletionStrategy,
};
pub use gm::{evolve_gm, evolve_gm_states};
pub use perturb::{perturbation_check, PerturbationOutcome};

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Pure, possibly subnormalized, state over the node basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(Vec<C64>);

impl QuantumState {
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[i] = C64::new(1.0, 0.0);
        QuantumState(v)
    }

    pub fn from_amplitudes(v: Vec<C64>) -> Self {
        QuantumState(v)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Positive semidefinite matrix over the node basis with trace at most 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState(CMatrix);

impl DensityState {
    /// Wrap a matrix after checking Hermiticity, positivity and trace within `tol`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("density matrix must be square".into()));
        }
        let herm = (&m - m.adjoint()).iter().fold(0.0f64, |a, c| a.max(c.norm()));
        if herm > tol {
            return Err(Error::InvalidArgument(format!("matrix is not Hermitian (defect {herm:.3e})")));
        }
        let tr = m.trace().re;
        if tr > 1.0 + tol || tr < -tol {
            return Err(Error::InvalidArgument(format!("trace {tr} outside [0, 1]")));
        }
        if m.nrows() > 0 {
            let min = crate::linalg::hermitian_eigenvalues(&m)[0];
            if min < -tol {
                return Err(Error::InvalidArgument(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(DensityState(m))
    }

    pub fn pure(psi: &QuantumState) -> Self {
        let v = crate::linalg::CVector::from_column_slice(psi.amplitudes());
        DensityState(&v * v.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Per-step halting masses `h_r(t)` and the continuing mass after each step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionTrace {
    /// `halting[t] = [h_0(t), h_1(t), h_?(t)]`.
    pub halting: Vec<[f64; 3]>,
    /// Mass still in internal nodes after the measurement at step `t`.
    pub residual: Vec<f64>,
}

impl EvolutionTrace {
    /// `[p_0, p_1, p_?]` accumulated over steps `0..=t`.
    pub fn cumulative(&self, t: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        for h in &self.halting[..=t.min(self.halting.len() - 1)] {
            for r in 0..3 {
                p[r] += h[r];
            }
        }
        p
    }

    /// Accumulated probabilities over all recorded steps.
    pub fn probabilities(&self) -> [f64; 3] {
        self.cumulative(self.halting.len() - 1)
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual.last().expect("trace has at least one step")
    }

    pub fn steps(&self) -> usize {
        self.halting.len() - 1
    }

    /// CSV with columns `t,h_0,h_1,h_?,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,h_0,h_1,h_?,residual\n");
        for (t, (h, r)) in self.halting.iter().zip(&self.residual).enumerate() {
            let _ = writeln!(s, "{t},{:.12e},{:.12e},{:.12e},{:.12e}", h[0], h[1], h[2], r);
        }
        s
    }
}
