use num_complex::Complex64 as C64;

use super::{EvolutionTrace, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, CMatrix, CVector, ZERO};
use crate::model::{Assignment, BranchingProgram, NodeId};

/// One application of `U(a) E_cont`, computed sparsely from the edges.
/// Sink amplitudes of `psi` are discarded.
pub fn step(bp: &BranchingProgram, a: &Assignment, psi: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; psi.len()];
    for (v, &amp) in psi.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        if let Some(var) = bp.var(NodeId(v)) {
            for e in bp.successors(NodeId(v), a.get(var)) {
                out[e.to.0] += e.amp * amp;
            }
        }
    }
    out
}

fn measure(bp: &BranchingProgram, psi: &[C64]) -> ([f64; 3], f64) {
    let mut h = [0.0; 3];
    let mut cont = 0.0;
    for (v, amp) in psi.iter().enumerate() {
        let m = amp.norm_sqr();
        match bp.label(NodeId(v)) {
            Some(l) => h[l.index()] += m,
            None => cont += m,
        }
    }
    (h, cont)
}

fn check_len(bp: &BranchingProgram, a: &Assignment) {
    assert_eq!(a.len(), bp.n_vars(), "assignment length must equal the number of variables");
}

/// States `ψ_0, …, ψ_T` before each measurement, `ψ_0 = |s⟩`.
pub fn evolve_states(bp: &BranchingProgram, a: &Assignment, t_max: usize) -> Vec<QuantumState> {
    check_len(bp, a);
    let mut psi = QuantumState::basis(bp.size(), bp.start().0).amplitudes().to_vec();
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        out.push(QuantumState::from_amplitudes(psi.clone()));
        if t < t_max {
            psi = step(bp, a, &psi);
        }
    }
    out
}

/// Measure, then evolve, for steps `0..=t_max`.
pub fn evolve(bp: &BranchingProgram, a: &Assignment, t_max: usize) -> EvolutionTrace {
    check_len(bp, a);
    let mut psi = QuantumState::basis(bp.size(), bp.start().0).amplitudes().to_vec();
    let mut halting = Vec::with_capacity(t_max + 1);
    let mut residual = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let (h, cont) = measure(bp, &psi);
        halting.push(h);
        residual.push(cont);
        if t < t_max {
            psi = step(bp, a, &psi);
        }
    }
    EvolutionTrace { halting, residual }
}

/// The transition map `L(a)` as a dense matrix (sink columns zero).
pub fn transition_matrix(bp: &BranchingProgram, a: &Assignment) -> CMatrix {
    let n = bp.size();
    let mut m = CMatrix::zeros(n, n);
    for v in bp.internal_nodes() {
        for e in bp.successors(v, a.get(bp.var(v).unwrap())) {
            m[(e.to.0, v.0)] += e.amp;
        }
    }
    m
}

/// How the sink columns of `U(a)` are filled in.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CompletionStrategy {
    /// Residuals of `e_0, e_1, …` in increasing index order.
    Canonical,
    /// Residuals scanned from the last basis vector down.
    Reverse,
}

pub fn complete_unitary(bp: &BranchingProgram, a: &Assignment) -> Result<CMatrix> {
    complete_unitary_with(bp, a, CompletionStrategy::Canonical)
}

/// Extend `L(a)` to a unitary: internal columns are copied verbatim, sink
/// columns (in id order) receive an orthonormal basis of the complement.
pub fn complete_unitary_with(bp: &BranchingProgram, a: &Assignment, strategy: CompletionStrategy) -> Result<CMatrix> {
    check_len(bp, a);
    let n = bp.size();
    let l = transition_matrix(bp, a);
    let internal: Vec<NodeId> = bp.internal_nodes().collect();
    let cols: Vec<CVector> = internal.iter().map(|v| l.column(v.0).into_owned()).collect();
    if !cols.is_empty() {
        let g = CMatrix::from_columns(&cols);
        let gram = g.adjoint() * &g;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                let r = (gram[(i, j)] - C64::new(want, 0.0)).norm();
                if r > 1e-9 {
                    return Err(Error::Completion(format!(
                        "columns of nodes {} and {} are not orthonormal (residual {r:.3e})",
                        internal[i], internal[j]
                    )));
                }
            }
        }
    }
    let sinks: Vec<NodeId> = bp.sinks().collect();
    let order: Vec<usize> = match strategy {
        CompletionStrategy::Canonical => (0..n).collect(),
        CompletionStrategy::Reverse => (0..n).rev().collect(),
    };
    let extra = complete_basis(n, &cols, sinks.len(), &order)
        .ok_or_else(|| Error::Completion("complement has too small a dimension".into()))?;
    let mut u = l;
    for (s, col) in sinks.iter().zip(extra) {
        u.set_column(s.0, &col);
    }
    Ok(u)
}

/// Evolution with an explicit dense unitary `u` in place of `U(a)`.
pub fn dense_trace(bp: &BranchingProgram, u: &CMatrix, t_max: usize) -> EvolutionTrace {
    let n = bp.size();
    let mut psi = CVector::zeros(n);
    psi[bp.start().0] = C64::new(1.0, 0.0);
    let mut halting = Vec::with_capacity(t_max + 1);
    let mut residual = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let (h, cont) = measure(bp, psi.as_slice());
        halting.push(h);
        residual.push(cont);
        if t < t_max {
            for v in bp.sinks() {
                psi[v.0] = ZERO;
            }
            psi = u * psi;
        }
    }
    EvolutionTrace { halting, residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::fig1_example;
    use crate::linalg::is_unitary;
    use crate::model::{Mode, Outcome, ProgramBuilder};

    #[test]
    fn constant_zero_sink_halts_immediately() {
        let mut b = ProgramBuilder::new(2, Mode::Quantum);
        b.sink(Outcome::Zero);
        let bp = b.build().unwrap();
        let tr = evolve(&bp, &Assignment::zeros(2), 0);
        assert_eq!(tr.probabilities(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn permutation_program_completes_to_permutation() {
        let mut b = ProgramBuilder::new(1, Mode::Quantum);
        let s = b.internal(0);
        let z = b.sink(Outcome::Zero);
        let o = b.sink(Outcome::One);
        b.edge(s, z, false, C64::new(1.0, 0.0));
        b.edge(s, o, true, C64::new(1.0, 0.0));
        let bp = b.build().unwrap();
        let u = complete_unitary(&bp, &Assignment::zeros(1)).unwrap();
        assert!(is_unitary(&u, 1e-12));
        for x in u.iter() {
            assert!(x.norm() < 1e-12 || (x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn completion_choice_does_not_change_probabilities() {
        let bp = fig1_example();
        for a in Assignment::all(2) {
            let u1 = complete_unitary_with(&bp, &a, CompletionStrategy::Canonical).unwrap();
            let u2 = complete_unitary_with(&bp, &a, CompletionStrategy::Reverse).unwrap();
            assert!(is_unitary(&u1, 1e-9) && is_unitary(&u2, 1e-9));
            let t1 = dense_trace(&bp, &u1, 10);
            let t2 = dense_trace(&bp, &u2, 10);
            for t in 0..=10 {
                for r in 0..3 {
                    assert!((t1.cumulative(t)[r] - t2.cumulative(t)[r]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_evolution_agree() {
        let bp = fig1_example();
        for a in Assignment::all(2) {
            let u = complete_unitary(&bp, &a).unwrap();
            let d = dense_trace(&bp, &u, 6);
            let s = evolve(&bp, &a, 6);
            for t in 0..=6 {
                for r in 0..3 {
                    assert!((d.cumulative(t)[r] - s.cumulative(t)[r]).abs() < 1e-12);
                }
            }
        }
    }
}
