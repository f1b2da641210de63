use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use super::{DensityState, EvolutionTrace};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{Assignment, BranchingProgram, Mode, NodeId};

/// Class-wise transition maps `L_r(a)` restricted to the columns of class `r`.
fn class_maps(bp: &BranchingProgram, a: &Assignment) -> Result<Vec<(Vec<usize>, CMatrix)>> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in bp.internal_nodes() {
        let c = bp
            .class(v)
            .ok_or_else(|| Error::Structure(format!("internal node {v} has no class")))?;
        members.entry(c).or_default().push(v.0);
    }
    let n = bp.size();
    Ok(members
        .into_values()
        .map(|cols| {
            let mut l = CMatrix::zeros(n, cols.len());
            for (j, &v) in cols.iter().enumerate() {
                let var = bp.var(NodeId(v)).unwrap();
                for e in bp.successors(NodeId(v), a.get(var)) {
                    l[(e.to.0, j)] += e.amp;
                }
            }
            (cols, l)
        })
        .collect())
}

fn run(bp: &BranchingProgram, a: &Assignment, t_max: usize, mut visit: impl FnMut(&CMatrix)) -> Result<EvolutionTrace> {
    if !matches!(bp.mode(), Mode::QuantumGm(_)) {
        return Err(Error::WrongMode {
            expected: "gm".into(),
            found: bp.mode().name(),
        });
    }
    assert_eq!(a.len(), bp.n_vars(), "assignment length must equal the number of variables");
    let maps = class_maps(bp, a)?;
    let n = bp.size();
    let mut sigma = CMatrix::zeros(n, n);
    sigma[(bp.start().0, bp.start().0)] = C64::new(1.0, 0.0);
    let mut halting = Vec::with_capacity(t_max + 1);
    let mut residual = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        visit(&sigma);
        let mut h = [0.0; 3];
        let mut cont = 0.0;
        for v in 0..n {
            let d = sigma[(v, v)].re;
            match bp.label(NodeId(v)) {
                Some(l) => h[l.index()] += d,
                None => cont += d,
            }
        }
        halting.push(h);
        residual.push(cont);
        if t == t_max {
            break;
        }
        let mut next = CMatrix::zeros(n, n);
        for (cols, l) in &maps {
            let block = CMatrix::from_fn(cols.len(), cols.len(), |i, j| sigma[(cols[i], cols[j])]);
            next += l * block * l.adjoint();
        }
        sigma = next;
    }
    Ok(EvolutionTrace { halting, residual })
}

/// Density-matrix evolution of a gm program: measure the class, stop on
/// classes 0/1, otherwise apply the class's transition map.
pub fn evolve_gm(bp: &BranchingProgram, a: &Assignment, t_max: usize) -> Result<EvolutionTrace> {
    run(bp, a, t_max, |_| {})
}

/// Subnormalized density states `σ_0, …, σ_T` before each measurement.
pub fn evolve_gm_states(bp: &BranchingProgram, a: &Assignment, t_max: usize) -> Result<Vec<DensityState>> {
    let mut states = Vec::new();
    run(bp, a, t_max, |s| states.push(s.clone()))?;
    states
        .into_iter()
        .map(|s| DensityState::new(s, 1e-9))
        .collect()
}
