use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Assignment, BranchingProgram, Mode, NodeId};

/// Exact output distribution `[p_0, p_1, p_?]` of a deterministic or
/// randomized program.
///
/// Acyclic programs propagate probability mass in topological order; cyclic
/// ones are solved as absorbing Markov chains. Mass trapped in cycles that
/// cannot reach a sink is reported as missing (the entries sum to less than 1).
pub fn classical_eval(bp: &BranchingProgram, a: &Assignment) -> Result<[f64; 3]> {
    if !matches!(bp.mode(), Mode::Deterministic | Mode::Randomized) {
        return Err(Error::WrongMode {
            expected: "det or rand".into(),
            found: bp.mode().name(),
        });
    }
    assert_eq!(a.len(), bp.n_vars(), "assignment length must equal the number of variables");
    let out = |v: NodeId| {
        let var = bp.var(v).unwrap();
        bp.successors(v, a.get(var))
    };
    if let Some(order) = bp.topological_order() {
        let mut mass = vec![0.0; bp.size()];
        mass[bp.start().0] = 1.0;
        let mut p = [0.0; 3];
        for v in order {
            let m = mass[v.0];
            if m == 0.0 {
                continue;
            }
            match bp.label(v) {
                Some(l) => p[l.index()] += m,
                None => {
                    for e in out(v) {
                        mass[e.to.0] += m * e.amp.re;
                    }
                }
            }
        }
        return Ok(p);
    }
    // Transient states: internal nodes that can still reach a sink.
    let n = bp.size();
    let mut can_halt: Vec<bool> = (0..n).map(|v| bp.is_sink(NodeId(v))).collect();
    loop {
        let mut changed = false;
        for v in bp.internal_nodes() {
            if !can_halt[v.0] && out(v).iter().any(|e| can_halt[e.to.0]) {
                can_halt[v.0] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if bp.is_sink(bp.start()) {
        let mut p = [0.0; 3];
        p[bp.label(bp.start()).unwrap().index()] = 1.0;
        return Ok(p);
    }
    if !can_halt[bp.start().0] {
        return Ok([0.0; 3]);
    }
    let transient: Vec<usize> = bp.internal_nodes().filter(|v| can_halt[v.0]).map(|v| v.0).collect();
    let mut idx = vec![usize::MAX; n];
    for (i, &v) in transient.iter().enumerate() {
        idx[v] = i;
    }
    let k = transient.len();
    // Solve (I - Q^T) m = e_s for expected visit counts m.
    let mut m = DMatrix::<f64>::identity(k, k);
    for (i, &v) in transient.iter().enumerate() {
        for e in out(NodeId(v)) {
            if idx[e.to.0] != usize::MAX {
                m[(idx[e.to.0], i)] -= e.amp.re;
            }
        }
    }
    let mut rhs = DVector::zeros(k);
    rhs[idx[bp.start().0]] = 1.0;
    let visits = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solve("absorbing chain system is singular".into()))?;
    let mut p = [0.0; 3];
    for (i, &v) in transient.iter().enumerate() {
        for e in out(NodeId(v)) {
            if let Some(l) = bp.label(e.to) {
                p[l.index()] += visits[i] * e.amp.re;
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Outcome, ProgramBuilder};
    use num_complex::Complex64 as C64;

    #[test]
    fn fair_coin() {
        let mut b = ProgramBuilder::new(1, Mode::Randomized);
        let s = b.internal(0);
        let z = b.sink(Outcome::Zero);
        let o = b.sink(Outcome::One);
        b.edge_both(s, z, C64::new(0.5, 0.0));
        b.edge_both(s, o, C64::new(0.5, 0.0));
        let p = classical_eval(&b.build().unwrap(), &Assignment::zeros(1)).unwrap();
        assert_eq!(p, [0.5, 0.5, 0.0]);
    }

    #[test]
    fn cyclic_retry_until_one() {
        // Flip a coin until heads: ends in 1 with certainty, never in 0.
        let mut b = ProgramBuilder::new(1, Mode::Randomized);
        let s = b.internal(0);
        let o = b.sink(Outcome::One);
        b.edge_both(s, s, C64::new(0.5, 0.0));
        b.edge_both(s, o, C64::new(0.5, 0.0));
        let p = classical_eval(&b.build().unwrap(), &Assignment::zeros(1)).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapped_mass_is_missing() {
        let mut b = ProgramBuilder::new(1, Mode::Randomized);
        let s = b.internal(0);
        let t = b.internal(0);
        let o = b.sink(Outcome::One);
        b.edge_both(s, t, C64::new(0.5, 0.0));
        b.edge_both(s, o, C64::new(0.5, 0.0));
        b.edge_both(t, t, C64::new(1.0, 0.0));
        let p = classical_eval(&b.build().unwrap(), &Assignment::zeros(1)).unwrap();
        assert!((p[1] - 0.5).abs() < 1e-12 && p[0] == 0.0);
    }
}
