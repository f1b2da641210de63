use num_complex::Complex64 as C64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, Node, NodeId, ProgramBuilder};
use crate::validate::{infer_variable_order, OrderCheck, Rule, ValidationReport};

/// Result of [`align_levels`].
#[derive(Clone, Debug)]
pub struct AlignedProgram {
    pub program: BranchingProgram,
    /// Variable tested on each level; the final level holds only sinks.
    pub order: Vec<usize>,
    /// Node ids per level, `order.len() + 1` levels in total.
    pub levels: Vec<Vec<NodeId>>,
}

/// Pad an ordered program so that level `j` tests `order[j]` and every edge
/// goes from level `j` to `j + 1`.
///
/// Edges that skip levels are routed through identity chains keyed by the
/// target and the level they enter; sinks move to the last level. Chains
/// never merge mass arriving at different levels, so the output is
/// well-formed whenever no node has predecessors on two different levels
/// with overlapping columns.
pub fn align_levels(bp: &BranchingProgram) -> Result<AlignedProgram> {
    if matches!(bp.mode(), Mode::QuantumGm(_)) {
        return Err(Error::WrongMode {
            expected: "det, rand or quantum".into(),
            found: bp.mode().name(),
        });
    }
    let bp = bp.prune_unreachable()?;
    let full = match infer_variable_order(&bp)? {
        OrderCheck::Ordered(o) => o,
        OrderCheck::NotOrdered(v) => {
            let mut rep = ValidationReport::new();
            rep.push(Rule::Ordered, v.witness_edges.iter().map(|e| e.0).collect(), None, v.to_string());
            return Err(Error::Validation(rep));
        }
    };
    let mut pos = vec![usize::MAX; bp.n_vars()];
    for (i, &x) in full.iter().enumerate() {
        pos[x] = i;
    }
    let depth = bp.internal_nodes().map(|v| pos[bp.var(v).unwrap()] + 1).max().unwrap_or(0);
    let order: Vec<usize> = full[..depth].to_vec();
    let level = |v: NodeId| bp.var(v).map_or(depth, |x| pos[x]);

    let one = C64::new(1.0, 0.0);
    let mut b = ProgramBuilder::new(bp.n_vars(), bp.mode());
    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); depth + 1];
    let ids: Vec<NodeId> = bp
        .node_ids()
        .map(|v| {
            let id = b.add_node(bp.node(v).clone());
            levels[level(v)].push(id);
            id
        })
        .collect();
    let mut chains: HashMap<(usize, usize), NodeId> = HashMap::new();
    for e in bp.edges() {
        let (lu, lw) = (level(e.from), level(e.to));
        if lu + 1 == lw {
            b.edge(ids[e.from.0], ids[e.to.0], e.bit, e.amp);
            continue;
        }
        let entry = lu + 1;
        if !chains.contains_key(&(e.to.0, entry)) {
            // Build the chain entry..lw-1 ending in the target.
            let mut next = ids[e.to.0];
            for j in (entry..lw).rev() {
                let c = b.add_node(Node::internal(order[j]));
                levels[j].push(c);
                b.edge_both(c, next, one);
                next = c;
            }
            chains.insert((e.to.0, entry), next);
        }
        b.edge(ids[e.from.0], chains[&(e.to.0, entry)], e.bit, e.amp);
    }
    b.set_start(ids[bp.start().0]);
    let program = b.build()?;
    let start_level = level(bp.start());
    for l in levels.iter_mut().take(start_level) {
        l.clear();
    }
    Ok(AlignedProgram { program, order, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{linear_obdd, perm_qobdd, LinearFamily};
    use crate::model::Assignment;
    use crate::semantics::evolve;
    use crate::validate::check_well_formed;

    fn same_distribution(a: &BranchingProgram, b: &BranchingProgram, steps: usize) {
        for x in Assignment::all(a.n_vars()) {
            let p = evolve(a, &x, steps).cumulative(steps);
            let q = evolve(b, &x, 2 * steps + a.n_vars()).cumulative(2 * steps + a.n_vars());
            for r in 0..3 {
                assert!((p[r] - q[r]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn disjointness_obdd_becomes_layered() {
        let bp = linear_obdd(LinearFamily::Disj, 4).unwrap().with_mode(Mode::Quantum).unwrap();
        let al = align_levels(&bp).unwrap();
        assert_eq!(al.order, vec![0, 1, 2, 3]);
        for (j, l) in al.levels.iter().enumerate() {
            for &v in l {
                for e in al.program.out_edges(v) {
                    assert!(al.levels[j + 1].contains(&e.to));
                }
            }
        }
        same_distribution(&bp, &al.program, 8);
    }

    #[test]
    fn perm_stays_well_formed() {
        let bp = perm_qobdd(2, Some(2)).unwrap();
        let al = align_levels(&bp).unwrap();
        assert!(check_well_formed(&al.program, 1e-9).unwrap().ok);
        same_distribution(&bp, &al.program, 6);
    }
}
