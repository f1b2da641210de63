use num_complex::Complex64 as C64;
use std::collections::{HashMap, VecDeque};

use crate::error::Result;
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    /// Internal node `v` reached at time `τ`.
    Copy(usize, usize),
    /// Sink `w` reached at time `arrive`, waiting at level `level`.
    Wait(usize, usize, usize),
    /// Catch-all for mass still running at time `t`.
    Overflow(usize),
}

/// Time-tagged leveled copy of a program that halts exactly at step `t`.
///
/// Levels `0..=t` hold copies `(v, τ)` of internal nodes and chains carrying
/// sink mass to level `t`, where the sink copies live. Internal copies at
/// time `t` lead to private `?`-sinks one level further, so mass that has
/// not halted by step `t` is only reported after step `t`. Only nodes
/// reachable from the start are kept.
pub fn levelize(bp: &BranchingProgram, t: usize) -> Result<BranchingProgram> {
    let one = C64::new(1.0, 0.0);
    let mut b = ProgramBuilder::new(bp.n_vars(), Mode::Quantum);
    let mut ids: HashMap<Key, NodeId> = HashMap::new();
    let mut queue: VecDeque<Key> = VecDeque::new();

    let node_for = |key: Key, b: &mut ProgramBuilder| -> NodeId {
        match key {
            Key::Copy(v, _) => b.internal(bp.var(NodeId(v)).unwrap()),
            Key::Wait(w, _, level) if level == t => b.sink(bp.label(NodeId(w)).unwrap()),
            Key::Wait(..) => b.internal(0),
            Key::Overflow(_) => b.sink(Outcome::Unknown),
        }
    };
    let mut get = |key: Key, b: &mut ProgramBuilder, queue: &mut VecDeque<Key>| -> NodeId {
        if let Some(&id) = ids.get(&key) {
            return id;
        }
        let id = node_for(key, b);
        ids.insert(key, id);
        queue.push_back(key);
        id
    };
    let arrive = |w: usize, tau: usize| -> Key {
        if bp.is_sink(NodeId(w)) {
            Key::Wait(w, tau, tau)
        } else {
            Key::Copy(w, tau)
        }
    };
    let s = bp.start().0;
    let start = get(arrive(s, 0), &mut b, &mut queue);
    b.set_start(start);
    while let Some(key) = queue.pop_front() {
        // Queued keys are registered, so this is a lookup.
        let u = get(key, &mut b, &mut queue);
        match key {
            Key::Copy(v, tau) if tau < t => {
                for bit in [false, true] {
                    for e in bp.successors(NodeId(v), bit) {
                        let w = get(arrive(e.to.0, tau + 1), &mut b, &mut queue);
                        b.edge(u, w, bit, e.amp);
                    }
                }
            }
            Key::Copy(v, _) => {
                let w = get(Key::Overflow(v), &mut b, &mut queue);
                b.edge_both(u, w, one);
            }
            Key::Wait(w, tau, level) if level < t => {
                let next = get(Key::Wait(w, tau, level + 1), &mut b, &mut queue);
                b.edge_both(u, next, one);
            }
            Key::Wait(..) | Key::Overflow(_) => {}
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::fig1_example;
    use crate::model::Assignment;
    use crate::semantics::evolve;
    use crate::validate::{check_leveled, validate_profile};

    #[test]
    fn fig1_levelized_preserves_probabilities() {
        let g = fig1_example();
        for t in 0..4 {
            let l = levelize(&g, t).unwrap();
            assert!(validate_profile(&l, 1e-9).ok);
            assert!(l.size() <= (t + 1) * (t + 1) * g.size());
            assert!(check_leveled(&l).unwrap().levels().is_some());
            for a in Assignment::all(2) {
                let p = evolve(&g, &a, t).cumulative(t);
                let q = evolve(&l, &a, t).cumulative(t);
                for r in 0..3 {
                    assert!((p[r] - q[r]).abs() < 1e-12);
                }
            }
        }
    }
}
