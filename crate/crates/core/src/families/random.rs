//! Random well-formed programs for property tests and experiments.

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::random_isometry;
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

fn random_label<R: Rng>(rng: &mut R, allow_unknown: bool) -> Outcome {
    match rng.gen_range(0..if allow_unknown { 3 } else { 2 }) {
        0 => Outcome::Zero,
        1 => Outcome::One,
        _ => Outcome::Unknown,
    }
}

/// Random well-formed, unidirectional QBP with at most `max_size` nodes,
/// possibly cyclic.
///
/// Internal nodes testing variable `i` map, per bit, through a random
/// isometry onto a private target set `T_i`, so (W) holds by construction.
pub fn random_qbp<R: Rng>(rng: &mut R, n_vars: usize, max_size: usize) -> BranchingProgram {
    assert!(n_vars >= 1 && max_size >= 2);
    loop {
        let size = rng.gen_range(2..=max_size);
        let internal = rng.gen_range(1..=size / 2);
        let vars: Vec<usize> = (0..internal).map(|_| rng.gen_range(0..n_vars)).collect();
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..n_vars {
            let s: Vec<usize> = (0..internal).filter(|&v| vars[v] == i).collect();
            if !s.is_empty() {
                groups.push((i, s));
            }
        }
        let mut pool: Vec<usize> = (0..size).collect();
        pool.shuffle(rng);
        let need: usize = groups.iter().map(|g| g.1.len()).sum();
        if need > size {
            continue;
        }
        let mut spare = size - need;
        let mut targets = Vec::new();
        let mut cursor = 0;
        for (_, s) in &groups {
            let extra = if spare > 0 { rng.gen_range(0..=spare.min(2)) } else { 0 };
            spare -= extra;
            let t: Vec<usize> = pool[cursor..cursor + s.len() + extra].to_vec();
            cursor += t.len();
            targets.push(t);
        }
        let mut b = ProgramBuilder::new(n_vars, Mode::Quantum);
        for v in 0..size {
            if v < internal {
                b.internal(vars[v]);
            } else {
                b.sink(random_label(rng, true));
            }
        }
        for ((_, s), t) in groups.iter().zip(&targets) {
            for bit in [false, true] {
                let iso = random_isometry(rng, t.len(), s.len());
                for (j, &u) in s.iter().enumerate() {
                    for (i, &w) in t.iter().enumerate() {
                        b.edge(NodeId(u), NodeId(w), bit, iso[(i, j)]);
                    }
                }
            }
        }
        b.set_start(NodeId(0));
        return b.build().expect("random construction is structurally valid");
    }
}

/// Random leveled QBP: `levels` internal levels, each testing one random
/// variable and mapping isometrically into the next level; the last level
/// holds sinks.
pub fn random_leveled_qbp<R: Rng>(rng: &mut R, n_vars: usize, levels: usize, max_width: usize) -> BranchingProgram {
    let mut widths = vec![1usize];
    for _ in 0..levels {
        let prev = *widths.last().unwrap();
        widths.push(rng.gen_range(prev.max(1)..=max_width.max(prev)));
    }
    let mut b = ProgramBuilder::new(n_vars, Mode::Quantum);
    let mut ids: Vec<Vec<NodeId>> = Vec::new();
    for (l, &w) in widths.iter().enumerate() {
        if l < levels {
            let var = rng.gen_range(0..n_vars);
            ids.push((0..w).map(|_| b.internal(var)).collect());
        } else {
            ids.push((0..w).map(|_| b.sink(random_label(rng, true))).collect());
        }
    }
    for l in 0..levels {
        for bit in [false, true] {
            let iso = random_isometry(rng, widths[l + 1], widths[l]);
            for (j, &u) in ids[l].iter().enumerate() {
                for (i, &w) in ids[l + 1].iter().enumerate() {
                    b.edge(u, w, bit, iso[(i, j)]);
                }
            }
        }
    }
    b.set_start(ids[0][0]);
    b.build().expect("random construction is structurally valid")
}

/// Random leveled randomized OBDD in the natural order with 0/1 sinks.
/// Level `i` tests `x_i`; each node spreads each bit over up to three
/// successors of the next level.
pub fn random_randomized_obdd<R: Rng>(rng: &mut R, n_vars: usize, max_width: usize) -> BranchingProgram {
    let mut b = ProgramBuilder::new(n_vars, Mode::Randomized);
    let mut level: Vec<NodeId> = vec![b.internal(0)];
    b.set_start(level[0]);
    for i in 0..n_vars {
        let next: Vec<NodeId> = if i + 1 < n_vars {
            let w = rng.gen_range(1..=max_width);
            (0..w).map(|_| b.internal(i + 1)).collect()
        } else {
            vec![b.sink(Outcome::Zero), b.sink(Outcome::One)]
        };
        for &u in &level {
            for bit in [false, true] {
                let k = rng.gen_range(1..=3.min(next.len()));
                let chosen: Vec<NodeId> = next.choose_multiple(rng, k).cloned().collect();
                let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = weights.iter().sum();
                for (w, &t) in weights.iter().zip(&chosen) {
                    b.edge(u, t, bit, C64::new(w / total, 0.0));
                }
            }
        }
        level = next;
    }
    b.build().expect("random construction is structurally valid")
}
