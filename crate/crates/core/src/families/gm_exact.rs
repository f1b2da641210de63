use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, HashMap, VecDeque};

use super::oracle::LinearFamily;
use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    /// Reads `x_{2i}` with accumulator `acc`.
    Odd(usize, u8),
    /// Reads `x_{2i+1}` knowing `x_{2i} = bit`.
    Even(usize, u8, bool),
}

/// Exact gm-OBDD (k = 4) for DISJ or IP in the natural order.
///
/// The underlying OBDD stores the accumulator and the first bit of each
/// pair; the two measurement classes separate every pair of nodes that
/// could send amplitude to a common successor under one input.
pub fn gm_exact_obdd(f: LinearFamily, n: usize) -> Result<BranchingProgram> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("{} needs a positive even n, got {n}", f.name())));
    }
    let pairs = n / 2;
    let mut b = ProgramBuilder::new(n, Mode::QuantumGm(4));
    let mut ids: HashMap<Key, NodeId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut edges: Vec<(NodeId, NodeId, bool)> = Vec::new();
    let mut get = |b: &mut ProgramBuilder, key: Key, queue: &mut VecDeque<Key>| -> NodeId {
        *ids.entry(key).or_insert_with(|| {
            queue.push_back(key);
            match key {
                Key::Odd(i, _) => b.internal(2 * i),
                Key::Even(i, _, _) => b.internal(2 * i + 1),
            }
        })
    };
    let start = get(&mut b, Key::Odd(0, 0), &mut queue);
    b.set_start(start);
    let mut id_of = HashMap::new();
    id_of.insert(Key::Odd(0, 0), start);
    while let Some(key) = queue.pop_front() {
        let u = id_of[&key];
        match key {
            Key::Odd(i, acc) => {
                for bit in [false, true] {
                    let k2 = Key::Even(i, acc, bit);
                    let w = get(&mut b, k2, &mut queue);
                    id_of.insert(k2, w);
                    edges.push((u, w, bit));
                }
            }
            Key::Even(i, acc, first) => {
                let mut final_sinks: BTreeMap<bool, NodeId> = BTreeMap::new();
                for bit in [false, true] {
                    let both = first && bit;
                    let next_acc = match f {
                        LinearFamily::Disj if both => None,
                        LinearFamily::Disj => Some(acc),
                        LinearFamily::Ip => Some(acc ^ both as u8),
                    };
                    let w = match next_acc {
                        None => b.sink(Outcome::Zero),
                        Some(a) if i + 1 < pairs => {
                            let k2 = Key::Odd(i + 1, a);
                            let w = get(&mut b, k2, &mut queue);
                            id_of.insert(k2, w);
                            w
                        }
                        Some(a) => {
                            let label = match f {
                                LinearFamily::Disj => true,
                                LinearFamily::Ip => a == 1,
                            };
                            *final_sinks
                                .entry(label)
                                .or_insert_with(|| b.sink(Outcome::from_bool(label)))
                        }
                    };
                    edges.push((u, w, bit));
                }
            }
        }
    }
    // Conflicts: two nodes entering one successor under a realizable bit pair.
    let total = b.len();
    let mut incoming: Vec<Vec<(NodeId, bool)>> = vec![Vec::new(); total];
    for &(u, w, bit) in &edges {
        incoming[w.0].push((u, bit));
    }
    let var_of: HashMap<NodeId, usize> = id_of
        .iter()
        .map(|(k, &v)| {
            (
                v,
                match *k {
                    Key::Odd(i, _) => 2 * i,
                    Key::Even(i, _, _) => 2 * i + 1,
                },
            )
        })
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for list in &incoming {
        for (i, &(u, bu)) in list.iter().enumerate() {
            for &(v, bv) in &list[i + 1..] {
                if u != v && (var_of[&u] != var_of[&v] || bu == bv) {
                    adj[u.0].push(v.0);
                    adj[v.0].push(u.0);
                }
            }
        }
    }
    let mut color: Vec<Option<usize>> = vec![None; total];
    for &root in var_of.keys() {
        if color[root.0].is_some() {
            continue;
        }
        color[root.0] = Some(0);
        let mut q = VecDeque::from([root.0]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                match color[v] {
                    None => {
                        color[v] = Some(1 - color[u].unwrap());
                        q.push_back(v);
                    }
                    Some(c) if c == color[u].unwrap() => {
                        return Err(Error::Structure("conflict graph is not bipartite".into()))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    for &u in var_of.keys() {
        b.set_class(u, 2 + color[u.0].unwrap());
    }
    for (u, w, bit) in edges {
        b.edge(u, w, bit, C64::new(1.0, 0.0));
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FunctionOracle;
    use crate::model::Assignment;
    use crate::semantics::evolve_gm;
    use crate::validate::validate_profile;

    #[test]
    fn exact_on_small_instances() {
        for f in [LinearFamily::Disj, LinearFamily::Ip] {
            for n in [2, 4, 6] {
                let g = gm_exact_obdd(f, n).unwrap();
                assert!(validate_profile(&g, 1e-9).ok, "{f:?} {n}");
                assert!(g.size() <= 4 * n);
                let o = FunctionOracle::linear(f, n).unwrap();
                for a in Assignment::all(n) {
                    let p = evolve_gm(&g, &a, n + 1).unwrap().probabilities();
                    assert!((p[o.eval(&a).unwrap() as usize] - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
