use num_complex::Complex64 as C64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::families::FunctionOracle;
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

const MAX_VARS: usize = 20;

fn check_perm(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::InvalidArgument(format!("{order:?} is not an order of {n} variables")));
    }
    Ok(())
}

/// Truth table re-indexed so that bit `t` of the index is `x_{order[t]}`.
fn ordered_table(f: &FunctionOracle, order: &[usize]) -> Result<Vec<bool>> {
    let n = f.n_vars();
    if n > MAX_VARS {
        return Err(Error::InvalidArgument(format!("at most {MAX_VARS} variables supported, got {n}")));
    }
    check_perm(order, n)?;
    let tt = f.truth_table()?;
    Ok((0..1usize << n)
        .map(|idx| {
            let a = order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (t, &v)| acc | ((idx >> t & 1) << v));
            tt[a]
        })
        .collect())
}

fn restrict(t: &[bool], b: bool) -> Vec<bool> {
    t.iter().skip(b as usize).step_by(2).cloned().collect()
}

/// Nodes per level of the minimal OBDD for `order`, followed by the number
/// of sinks.
///
/// Level `i` holds one node per distinct subfunction (after fixing the first
/// `i` variables of the order) that essentially depends on `order[i]`.
pub fn subfunction_counts(f: &FunctionOracle, order: &[usize]) -> Result<Vec<usize>> {
    let mut level: Vec<Vec<bool>> = vec![ordered_table(f, order)?];
    let mut counts = Vec::with_capacity(order.len() + 1);
    for _ in 0..order.len() {
        let mut next: HashMap<Vec<bool>, ()> = HashMap::new();
        let mut here = 0;
        for t in &level {
            let (t0, t1) = (restrict(t, false), restrict(t, true));
            if t0 != t1 {
                here += 1;
            }
            next.insert(t0, ());
            next.insert(t1, ());
        }
        counts.push(here);
        level = next.into_keys().collect();
    }
    counts.push(level.len());
    Ok(counts)
}

/// Size of the minimal OBDD (including sinks) for the given order.
pub fn min_obdd_size(f: &FunctionOracle, order: &[usize]) -> Result<usize> {
    Ok(subfunction_counts(f, order)?.iter().sum())
}

/// Leveled reversible OBDD built greedily from the subfunctions.
///
/// Each subfunction of level `i+1` gets `max(c_0, c_1)` copies, where `c_b`
/// counts the `b`-edges entering it from level `i`, so no node has two
/// incoming edges with the same bit.
pub fn min_reversible_obdd(f: &FunctionOracle, order: &[usize]) -> Result<BranchingProgram> {
    let n = f.n_vars();
    let one = C64::new(1.0, 0.0);
    let mut b = ProgramBuilder::new(n, Mode::Deterministic);
    let root = ordered_table(f, order)?;
    let node_for = |b: &mut ProgramBuilder, depth: usize, t: &[bool]| -> NodeId {
        if depth == n {
            b.sink(Outcome::from_bool(t[0]))
        } else {
            b.internal(order[depth])
        }
    };
    let start = node_for(&mut b, 0, &root);
    b.set_start(start);
    let mut level: Vec<(NodeId, Vec<bool>)> = vec![(start, root)];
    for depth in 0..n {
        // Child tables in first-seen order, with the copies handed out so far.
        let mut keys: Vec<Vec<bool>> = Vec::new();
        let mut slot: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut copies: Vec<Vec<NodeId>> = Vec::new();
        let mut used: Vec<[usize; 2]> = Vec::new();
        for (u, t) in &level {
            for bit in [false, true] {
                let child = restrict(t, bit);
                let k = *slot.entry(child.clone()).or_insert_with(|| {
                    keys.push(child.clone());
                    copies.push(Vec::new());
                    used.push([0, 0]);
                    keys.len() - 1
                });
                let j = used[k][bit as usize];
                used[k][bit as usize] += 1;
                if j == copies[k].len() {
                    let w = node_for(&mut b, depth + 1, &child);
                    copies[k].push(w);
                }
                b.edge(*u, copies[k][j], bit, one);
            }
        }
        level = keys
            .into_iter()
            .zip(copies)
            .flat_map(|(t, ws)| ws.into_iter().map(move |w| (w, t.clone())))
            .collect();
    }
    b.build()
}

/// Whether for every set `V` of `k` variables and every `x_i ∈ V` some
/// setting of the other variables leaves exactly `x_i` or `¬x_i`.
pub fn is_k_stable(f: &FunctionOracle, k: usize) -> Result<bool> {
    let n = f.n_vars();
    if n > 16 {
        return Err(Error::InvalidArgument(format!("k-stability is checked for at most 16 variables, got {n}")));
    }
    let table: Vec<Option<bool>> = crate::model::Assignment::all(n).map(|a| f.eval(&a)).collect();
    let full = (1usize << n) - 1;
    let submasks = |m: usize| {
        let mut out = vec![0usize];
        let mut s = m;
        while s != 0 {
            out.push(s);
            s = (s - 1) & m;
        }
        out
    };
    for vmask in (0..=full).filter(|m: &usize| m.count_ones() as usize == k) {
        let inside = submasks(vmask);
        let outside = submasks(full & !vmask);
        for i in (0..n).filter(|i| vmask >> i & 1 == 1) {
            let found = outside.iter().any(|&s| {
                let agrees = |neg: bool| {
                    inside
                        .iter()
                        .all(|&v| table[s | v] == Some((v >> i & 1 == 1) != neg))
                };
                agrees(false) || agrees(true)
            });
            if !found {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::{check_leveled, check_reversible_bp, LevelCheck};

    fn natural(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn known_sizes() {
        assert_eq!(min_obdd_size(&FunctionOracle::disj(4).unwrap(), &natural(4)).unwrap(), 6);
        assert_eq!(min_obdd_size(&FunctionOracle::ip(4).unwrap(), &natural(4)).unwrap(), 8);
        assert_eq!(min_obdd_size(&FunctionOracle::perm(2), &natural(4)).unwrap(), 9);
    }

    #[test]
    fn trailing_irrelevant_variable_is_free() {
        let f = FunctionOracle::custom("disj+", 5, |x| !(x[0] && x[1] || x[2] && x[3]));
        assert_eq!(min_obdd_size(&f, &natural(5)).unwrap(), 6);
    }

    #[test]
    fn reversible_parity_is_two_wide() {
        let g = min_reversible_obdd(&FunctionOracle::xor(4), &natural(4)).unwrap();
        assert!(check_reversible_bp(&g).unwrap().ok);
        match check_leveled(&g).unwrap() {
            LevelCheck::Leveled(l) => {
                let widths: Vec<usize> = l.iter().map(|x| x.len()).collect();
                assert_eq!(widths, vec![1, 2, 2, 2, 2]);
            }
            LevelCheck::NotLeveled(r) => panic!("{r}"),
        }
    }

    #[test]
    fn stability() {
        assert!(is_k_stable(&FunctionOracle::variable(1, 0), 1).unwrap());
        assert!(!is_k_stable(&FunctionOracle::xor(3), 2).unwrap());
        assert!(is_k_stable(&FunctionOracle::det_z2(3), 2).unwrap());
    }
}
