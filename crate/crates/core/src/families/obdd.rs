use num_complex::Complex64 as C64;

use super::oracle::{FunctionOracle, LinearFamily};
use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

const ONE: C64 = C64::new(1.0, 0.0);

/// Reduced deterministic OBDD for DISJ or IP in the natural order.
///
/// DISJ has `n + 2` nodes and IP has `2n` nodes.
pub fn linear_obdd(f: LinearFamily, n: usize) -> Result<BranchingProgram> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("{} needs a positive even n, got {n}", f.name())));
    }
    let pairs = n / 2;
    let mut b = ProgramBuilder::new(n, Mode::Deterministic);
    match f {
        LinearFamily::Disj => {
            let a: Vec<NodeId> = (0..pairs).map(|i| b.internal(2 * i)).collect();
            let bb: Vec<NodeId> = (0..pairs).map(|i| b.internal(2 * i + 1)).collect();
            let zero = b.sink(Outcome::Zero);
            let one = b.sink(Outcome::One);
            for i in 0..pairs {
                let next = if i + 1 < pairs { a[i + 1] } else { one };
                b.edge(a[i], next, false, ONE);
                b.edge(a[i], bb[i], true, ONE);
                b.edge(bb[i], next, false, ONE);
                b.edge(bb[i], zero, true, ONE);
            }
            b.set_start(a[0]);
        }
        LinearFamily::Ip => {
            // a[i][p], c[i][p]: pair i, parity p so far (only p = 0 for i = 0).
            let mut a = vec![[None; 2]; pairs];
            let mut c = vec![[None; 2]; pairs];
            for i in 0..pairs {
                for p in 0..if i == 0 { 1 } else { 2 } {
                    a[i][p] = Some(b.internal(2 * i));
                    c[i][p] = Some(b.internal(2 * i + 1));
                }
            }
            let sinks = [b.sink(Outcome::Zero), b.sink(Outcome::One)];
            let target = |i: usize, p: usize| if i < pairs { a[i][p].unwrap() } else { sinks[p] };
            for i in 0..pairs {
                for p in 0..2 {
                    if let (Some(ai), Some(ci)) = (a[i][p], c[i][p]) {
                        b.edge(ai, target(i + 1, p), false, ONE);
                        b.edge(ai, ci, true, ONE);
                        b.edge(ci, target(i + 1, p), false, ONE);
                        b.edge(ci, target(i + 1, 1 - p), true, ONE);
                    }
                }
            }
            b.set_start(a[0][0].unwrap());
        }
    }
    b.build()
}

/// Complete decision tree reading `order`, one sink per leaf.
///
/// The tree is reversible, so it is also a well-formed quantum program.
pub fn reversible_tree(oracle: &FunctionOracle, order: &[usize]) -> Result<BranchingProgram> {
    let n = oracle.n_vars();
    check_order(order, n)?;
    if n > 20 {
        return Err(Error::InvalidArgument("complete trees are limited to 20 variables".into()));
    }
    let mut b = ProgramBuilder::new(n, Mode::Deterministic);
    let mut bits = vec![false; n];
    let root = tree_node(&mut b, oracle, order, 0, &mut bits)?;
    b.set_start(root);
    b.build()
}

fn tree_node(
    b: &mut ProgramBuilder,
    oracle: &FunctionOracle,
    order: &[usize],
    depth: usize,
    bits: &mut Vec<bool>,
) -> Result<NodeId> {
    if depth == order.len() {
        let v = oracle
            .eval_bits(bits)
            .ok_or_else(|| Error::InvalidArgument(format!("{} is undefined on a leaf", oracle.name())))?;
        return Ok(b.sink(Outcome::from_bool(v)));
    }
    let var = order[depth];
    let node = b.internal(var);
    for bit in [false, true] {
        bits[var] = bit;
        let child = tree_node(b, oracle, order, depth + 1, bits)?;
        b.edge(node, child, bit, ONE);
    }
    bits[var] = false;
    Ok(node)
}

pub(crate) fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidArgument(format!("order has {} entries, expected {n}", order.len())));
    }
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::InvalidArgument(format!("order is not a permutation of 0..{n}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Read-once decision tree for `ISA_n`: the `y` bits, then block `s`, then `x_t`.
pub fn isa_tree(n: usize) -> Result<BranchingProgram> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("ISA needs n a power of two >= 2, got {n}")));
    }
    let k = n.trailing_zeros() as usize;
    let blocks = n / k;
    let mut b = ProgramBuilder::new(k + n, Mode::Deterministic);
    let root = isa_y(&mut b, k, blocks, 0, 0);
    b.set_start(root);
    b.build()
}

fn isa_y(b: &mut ProgramBuilder, k: usize, blocks: usize, i: usize, s: usize) -> NodeId {
    if i == k {
        if s >= blocks {
            return b.sink(Outcome::Zero);
        }
        return isa_block(b, k, s, 0, 0);
    }
    let node = b.internal(i);
    for bit in [false, true] {
        let child = isa_y(b, k, blocks, i + 1, s | ((bit as usize) << i));
        b.edge(node, child, bit, ONE);
    }
    node
}

fn isa_block(b: &mut ProgramBuilder, k: usize, s: usize, j: usize, t: usize) -> NodeId {
    if j == k {
        if (s * k..s * k + k).contains(&t) {
            // x_t was read inside the block: it is bit t - s*k of t itself.
            return b.sink(Outcome::from_bool((t >> (t - s * k)) & 1 == 1));
        }
        let node = b.internal(k + t);
        let z = b.sink(Outcome::Zero);
        let o = b.sink(Outcome::One);
        b.edge(node, z, false, ONE);
        b.edge(node, o, true, ONE);
        return node;
    }
    let node = b.internal(k + s * k + j);
    for bit in [false, true] {
        let child = isa_block(b, k, s, j + 1, t | ((bit as usize) << j));
        b.edge(node, child, bit, ONE);
    }
    node
}
