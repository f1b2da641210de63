use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

const ONE: C64 = C64::new(1.0, 0.0);

/// Choose the blocks of `x` variables stored by the random branches.
fn blocks(n: usize, eps: f64) -> Vec<Vec<usize>> {
    let parts = |k: usize| -> Vec<Vec<usize>> {
        (0..k).map(|c| (c * n / k..(c + 1) * n / k).collect()).collect()
    };
    if eps >= 0.5 {
        let k = ((1.0 / (1.0 - eps)) + 1e-12).floor() as usize;
        parts(k.clamp(1, n))
    } else {
        let k = ((1.0 / eps) - 1e-12).ceil() as usize;
        if k > n {
            return vec![(0..n).collect()];
        }
        let p = parts(k);
        (0..k)
            .map(|c| (0..n).filter(|v| !p[c].contains(v)).collect())
            .collect()
    }
}

struct Tree<'a> {
    b: &'a mut ProgramBuilder,
    n: usize,
    l: usize,
    block: Vec<usize>,
}

impl Tree<'_> {
    /// Node reading `block[depth]` (or the `y` part once the block is read).
    fn build(&mut self, depth: usize, x: &mut Vec<bool>) -> NodeId {
        if depth < self.block.len() {
            let var = self.block[depth];
            let node = self.b.internal(var);
            for bit in [false, true] {
                x[var] = bit;
                let child = self.build(depth + 1, x);
                self.b.edge(node, child, bit, ONE);
            }
            x[var] = false;
            node
        } else {
            self.y_tree(0, 0, x)
        }
    }

    fn y_tree(&mut self, i: usize, y: usize, x: &[bool]) -> NodeId {
        if i == self.l {
            let label = if self.block.contains(&y) {
                Outcome::from_bool(x[y])
            } else {
                Outcome::Unknown
            };
            return self.b.sink(label);
        }
        let node = self.b.internal(self.n + i);
        for bit in [false, true] {
            let child = self.y_tree(i + 1, y | ((bit as usize) << i), x);
            self.b.edge(node, child, bit, ONE);
        }
        node
    }
}

/// Zero-error QOBDD for `IND_n` with failure probability at most `eps`.
///
/// A top node testing `x_0` picks one of `k` blocks uniformly (amplitude
/// `1/√k`); the chosen block is stored in a tree, `y` is decoded, and the
/// answer is `x_{|y|}` when that variable is stored, `?` otherwise.
pub fn ind_zero_error_qobdd(n: usize, eps: f64) -> Result<BranchingProgram> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("IND needs n a power of two, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    let l = n.trailing_zeros() as usize;
    let blocks = blocks(n, eps);
    let amp = C64::new(1.0 / (blocks.len() as f64).sqrt(), 0.0);
    let mut b = ProgramBuilder::new(n + l, Mode::Quantum);
    let top = b.internal(0);
    b.set_start(top);
    for block in blocks {
        let has_x0 = block.first() == Some(&0);
        let mut x = vec![false; n];
        let mut t = Tree { b: &mut b, n, l, block };
        if has_x0 {
            for bit in [false, true] {
                x[0] = bit;
                let child = t.build(1, &mut x);
                t.b.edge(top, child, bit, amp);
            }
        } else {
            let root = t.build(0, &mut x);
            t.b.edge_both(top, root, amp);
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FunctionOracle;
    use crate::model::Assignment;
    use crate::semantics::evolve;
    use crate::validate::validate_profile;

    fn check(n: usize, eps: f64) {
        let g = ind_zero_error_qobdd(n, eps).unwrap();
        assert!(validate_profile(&g, 1e-9).ok, "n={n} eps={eps}");
        let f = FunctionOracle::ind(n).unwrap();
        for a in Assignment::all(f.n_vars()) {
            let p = evolve(&g, &a, 2 * (n + 2)).probabilities();
            let want = f.eval(&a).unwrap() as usize;
            assert!(p[1 - want] < 1e-12);
            assert!(p[2] <= eps + 1e-9, "n={n} eps={eps} p?={}", p[2]);
            assert!((p[0] + p[1] + p[2] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn several_error_levels() {
        check(4, 0.5);
        check(4, 0.75);
        check(4, 0.3);
        check(4, 0.1);
        check(8, 0.5);
        check(2, 0.5);
    }

    #[test]
    fn block_shapes() {
        assert_eq!(blocks(4, 0.5), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(blocks(4, 0.25), vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]]);
    }
}
