use num_complex::Complex64 as C64;
use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};

/// The `m` smallest primes.
pub fn first_primes(m: usize) -> Vec<u64> {
    let mut limit = 16usize;
    loop {
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if sieve[i] {
                for j in (i * i..=limit).step_by(i) {
                    sieve[j] = false;
                }
            }
            i += 1;
        }
        let primes: Vec<u64> = (0..=limit).filter(|&i| sieve[i]).map(|i| i as u64).take(m).collect();
        if primes.len() == m {
            return primes;
        }
        limit *= 2;
    }
}

fn pow2_mod(k: usize, p: u64) -> u64 {
    (0..k).fold(1 % p, |acc, _| acc * 2 % p)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Target {
    Node(usize, u64, bool),
    Reject,
    Final(u64),
}

/// Fingerprinting automaton modulo `p`: position `j·n + k`, running sum `s`
/// of `2^col` over rows, flag "row already has its 1".
struct Component {
    n: usize,
    p: u64,
}

impl Component {
    fn initial(&self) -> (usize, u64, bool) {
        let full = (pow2_mod(self.n, self.p) + self.p - 1) % self.p;
        (0, (self.p - full) % self.p, false)
    }

    fn next(&self, pos: usize, s: u64, f: bool, bit: bool) -> Target {
        let k = pos % self.n;
        let (s2, f2) = match (bit, f) {
            (false, _) => (s, f),
            (true, true) => return Target::Reject,
            (true, false) => ((s + pow2_mod(k, self.p)) % self.p, true),
        };
        if k + 1 < self.n {
            return Target::Node(pos + 1, s2, f2);
        }
        if !f2 {
            Target::Reject
        } else if pos + 1 == self.n * self.n {
            Target::Final(s2)
        } else {
            Target::Node(pos + 1, s2, false)
        }
    }
}

/// Emits reachable component nodes into a builder.
struct Emitter<'a> {
    comp: Component,
    nodes: HashMap<(usize, u64, bool), NodeId>,
    finals: HashMap<u64, NodeId>,
    queue: VecDeque<(usize, u64, bool)>,
    b: &'a mut ProgramBuilder,
}

impl<'a> Emitter<'a> {
    fn node(&mut self, key: (usize, u64, bool)) -> NodeId {
        if let Some(&id) = self.nodes.get(&key) {
            return id;
        }
        let id = self.b.internal(key.0);
        self.nodes.insert(key, id);
        self.queue.push_back(key);
        id
    }

    fn target(&mut self, t: Target) -> NodeId {
        match t {
            Target::Node(pos, s, f) => self.node((pos, s, f)),
            // Every rejecting edge gets its own sink to keep the graph reversible.
            Target::Reject => self.b.sink(Outcome::Zero),
            Target::Final(s) => *self
                .finals
                .entry(s)
                .or_insert_with(|| self.b.sink(Outcome::from_bool(s == 0))),
        }
    }

    fn drain(&mut self) {
        while let Some(key) = self.queue.pop_front() {
            let id = self.nodes[&key];
            for bit in [false, true] {
                let t = self.comp.next(key.0, key.1, key.2, bit);
                let w = self.target(t);
                self.b.edge(id, w, bit, C64::new(1.0, 0.0));
            }
        }
    }
}

/// Reversible OBDD `G^(p)` checking one-hot rows and `Σ_j |x_j| ≡ 2^n − 1 (mod p)`.
pub fn perm_component(p: u64, n: usize) -> Result<BranchingProgram> {
    if n < 1 || p < 2 {
        return Err(Error::InvalidArgument("perm_component needs n >= 1 and p >= 2".into()));
    }
    let mut b = ProgramBuilder::new(n * n, Mode::Deterministic);
    let comp = Component { n, p };
    let init = comp.initial();
    let mut em = Emitter {
        comp,
        nodes: HashMap::new(),
        finals: HashMap::new(),
        queue: VecDeque::new(),
        b: &mut b,
    };
    let start = em.node(init);
    em.drain();
    b.set_start(start);
    b.build()
}

/// QOBDD for `PERM_n` in row-wise order: a top node testing `x_{0,0}`
/// branches with amplitude `1/√m` into the components for the first `m`
/// primes. Permutation matrices are accepted with certainty.
pub fn perm_qobdd(n: usize, primes_count: Option<usize>) -> Result<BranchingProgram> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("perm_qobdd needs n >= 2, got {n}")));
    }
    let m = primes_count.unwrap_or(2 * n * n);
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one prime".into()));
    }
    let amp = C64::new(1.0 / (m as f64).sqrt(), 0.0);
    let mut b = ProgramBuilder::new(n * n, Mode::Quantum);
    let top = b.internal(0);
    b.set_start(top);
    for p in first_primes(m) {
        let comp = Component { n, p };
        let (pos, s, f) = comp.initial();
        let mut em = Emitter {
            comp,
            nodes: HashMap::new(),
            finals: HashMap::new(),
            queue: VecDeque::new(),
            b: &mut b,
        };
        for bit in [false, true] {
            let t = em.comp.next(pos, s, f, bit);
            let w = em.target(t);
            em.b.edge(top, w, bit, amp);
        }
        em.drain();
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FunctionOracle;
    use crate::model::Assignment;
    use crate::semantics::{classical_eval, evolve};
    use crate::validate::{check_reversible_bp, validate_profile};

    #[test]
    fn primes() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn component_is_reversible_and_sound() {
        let g = perm_component(3, 2).unwrap();
        assert!(check_reversible_bp(&g).unwrap().ok);
        let f = FunctionOracle::perm(2);
        for a in Assignment::all(4) {
            let p = classical_eval(&g, &a).unwrap();
            if f.eval(&a).unwrap() {
                assert_eq!(p[1], 1.0);
            }
        }
    }

    #[test]
    fn perm2_exhaustive() {
        let g = perm_qobdd(2, None).unwrap();
        assert!(validate_profile(&g, 1e-9).ok);
        let f = FunctionOracle::perm(2);
        for a in Assignment::all(4) {
            let p1 = evolve(&g, &a, 10).probabilities()[1];
            if f.eval(&a).unwrap() {
                assert!((p1 - 1.0).abs() < 1e-9);
            } else {
                assert!(p1 <= 0.5 + 1e-9);
            }
        }
    }
}
