use num_complex::Complex64 as C64;
use serde::Serialize;

use super::draft::{expand_unlabeled, DraftProgram};
use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome};

/// Abort amplitudes of the probabilistic clock.
///
/// With `A = 2^{2t+1} + 2^{t+1}`, `B = 2^{t+1} + 1` and `C = A + 1` the
/// continue amplitude is `β = A/C` and the abort amplitude `γ = B/C`;
/// `A² + B² = C²` holds exactly.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ClockParams {
    pub t: u32,
    pub beta: f64,
    pub gamma: f64,
}

impl ClockParams {
    /// Largest `t` for which `C²` (and so the integer identity) fits in `u128`.
    pub const MAX_T: u32 = 30;

    pub fn new(t: u32) -> Result<Self> {
        if t == 0 || t > Self::MAX_T {
            return Err(Error::InvalidArgument(format!(
                "clock parameter t must lie in 1..={}, got {t}",
                Self::MAX_T
            )));
        }
        let (a, b, c) = Self::integers(t);
        Ok(ClockParams {
            t,
            beta: a as f64 / c as f64,
            gamma: b as f64 / c as f64,
        })
    }

    /// Numerators and common denominator `(A, B, C)`.
    pub fn integers(t: u32) -> (u128, u128, u128) {
        let a = (1u128 << (2 * t + 1)) + (1u128 << (t + 1));
        let b = (1u128 << (t + 1)) + 1;
        (a, b, a + 1)
    }

    /// Exact check of `A² + B² = C²`.
    pub fn identity_exact(t: u32) -> bool {
        let (a, b, c) = Self::integers(t);
        match (a.checked_mul(a), b.checked_mul(b), c.checked_mul(c)) {
            (Some(a2), Some(b2), Some(c2)) => a2.checked_add(b2) == Some(c2),
            _ => false,
        }
    }

    /// `|β² + γ² - 1|` in floating point.
    pub fn defect(&self) -> f64 {
        (self.beta * self.beta + self.gamma * self.gamma - 1.0).abs()
    }

    /// Halting probability contributed by one clock tick.
    pub fn abort_probability(&self) -> f64 {
        self.gamma * self.gamma
    }
}

/// Wrap a quantum program with a probabilistic clock.
///
/// Every simulated step is preceded by a split `w_i -> β w_i' + γ w_i*`
/// where `w_i*` is a private 0-sink. `w_i'` copies `v_i` and leads to
/// `w_j''`, which is a sink if `v_j` is one and otherwise returns to `w_j`
/// with amplitude 1. The unlabeled nodes are expanded at the end.
pub fn clock_wrap(bp: &BranchingProgram, t: u32) -> Result<BranchingProgram> {
    if bp.mode() != Mode::Quantum {
        return Err(Error::WrongMode {
            expected: Mode::Quantum.name(),
            found: bp.mode().name(),
        });
    }
    let params = ClockParams::new(t)?;
    let beta = C64::new(params.beta, 0.0);
    let gamma = C64::new(params.gamma, 0.0);
    let one = C64::new(1.0, 0.0);
    let bp = bp.prune_unreachable()?;
    let s = bp.size();
    let mut d = DraftProgram::new(bp.n_vars(), Mode::Quantum);

    // w'' first so that edges out of w' can be added while building w.
    let w2: Vec<NodeId> = (0..s)
        .map(|j| match bp.label(NodeId(j)) {
            Some(l) => d.sink(l),
            None => d.unlabeled(),
        })
        .collect();
    let mut w: Vec<Option<NodeId>> = vec![None; s];
    for i in 0..s {
        let v = NodeId(i);
        let abort = d.sink(Outcome::Zero);
        match bp.var(v) {
            Some(var) => {
                let wi = d.unlabeled();
                let wp = d.labeled(var);
                d.plain(wi, wp, beta);
                d.plain(wi, abort, gamma);
                for e in bp.out_edges(v) {
                    d.edge(wp, w2[e.to.0], e.bit, e.amp);
                }
                d.plain(w2[i], wi, one);
                w[i] = Some(wi);
            }
            None if v == bp.start() => {
                let wi = d.unlabeled();
                d.plain(wi, w2[i], beta);
                d.plain(wi, abort, gamma);
                w[i] = Some(wi);
            }
            None => {}
        }
    }
    d.set_start(w[bp.start().0].expect("start node gets a clock tick"));
    expand_unlabeled(&d)?.prune_unreachable()
}
