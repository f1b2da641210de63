use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, Node, NodeId, ProgramBuilder};

/// Equivalent program with real amplitudes.
///
/// Each node `v` splits into `v_re` and `v_im` carrying the real and
/// imaginary parts of its amplitude; an edge `α = a + ib` becomes the real
/// 2×2 block `[[a, -b], [b, a]]`. Copies unreachable from the start (for
/// instance every `v_im` of an already-real program) are dropped.
pub fn realify(bp: &BranchingProgram) -> Result<BranchingProgram> {
    if bp.mode() != Mode::Quantum {
        return Err(Error::WrongMode {
            expected: "quantum".into(),
            found: bp.mode().name(),
        });
    }
    let mut b = ProgramBuilder::new(bp.n_vars(), Mode::Quantum);
    for node in bp.nodes() {
        let copy = Node { class: None, ..*node };
        b.add_node(copy);
        b.add_node(copy);
    }
    let re = |v: NodeId| NodeId(2 * v.0);
    let im = |v: NodeId| NodeId(2 * v.0 + 1);
    for e in bp.edges() {
        let (a, c) = (e.amp.re, e.amp.im);
        b.accumulate(re(e.from), re(e.to), e.bit, C64::new(a, 0.0));
        b.accumulate(im(e.from), im(e.to), e.bit, C64::new(a, 0.0));
        b.accumulate(im(e.from), re(e.to), e.bit, C64::new(-c, 0.0));
        b.accumulate(re(e.from), im(e.to), e.bit, C64::new(c, 0.0));
    }
    b.set_start(re(bp.start()));
    b.build()?.prune_unreachable()
}
