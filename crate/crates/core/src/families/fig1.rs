use num_complex::Complex64 as C64;

use crate::model::{BranchingProgram, Mode, Outcome, ProgramBuilder};

/// Six-node reconstruction of the introductory example (computes `x_0 = x_1`).
///
/// `v1` (id 0, tests `x_0`) sends `(v2 ± v3)/√2`; `v2`, `v3` (ids 1, 2, test
/// `x_1`) interfere on the 1-sink `v6` (id 5) and the node `v4` (id 3, tests
/// `x_0`), which leads to the 0-sink `v5` (id 4). On input `00` the state
/// after one step is `(v2 + v3)/√2` and after two steps it is `v6`.
pub fn fig1_example() -> BranchingProgram {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut b = ProgramBuilder::new(2, Mode::Quantum);
    let v1 = b.internal(0);
    let v2 = b.internal(1);
    let v3 = b.internal(1);
    let v4 = b.internal(0);
    let v5 = b.sink(Outcome::Zero);
    let v6 = b.sink(Outcome::One);
    b.edge(v1, v2, false, h);
    b.edge(v1, v3, false, h);
    b.edge(v1, v2, true, h);
    b.edge(v1, v3, true, -h);
    b.edge_both(v2, v6, h);
    b.edge_both(v2, v4, h);
    b.edge(v3, v6, false, h);
    b.edge(v3, v4, false, -h);
    b.edge(v3, v6, true, -h);
    b.edge(v3, v4, true, h);
    b.edge_both(v4, v5, one);
    b.set_start(v1);
    b.build().expect("static construction")
}
