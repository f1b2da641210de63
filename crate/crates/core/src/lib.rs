//! Quantum branching programs (QBPs), quantum OBDDs and QBPs with generalized
//! measurements (gmQBPs).
//!
//! The crate is organised around a single graph carrier,
//! [`BranchingProgram`], which represents deterministic, randomized,
//! quantum and generalized-measurement programs alike. On top of it sit
//!
//! * [`validate`]: the structural constraints of every mode (well-formedness,
//!   unidirectionality, read-once order, reversibility, levels),
//! * [`semantics`]: exact simulation (pure states, density matrices,
//!   absolute probabilities, running times),
//! * [`transforms`]: leveling, realification, probabilistic clocks,
//!   amplification and the randomized-to-gm translation,
//! * [`families`]: concrete program families together with truth-table
//!   oracles,
//! * [`gateset`]: the finite universal gate basis and approximation search,
//! * [`analysis`]: entropy tools, measurement schemes, minimal OBDD sizes
//!   and k-stability,
//! * [`qtm`]: a bounded-tape quantum Turing machine simulator and its
//!   compiler to QBPs.

pub mod analysis;
pub mod error;
pub mod families;
pub mod gateset;
pub mod linalg;
pub mod model;
pub mod qtm;
pub mod semantics;
pub mod transforms;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    Assignment, BranchingProgram, Edge, Mode, Node, NodeId, NodeKind, Outcome, ProgramBuilder,
};
pub use num_complex::Complex64 as C64;

/// Default numerical tolerance for equality checks.
pub const DEFAULT_TOL: f64 = 1e-9;
