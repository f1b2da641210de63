//! Rewrites between program forms that preserve (or provably bound) the
//! output behaviour.

mod align;
mod amplify;
mod clock;
mod draft;
mod gm;
mod levelize;
mod realify;

pub use align::{align_levels, AlignedProgram};
pub use amplify::{amplify, Combiner};
pub use clock::{clock_wrap, ClockParams};
pub use draft::{expand_unlabeled, DraftProgram};
pub use gm::{quantum_to_gm, randomized_to_gm};
pub use levelize::levelize;
pub use realify::realify;
