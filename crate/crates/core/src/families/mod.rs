//! Concrete program families and truth-table oracles.

mod fig1;
mod gm_exact;
mod ind;
mod obdd;
mod oracle;
mod perm;
pub mod random;

pub use fig1::fig1_example;
pub use gm_exact::gm_exact_obdd;
pub use ind::ind_zero_error_qobdd;
pub use obdd::{isa_tree, linear_obdd, reversible_tree};
pub use oracle::{FunctionOracle, LinearFamily};
pub use perm::{first_primes, perm_component, perm_qobdd};
