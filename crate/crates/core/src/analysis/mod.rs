//! Lower-bound apparatus: entropies, the two distinguishing-measurement
//! inequalities, measurement schemes and exact OBDD size oracles.

mod entropy;
mod obdd;
mod scheme;

pub use entropy::{
    binary_entropy, check_klauck, check_nayak, entropy_accumulation, entropy_of_matrix, von_neumann_entropy,
    BoundCheck, BoundStatus, EntropyAccumulation, EntropyPoint,
};
pub use obdd::{is_k_stable, min_obdd_size, min_reversible_obdd, subfunction_counts};
pub use scheme::{
    build_scheme, build_schemes, scheme_dimension_bound, verify_scheme, DimensionBound, MeasurementScheme,
    ProjectiveMeasurement, SchemeConstruction, SchemeEntry, RANK_THRESHOLD,
};
