//! Extrapolation spaces of positive matrix semigroups.

pub mod generator;
pub mod semigroup;
pub mod space;

pub use generator::{
    gershgorin_abscissa, multiplication_generator, neumann_laplacian_1d, periodic_laplacian_1d, resolvent, GeneratorMatrix,
    PositivityCertificate, POSITIVITY_TOL,
};
pub use semigroup::semigroup;
pub use space::{
    cone_distance, extrapolation_cone_contains, extrapolation_norm, lambda_equivalence, multiplication_example_check,
    resolvent_scheme, theorem41_sup, ConeDistance, ExtrapolationSpace, LambdaEquivalence, MultiplicationReport, MULTIPLICATION_TOL,
    RESOLVENT_MAX_INDEX,
};
