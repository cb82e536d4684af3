//! Concrete oracle implementations and empirical oracle diagnostics.

mod diagnostics;
mod example1;
mod lagrangian;
mod least_squares;
mod noise;

pub use diagnostics::{
    abc_diagnostic, bg_diagnostic, AbcProbeResidual, AbcReport, BgProbeReport, BgReport,
};
pub use example1::{make_example1_oracle, Example1Oracle, PsdCheck};
pub use lagrangian::{make_lagrangian_oracle, ConstraintOracles, LagrangianOracle};
pub use least_squares::{make_finite_sum_least_squares_oracle, LeastSquaresRowOracle};
pub use noise::{
    make_additive_noise_wrapper_gradient, make_additive_noise_wrapper_operator, NoiseScale,
    NoisyGradientOracle, NoisyOperatorOracle,
};
