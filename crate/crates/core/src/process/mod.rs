//! Point-process limits of the field: the normalized empirical measures
//! `Ñ_n`, samples of the limit measure `Ñ_*` and their Laplace functionals.

mod measure;
mod report;

pub use measure::{
    build_measure, build_normalized_measure, laplace_empirical, laplace_theoretical, sample_limit_measure, Scaling,
    TestFunction, WeightedPointMeasure,
};
pub use report::{
    convergence_report, limit_mass_beyond, limit_mass_beyond_exact, scaling_diagnostics, ConvergenceReport,
    ConvergenceRow, LimitRow, MassPoint, ScalingDiagnostics, TrendFlag, SE_MULTIPLIER, WRONG_SCALING_EPSILON,
};
