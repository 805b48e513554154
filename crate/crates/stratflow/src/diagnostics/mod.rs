//! Convergence diagnostics: diameters, criterion residuals, desingularizing
//! potentials, criticality certificates, tail-error models, and the explicit
//! bound calculators.

pub mod averaging;
pub mod bounds;
pub mod criterion;
pub mod desingularizer;
pub mod diameter;
pub mod minnorm;
pub mod tails;

pub use averaging::{averaging_residual, averaging_residual_relative};
pub use bounds::{
    bound_terms, diameter_bound_rhs, fit_step_tail_constants, rhs_from_terms, sweep_theta,
    BoundConstants, BoundMode, BoundTerms, FitReport,
};
pub use criterion::{criterion_residual, CriterionCell, CriterionProfile, PairGrid};
pub use desingularizer::Desingularizer;
pub use diameter::diameter;
pub use minnorm::{criticality_distance, min_norm_distance, min_norm_point, sample_generators};
pub use tails::{TailErrorModel, TailTable};
