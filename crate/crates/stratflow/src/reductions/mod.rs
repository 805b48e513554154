//! Reductions of the stochastic and momentum schemes to inexact-step form:
//! window aggregation and the exponentially weighted increment split.

pub mod momentum;
pub mod windowing;

pub use momentum::{
    momentum_bounds_check, momentum_decompose, weighted_steps, weighted_steps_of,
    MomentumBounds, MomentumDecomposition, WeightedSteps,
};
pub use windowing::{
    reconstruction_residual, sandwich_violation, window_aggregate, window_asymptotics,
    window_error_check, window_error_streaming, window_indices, RatioBand, WindowAsymptotics,
    WindowErrorReport, WindowPlan, WindowedSequence,
};
