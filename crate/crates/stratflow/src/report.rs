//! Per-run diagnostics report, serialized as JSON next to the trajectory.

use serde::{Deserialize, Serialize};

use crate::diagnostics::bounds::BoundConstants;
use crate::diagnostics::criterion::CriterionCell;
use crate::reductions::momentum::MomentumBounds;
use crate::reductions::windowing::{WindowAsymptotics, WindowErrorReport};

/// One sampled series point keyed by iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub function: String,
    pub method: String,
    pub seed: u64,
    pub k_steps: usize,
    /// Objective values on a geometric iteration grid.
    pub objective_profile: Vec<SeriesPoint>,
    /// Tail diameters `diam(x_[k, K])` on a geometric grid of `k`.
    pub diam_profile: Vec<SeriesPoint>,
    /// Criterion residual cells and the tail maximum.
    pub criterion_cells: Vec<CriterionCell>,
    pub criterion_max_tail: Option<f64>,
    /// Criticality distances along the run and at the final iterate.
    pub criticality_profile: Vec<SeriesPoint>,
    pub crit_distance_at_final: Option<f64>,
    /// Bound comparison (never asserted, only reported).
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub fitted_constants: Option<BoundConstants>,
    /// Window ratio series `s_t / (t+1)^(1/zeta)` and the error report.
    pub window_ratio_profile: Vec<SeriesPoint>,
    pub window_asymptotics: Option<WindowAsymptotics>,
    pub window_errors: Option<WindowErrorReport>,
    /// Momentum split report.
    pub momentum_bounds: Option<MomentumBounds>,
    /// Strata instrumentation: crossing count, block table size, worst
    /// diameter-vs-relative-length gap, worst descent residual.
    pub strata: Option<StrataReport>,
    /// Exit disposition of the run ("ok" or "blow-up at step k").
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrataReport {
    pub crossing_count: usize,
    pub block_count: usize,
    pub open_regime: bool,
    pub worst_diam_minus_rl_bound: Option<f64>,
    pub worst_descent_residual: Option<f64>,
    pub checked_segments: usize,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
