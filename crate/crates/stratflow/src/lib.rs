//! Nonsmooth first-order optimization methods driven as difference
//! inclusions, with diameter-based convergence diagnostics: criterion
//! residuals, desingularizing potentials, criticality certificates,
//! windowing and momentum reductions, and stratified relative-length checks
//! on a battery of piecewise-smooth test functions.

pub mod diagnostics;
pub mod error;
pub mod methods;
pub mod objectives;
pub mod reductions;
pub mod report;
pub mod rng;
pub mod schedule;
pub mod strata;
pub mod trajectory;
pub mod vecops;

pub use error::{Error, Result};
pub use rng::RngHandle;
pub use schedule::{ScheduleKind, StepSchedule};
pub use trajectory::{MethodMeta, Trajectory, TrajectoryMeta};
