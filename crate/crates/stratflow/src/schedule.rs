//! Step-size schedules of the form `alpha_k = c / (k + k0 + 1)^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `p = 1`.
    Harmonic,
    /// Arbitrary exponent `p >= 0`.
    Power,
    /// `p = 0`.
    Constant,
}

/// Closed-form step-size schedule. All parameters are validated at
/// construction so evaluation never fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub kind: ScheduleKind,
    /// Scale `c > 0`.
    pub scale: f64,
    /// Exponent `p >= 0` (forced to 1 for harmonic, 0 for constant).
    pub exponent: f64,
    /// Index offset `k0 >= 0`.
    #[serde(default)]
    pub offset: u64,
}

impl StepSchedule {
    pub fn harmonic(scale: f64) -> Self {
        Self::new(ScheduleKind::Harmonic, scale, 1.0, 0).expect("positive scale")
    }

    pub fn constant(scale: f64) -> Self {
        Self::new(ScheduleKind::Constant, scale, 0.0, 0).expect("positive scale")
    }

    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::new(ScheduleKind::Power, scale, exponent, 0).expect("valid parameters")
    }

    pub fn new(kind: ScheduleKind, scale: f64, exponent: f64, offset: u64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "schedule scale must be positive, got {scale}"
            )));
        }
        if !(exponent >= 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "schedule exponent must be nonnegative, got {exponent}"
            )));
        }
        let exponent = match kind {
            ScheduleKind::Harmonic => 1.0,
            ScheduleKind::Constant => 0.0,
            ScheduleKind::Power => exponent,
        };
        Ok(Self {
            kind,
            scale,
            exponent,
            offset,
        })
    }

    /// `alpha_k`; strictly positive for every `k`.
    pub fn value(&self, k: usize) -> f64 {
        let base = (k as f64) + (self.offset as f64) + 1.0;
        match self.kind {
            ScheduleKind::Constant => self.scale,
            ScheduleKind::Harmonic => self.scale / base,
            ScheduleKind::Power => self.scale / base.powf(self.exponent),
        }
    }

    /// First `k_steps` values.
    pub fn values(&self, k_steps: usize) -> Vec<f64> {
        (0..k_steps).map(|k| self.value(k)).collect()
    }

    /// `max over 0 <= i <= k < k_steps of alpha_k / alpha_i`.
    ///
    /// Equals 1 for every nonincreasing schedule.
    pub fn ratio_bound(&self, k_steps: usize) -> f64 {
        assert!(k_steps >= 1, "ratio_bound needs at least one step");
        ratio_bound_of(&self.values(k_steps))
    }
}

/// Ratio bound of an explicit step-size sequence:
/// `max over i <= k of values[k] / values[i]`.
pub fn ratio_bound_of(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut min_so_far = f64::INFINITY;
    let mut best = 0.0f64;
    for &a in values {
        min_so_far = min_so_far.min(a);
        best = best.max(a / min_so_far);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_values() {
        let s = StepSchedule::harmonic(1.0);
        assert_eq!(s.value(0), 1.0);
        assert_eq!(s.value(4), 0.2);
    }

    #[test]
    fn power_value() {
        let s = StepSchedule::power(2.0, 0.5);
        assert_eq!(s.value(3), 1.0); // 2 / 4^0.5
    }

    #[test]
    fn ratio_bound_monotone_schedules() {
        assert_eq!(StepSchedule::harmonic(1.0).ratio_bound(100), 1.0);
        assert_eq!(StepSchedule::constant(0.1).ratio_bound(10), 1.0);
    }

    #[test]
    fn ratio_bound_oscillating() {
        // Direct max over pairs: 0.75 / 0.5 = 1.5.
        assert_eq!(ratio_bound_of(&[1.0, 0.5, 0.75]), 1.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StepSchedule::new(ScheduleKind::Power, 0.0, 1.0, 0).is_err());
        assert!(StepSchedule::new(ScheduleKind::Power, 1.0, -0.5, 0).is_err());
    }

    proptest! {
        #[test]
        fn harmonic_ratio_bound_is_one(scale in 1e-3..1e3f64, k in 1usize..200) {
            let s = StepSchedule::harmonic(scale);
            prop_assert!((s.ratio_bound(k) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn values_strictly_positive(scale in 1e-6..1e3f64, p in 0.0..3.0f64, k in 0usize..1000) {
            let s = StepSchedule::power(scale, p);
            prop_assert!(s.value(k) > 0.0);
        }

        #[test]
        fn ratio_bound_matches_quadratic_scan(values in proptest::collection::vec(1e-3..1e3f64, 1..40)) {
            let fast = ratio_bound_of(&values);
            let mut slow = 0.0f64;
            for i in 0..values.len() {
                for k in i..values.len() {
                    slow = slow.max(values[k] / values[i]);
                }
            }
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0));
        }
    }
}
