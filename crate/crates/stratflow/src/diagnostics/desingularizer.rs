//! Signed power potentials `psi(s) = c sgn(s) |s|^(1-theta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Desingularizer {
    pub c: f64,
    pub theta: f64,
}

impl Desingularizer {
    pub fn new(c: f64, theta: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        Ok(Self { c, theta })
    }

    /// `c * sgn(s) * |s|^(1 - theta)`; odd and strictly increasing.
    pub fn psi(&self, s: f64) -> f64 {
        self.c * s.signum() * s.abs().powf(1.0 - self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_case() {
        let d = Desingularizer::new(1.0, 0.5).unwrap();
        assert_eq!(d.psi(4.0), 2.0);
        assert_eq!(d.psi(0.0), 0.0);
        assert_eq!(d.psi(-4.0), -2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Desingularizer::new(0.0, 0.5).is_err());
        assert!(Desingularizer::new(1.0, 1.0).is_err());
        assert!(Desingularizer::new(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn odd_and_increasing(c in 0.1..10.0f64, theta in 0.05..0.95f64,
                              a in -50.0..50.0f64, b in -50.0..50.0f64) {
            let d = Desingularizer::new(c, theta).unwrap();
            prop_assert!((d.psi(-a) + d.psi(a)).abs() < 1e-12 * (1.0 + d.psi(a).abs()));
            if a < b {
                prop_assert!(d.psi(a) <= d.psi(b));
            }
        }

        #[test]
        fn two_point_holder_bound(theta in 0.05..0.95f64,
                                  t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
            // |psi(t1) - psi(t2)| <= 2 psi(|t1 - t2|)
            let d = Desingularizer::new(1.0, theta).unwrap();
            prop_assert!((d.psi(t1) - d.psi(t2)).abs() <= 2.0 * d.psi((t1 - t2).abs()) + 1e-12);
        }
    }
}
