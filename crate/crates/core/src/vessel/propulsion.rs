//! Piecewise-linear PWM duty cycle ↔ thrust map.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DUTY_MIN: f64 = 0.061;
pub const DUTY_MAX: f64 = 0.088;
pub const DUTY_NEUTRAL: f64 = 0.0745;
pub const DEADBAND: f64 = 0.001;

/// Knots are `(duty, force)` pairs, duty ascending, force nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropulsionTable {
    knots: Vec<(f64, f64)>,
}

impl PropulsionTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::config("propulsion.knots", "need at least two knots"));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::config(
                    format!("propulsion.knots[{}]", i + 1),
                    "duty cycles must be strictly increasing",
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::config(
                    format!("propulsion.knots[{}]", i + 1),
                    "force must be nondecreasing in duty",
                ));
            }
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first.0 < DUTY_MIN || last.0 > DUTY_MAX {
            return Err(Error::config(
                "propulsion.knots",
                format!("duty cycles must lie in [{DUTY_MIN}, {DUTY_MAX}]"),
            ));
        }
        if !(first.1 < 0.0 && last.1 > 0.0) {
            return Err(Error::config(
                "propulsion.knots",
                "table must span reverse and forward thrust",
            ));
        }
        let table = Self { knots };
        if table.pwm_to_force(DUTY_NEUTRAL)? != 0.0 {
            return Err(Error::config(
                "propulsion.knots",
                "neutral duty must produce zero force",
            ));
        }
        Ok(table)
    }

    /// Symmetric 12-knot map with a ±0.001 deadband around neutral and a
    /// convex thrust curve reaching `±f_max` at the duty extremes.
    pub fn synthetic(f_max: f64) -> Self {
        let steps = 5;
        let pos_lo = DUTY_NEUTRAL + DEADBAND;
        let neg_hi = DUTY_NEUTRAL - DEADBAND;
        let mut knots = Vec::with_capacity(2 * (steps + 1));
        for k in (0..=steps).rev() {
            let s = k as f64 / steps as f64;
            knots.push((neg_hi - s * (neg_hi - DUTY_MIN), -f_max * s.powf(1.5)));
        }
        for k in 0..=steps {
            let s = k as f64 / steps as f64;
            knots.push((pos_lo + s * (DUTY_MAX - pos_lo), f_max * s.powf(1.5)));
        }
        knots[0].0 = DUTY_MIN;
        knots[2 * steps + 1].0 = DUTY_MAX;
        Self::new(knots).expect("synthetic table is valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn f_max(&self) -> f64 {
        self.knots[self.knots.len() - 1].1.min(-self.knots[0].1)
    }

    pub fn pwm_to_force(&self, duty: f64) -> Result<f64> {
        let (d0, d1) = (self.knots[0].0, self.knots[self.knots.len() - 1].0);
        if !(d0..=d1).contains(&duty) {
            return Err(Error::Range {
                what: "duty",
                value: duty,
                min: d0,
                max: d1,
            });
        }
        let k = self.knots.partition_point(|&(d, _)| d < duty);
        if k == 0 {
            return Ok(self.knots[0].1);
        }
        let (da, fa) = self.knots[k - 1];
        let (db, fb) = self.knots[k];
        Ok(fa + (fb - fa) * (duty - da) / (db - da))
    }

    /// Duty cycle producing force `f`. Zero maps to the neutral duty.
    pub fn force_to_pwm(&self, f: f64) -> Result<f64> {
        let (f0, f1) = (self.knots[0].1, self.knots[self.knots.len() - 1].1);
        if !(f0..=f1).contains(&f) {
            return Err(Error::Range {
                what: "force",
                value: f,
                min: f0,
                max: f1,
            });
        }
        if f == 0.0 {
            return Ok(DUTY_NEUTRAL);
        }
        // First knot with force >= f; its predecessor is strictly below f
        // unless f sits on the lowest knot.
        let k = self
            .knots
            .partition_point(|&(_, kf)| kf < f)
            .clamp(1, self.knots.len() - 1);
        let (da, fa) = self.knots[k - 1];
        let (db, fb) = self.knots[k];
        if fb == fa {
            return Ok(da);
        }
        Ok(da + (db - da) * (f - fa) / (fb - fa))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_and_endpoints() {
        let t = PropulsionTable::synthetic(6.0);
        assert_eq!(t.knots().len(), 12);
        assert_eq!(t.pwm_to_force(DUTY_NEUTRAL).unwrap(), 0.0);
        assert_eq!(t.pwm_to_force(DUTY_MAX).unwrap(), 6.0);
        assert_eq!(t.pwm_to_force(DUTY_MIN).unwrap(), -6.0);
        assert_eq!(t.force_to_pwm(0.0).unwrap(), DUTY_NEUTRAL);
        assert_eq!(t.f_max(), 6.0);
    }

    #[test]
    fn knot_round_trip_on_monotone_region() {
        let t = PropulsionTable::synthetic(6.0);
        for &(d, f) in t.knots() {
            let back = t.force_to_pwm(t.pwm_to_force(d).unwrap()).unwrap();
            if f == 0.0 {
                // Deadband edges collapse onto the neutral duty.
                assert!((back - DUTY_NEUTRAL).abs() <= DEADBAND + 1e-12);
            } else {
                assert!((back - d).abs() < 1e-9, "{d} -> {f} -> {back}");
            }
        }
    }

    #[test]
    fn interior_round_trip() {
        let t = PropulsionTable::synthetic(6.0);
        for i in 1..200 {
            let f = -6.0 + 12.0 * i as f64 / 200.0;
            if f.abs() < 1e-12 {
                continue;
            }
            let d = t.force_to_pwm(f).unwrap();
            assert!((t.pwm_to_force(d).unwrap() - f).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let t = PropulsionTable::synthetic(6.0);
        assert!(matches!(t.pwm_to_force(0.05), Err(Error::Range { .. })));
        assert!(matches!(t.force_to_pwm(6.1), Err(Error::Range { .. })));
    }

    #[test]
    fn monotone_knots_enforced() {
        let knots = vec![(0.061, -6.0), (0.07, 1.0), (0.075, 0.0), (0.088, 6.0)];
        assert!(matches!(
            PropulsionTable::new(knots),
            Err(Error::Config { .. })
        ));
    }
}
