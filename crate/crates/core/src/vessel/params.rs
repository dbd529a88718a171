//! Hydrodynamic coefficients and their quadratic dependence on hull extension.

use serde::{Deserialize, Serialize};

use super::MAX_EXPANSION;
use crate::{Error, Result};

/// Mass and linear-drag coefficients at one hull extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroParams {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub xu: f64,
    pub yv: f64,
    pub nr: f64,
}

impl HydroParams {
    /// Parameters of a form that is symmetric in surge and sway.
    pub fn symmetric(m12: f64, m3: f64, xuv: f64, nr: f64) -> Self {
        Self {
            m1: m12,
            m2: m12,
            m3,
            xu: xuv,
            yv: xuv,
            nr,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.m1, self.m2, self.m3, self.xu, self.yv, self.nr]
    }

    /// The reduced vector `[m12, m3, Xuv, Nr]` used by identification.
    pub fn reduced(&self) -> [f64; 4] {
        [self.m1, self.m3, self.xu, self.nr]
    }

    pub fn from_reduced(p: &[f64; 4]) -> Self {
        Self::symmetric(p[0], p[1], p[2], p[3])
    }

    /// Fails if any coefficient is non-positive or non-finite.
    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 6] = ["m1", "m2", "m3", "Xu", "Yv", "Nr"];
        for (name, value) in NAMES.iter().zip(self.as_array()) {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} = {value} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.m1 == self.m2 && self.xu == self.yv
    }

    /// Adds a rigidly attached payload: translational mass terms grow by
    /// `mass`, yaw inertia by `mass * yaw_radius²`, drag is unchanged.
    pub fn with_payload(&self, mass: f64, yaw_radius: f64) -> Self {
        Self {
            m1: self.m1 + mass,
            m2: self.m2 + mass,
            m3: self.m3 + mass * yaw_radius * yaw_radius,
            ..*self
        }
    }
}

/// `c2 l² + c1 l + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Quadratic {
    pub const fn new(c2: f64, c1: f64, c0: f64) -> Self {
        Self { c2, c1, c0 }
    }

    pub fn eval(&self, l: f64) -> f64 {
        (self.c2 * l + self.c1) * l + self.c0
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.c2, self.c1, self.c0]
    }
}

/// Quadratic parameter functions of the hull extension.
///
/// Surge and sway share one polynomial for mass and one for drag, so the
/// evaluated [`HydroParams`] are symmetric by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPolynomials {
    pub m12: Quadratic,
    pub m3: Quadratic,
    pub xuv: Quadratic,
    pub nr: Quadratic,
}

impl Default for ParamPolynomials {
    /// Coefficients identified on the physical vessel.
    fn default() -> Self {
        Self {
            m12: Quadratic::new(0.11317070, 8.13430784, 22.82839307),
            m3: Quadratic::new(0.13027175, 1.88878483, 7.57931479),
            xuv: Quadratic::new(-1.01327442, 9.75583033, 19.79519544),
            nr: Quadratic::new(0.21534853, 1.19699306, 2.27478185),
        }
    }
}

impl ParamPolynomials {
    pub fn families(&self) -> [&Quadratic; 4] {
        [&self.m12, &self.m3, &self.xuv, &self.nr]
    }

    /// Evaluates the parameters at extension `l`; lengths outside the
    /// identified range `[0, 0.5]` are refused.
    pub fn eval(&self, l: f64) -> Result<HydroParams> {
        if !(0.0..=MAX_EXPANSION).contains(&l) {
            return Err(Error::Range {
                what: "expansion",
                value: l,
                min: 0.0,
                max: MAX_EXPANSION,
            });
        }
        Ok(self.eval_unchecked(l))
    }

    /// Like [`eval`](Self::eval) but extrapolates outside the identified range.
    pub fn eval_extrapolated(&self, l: f64) -> HydroParams {
        self.eval_unchecked(l)
    }

    fn eval_unchecked(&self, l: f64) -> HydroParams {
        HydroParams::symmetric(
            self.m12.eval(l),
            self.m3.eval(l),
            self.xuv.eval(l),
            self.nr.eval(l),
        )
    }

    /// Fails unless every family is positive over `[0, 0.5]`.
    pub fn validate(&self) -> Result<()> {
        for i in 0..=100 {
            let l = MAX_EXPANSION * i as f64 / 100.0;
            self.eval_unchecked(l).validate()?;
        }
        Ok(())
    }
}
