//! Four-thruster "+" layout: thrusters 2 and 4 push along surge, 1 and 3
//! along sway, and all four sit at distance `L` from the body center.

use nalgebra::{Matrix3x4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThrusterLayout {
    /// Arm length at zero extension; the arm grows one-for-one with `l`.
    pub arm_offset: f64,
    /// Per-thruster force bound, N.
    pub f_max: f64,
}

impl Default for ThrusterLayout {
    fn default() -> Self {
        Self {
            arm_offset: 0.4435,
            f_max: 6.0,
        }
    }
}

impl ThrusterLayout {
    /// Thruster arm `L = l + arm_offset`.
    pub fn arm(&self, expansion: f64) -> f64 {
        expansion + self.arm_offset
    }

    /// `F = E u` after checking every thruster against `f_max`.
    pub fn allocate(&self, u: &Vector4<f64>, expansion: f64) -> Result<Vector3<f64>> {
        check_bounds(u, self.f_max)?;
        Ok(apply_allocation(u, self.arm(expansion)))
    }

    pub fn clamp(&self, u: &Vector4<f64>) -> Vector4<f64> {
        u.map(|f| f.clamp(-self.f_max, self.f_max))
    }
}

/// The 3×4 allocation matrix for thruster arm `arm`.
pub fn allocation_matrix(arm: f64) -> Matrix3x4<f64> {
    Matrix3x4::new(
        0.0, 1.0, 0.0, 1.0, //
        1.0, 0.0, 1.0, 0.0, //
        -arm, -arm, arm, arm,
    )
}

/// `E u` without bound checks.
pub fn apply_allocation(u: &Vector4<f64>, arm: f64) -> Vector3<f64> {
    Vector3::new(u[1] + u[3], u[0] + u[2], arm * (-u[0] - u[1] + u[2] + u[3]))
}

pub fn check_bounds(u: &Vector4<f64>, f_max: f64) -> Result<()> {
    for (index, &force) in u.iter().enumerate() {
        if !(force.abs() <= f_max) {
            return Err(Error::Saturation {
                index,
                force,
                f_max,
            });
        }
    }
    Ok(())
}
