//! Vehicle mathematics: state types, mechanism kinematics, parameter
//! polynomials, thrust allocation, propulsion mapping and the planar dynamics.

pub mod dynamics;
pub mod mechanism;
pub mod params;
pub mod propulsion;
pub mod thrusters;

use std::f64::consts::PI;

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

pub use dynamics::{dynamics_derivative, integrate_rk4, rotation_matrix};
pub use mechanism::MechanismGeometry;
pub use params::{HydroParams, ParamPolynomials, Quadratic};
pub use propulsion::PropulsionTable;
pub use thrusters::ThrusterLayout;

/// Largest supported per-side hull extension, in meters.
pub const MAX_EXPANSION: f64 = 0.5;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Yaw, always wrapped to `(-π, π]`.
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
        }
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    /// Surge, m/s.
    pub u: f64,
    /// Sway, m/s.
    pub v: f64,
    /// Yaw rate, rad/s.
    pub r: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.r.is_finite()
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Pose, body velocity and current hull extension of the vessel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VesselState {
    pub pose: Pose,
    pub vel: BodyVelocity,
    /// Per-side hull extension `l`, meters, within `[0, MAX_EXPANSION]`.
    pub expansion: f64,
}

impl VesselState {
    pub fn at_rest(pose: Pose, expansion: f64) -> Self {
        Self {
            pose,
            vel: BodyVelocity::default(),
            expansion,
        }
    }

    /// The six-component state `[x, y, ψ, u, v, r]`.
    pub fn q(&self) -> Vector6<f64> {
        Vector6::new(
            self.pose.x,
            self.pose.y,
            self.pose.psi,
            self.vel.u,
            self.vel.v,
            self.vel.r,
        )
    }

    /// Rebuilds a state from `q`, wrapping the yaw component.
    pub fn from_q(q: &Vector6<f64>, expansion: f64) -> Self {
        Self {
            pose: Pose::new(q[0], q[1], q[2]),
            vel: BodyVelocity::new(q[3], q[4], q[5]),
            expansion,
        }
    }

    pub fn check_expansion(&self) -> crate::Result<()> {
        if !(0.0..=MAX_EXPANSION).contains(&self.expansion) {
            return Err(crate::Error::Range {
                what: "expansion",
                value: self.expansion,
                min: 0.0,
                max: MAX_EXPANSION,
            });
        }
        Ok(())
    }
}

/// A fully validated vessel description: geometry, parameter functions,
/// thrusters, propulsion map and simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselModel {
    pub geometry: MechanismGeometry,
    pub polynomials: ParamPolynomials,
    pub thrusters: ThrusterLayout,
    pub propulsion: PropulsionTable,
    /// Integration step, s.
    pub dt: f64,
    /// Servo-limited expansion rate, m/s.
    pub max_expansion_rate: f64,
}

impl Default for VesselModel {
    fn default() -> Self {
        let thrusters = ThrusterLayout::default();
        Self {
            geometry: MechanismGeometry::default(),
            polynomials: ParamPolynomials::default(),
            propulsion: PropulsionTable::synthetic(thrusters.f_max),
            thrusters,
            dt: 0.02,
            max_expansion_rate: 0.05,
        }
    }
}

impl VesselModel {
    pub fn params(&self, expansion: f64) -> crate::Result<HydroParams> {
        self.polynomials.eval(expansion)
    }

    pub fn arm(&self, expansion: f64) -> f64 {
        self.thrusters.arm(expansion)
    }

    pub fn f_max(&self) -> f64 {
        self.thrusters.f_max
    }
}
