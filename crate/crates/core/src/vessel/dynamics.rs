//! Planar rigid-body dynamics with diagonal added mass and linear drag.
//!
//! ```text
//! η̇ = R(ψ) v
//! M v̇ + C(v) v + D v = F
//! ```

use nalgebra::{Matrix3, Matrix6, Matrix6x3, Vector3, Vector4, Vector6};

use super::params::HydroParams;
use super::thrusters::apply_allocation;
use super::VesselState;
use crate::{Error, Result};

const COMPONENTS: [&str; 6] = ["x", "y", "psi", "u", "v", "r"];

/// Body-to-inertial rotation about the vertical axis.
pub fn rotation_matrix(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(
        c, -s, 0.0, //
        s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

pub fn mass_matrix(p: &HydroParams) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(p.m1, p.m2, p.m3))
}

pub fn coriolis_matrix(p: &HydroParams, vel: &Vector3<f64>) -> Matrix3<f64> {
    let (u, v) = (vel[0], vel[1]);
    Matrix3::new(
        0.0,
        0.0,
        -p.m2 * v, //
        0.0,
        0.0,
        p.m1 * u, //
        p.m2 * v,
        -p.m1 * u,
        0.0,
    )
}

pub fn damping_matrix(p: &HydroParams) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(p.xu, p.yv, p.nr))
}

/// `½ vᵀ M v`.
pub fn kinetic_energy(p: &HydroParams, vel: &Vector3<f64>) -> f64 {
    0.5 * (p.m1 * vel[0] * vel[0] + p.m2 * vel[1] * vel[1] + p.m3 * vel[2] * vel[2])
}

/// `q̇` for generalized body-frame force `force`. No parameter checks.
#[inline]
pub fn derivative(q: &Vector6<f64>, force: &Vector3<f64>, p: &HydroParams) -> Vector6<f64> {
    let (s, c) = q[2].sin_cos();
    let (u, v, r) = (q[3], q[4], q[5]);
    Vector6::new(
        c * u - s * v,
        s * u + c * v,
        r,
        (force[0] + p.m2 * v * r - p.xu * u) / p.m1,
        (force[1] - p.m1 * u * r - p.yv * v) / p.m2,
        (force[2] - (p.m2 - p.m1) * u * v - p.nr * r) / p.m3,
    )
}

/// `∂q̇/∂q` at `q`; the applied force does not enter.
pub fn state_jacobian(q: &Vector6<f64>, p: &HydroParams) -> Matrix6<f64> {
    let (s, c) = q[2].sin_cos();
    let (u, v, r) = (q[3], q[4], q[5]);
    let dm = p.m2 - p.m1;
    let mut j = Matrix6::zeros();
    j[(0, 2)] = -s * u - c * v;
    j[(0, 3)] = c;
    j[(0, 4)] = -s;
    j[(1, 2)] = c * u - s * v;
    j[(1, 3)] = s;
    j[(1, 4)] = c;
    j[(2, 5)] = 1.0;
    j[(3, 3)] = -p.xu / p.m1;
    j[(3, 4)] = p.m2 * r / p.m1;
    j[(3, 5)] = p.m2 * v / p.m1;
    j[(4, 3)] = -p.m1 * r / p.m2;
    j[(4, 4)] = -p.yv / p.m2;
    j[(4, 5)] = -p.m1 * u / p.m2;
    j[(5, 3)] = -dm * v / p.m3;
    j[(5, 4)] = -dm * u / p.m3;
    j[(5, 5)] = -p.nr / p.m3;
    j
}

/// `∂q̇/∂F = [0; M⁻¹]`.
pub fn force_jacobian(p: &HydroParams) -> Matrix6x3<f64> {
    let mut j = Matrix6x3::zeros();
    j[(3, 0)] = 1.0 / p.m1;
    j[(4, 1)] = 1.0 / p.m2;
    j[(5, 2)] = 1.0 / p.m3;
    j
}

/// One classical RK4 step with the force held constant.
#[inline]
pub fn rk4(q: &Vector6<f64>, force: &Vector3<f64>, p: &HydroParams, dt: f64) -> Vector6<f64> {
    let k1 = derivative(q, force, p);
    let k2 = derivative(&(q + 0.5 * dt * k1), force, p);
    let k3 = derivative(&(q + 0.5 * dt * k2), force, p);
    let k4 = derivative(&(q + dt * k3), force, p);
    q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// `q̇ = A(q) q + B u` for thruster forces `u` and thruster arm `arm`.
pub fn dynamics_derivative(
    state: &VesselState,
    u: &Vector4<f64>,
    params: &HydroParams,
    arm: f64,
) -> Result<Vector6<f64>> {
    params.validate()?;
    Ok(derivative(&state.q(), &apply_allocation(u, arm), params))
}

/// Advances `state` by `dt` under constant thruster forces `u`.
pub fn integrate_rk4(
    state: &VesselState,
    u: &Vector4<f64>,
    params: &HydroParams,
    arm: f64,
    dt: f64,
) -> Result<VesselState> {
    integrate_force(state, &apply_allocation(u, arm), params, dt)
}

/// Advances `state` by `dt` under a constant generalized force.
pub fn integrate_force(
    state: &VesselState,
    force: &Vector3<f64>,
    params: &HydroParams,
    dt: f64,
) -> Result<VesselState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Range {
            what: "dt",
            value: dt,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    params.validate()?;
    if dt == 0.0 {
        return Ok(*state);
    }
    let next = rk4(&state.q(), force, params, dt);
    if let Some(i) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numerical {
            component: COMPONENTS[i],
        });
    }
    Ok(VesselState::from_q(&next, state.expansion))
}
