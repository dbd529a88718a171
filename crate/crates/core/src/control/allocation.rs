//! Minimum-norm distribution of a desired planar wrench over four thrusters.

use nalgebra::{Vector3, Vector4};

use crate::vessel::thrusters::apply_allocation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// Thruster forces after clamping to `±f_max`.
    pub u: Vector4<f64>,
    /// Minimum-norm solution before clamping.
    pub unclamped: Vector4<f64>,
    /// `‖E u − F‖` for the clamped forces.
    pub residual: f64,
    pub saturated: bool,
}

/// `u = Eᵀ (E Eᵀ)⁻¹ F`, then clamped componentwise.
///
/// The rows of `E` are mutually orthogonal, so `E Eᵀ = diag(2, 2, 4L²)` and
/// the pseudo-inverse has a closed form.
pub fn allocate_forces(desired: &Vector3<f64>, arm: f64, f_max: f64) -> Allocation {
    let fx = desired[0] / 2.0;
    let fy = desired[1] / 2.0;
    let m = desired[2] / (4.0 * arm * arm);
    // Eᵀ columns: surge hits thrusters 2 and 4, sway 1 and 3, yaw (-L,-L,L,L).
    let unclamped = Vector4::new(fy - arm * m, fx - arm * m, fy + arm * m, fx + arm * m);
    let u = unclamped.map(|f| f.clamp(-f_max, f_max));
    let saturated = u != unclamped;
    let residual = (apply_allocation(&u, arm) - desired).norm();
    Allocation {
        u,
        unclamped,
        residual,
        saturated,
    }
}
