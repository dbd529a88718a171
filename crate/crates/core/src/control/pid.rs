//! Three decoupled PID loops (longitudinal, lateral, rotational) acting on
//! body-frame tracking errors, followed by minimum-norm thrust allocation.

use nalgebra::{Vector2, Vector3, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use super::allocation::allocate_forces;
use crate::vessel::{rotation_matrix, wrap_angle, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl AxisGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub longitudinal: AxisGains,
    pub lateral: AxisGains,
    pub rotational: AxisGains,
    /// Bound on each integrator state (error·s).
    pub integral_limit: f64,
}

impl PidGains {
    /// Gains tuned for the contracted form.
    pub fn contracted() -> Self {
        Self {
            longitudinal: AxisGains::new(349.0, 1.4, 0.9),
            lateral: AxisGains::new(349.0, 1.5, 1.0),
            rotational: AxisGains::new(67.0, 1.6, 1.1),
            integral_limit: 5.0,
        }
    }

    /// Gains tuned for the expanded form.
    pub fn expanded() -> Self {
        Self {
            longitudinal: AxisGains::new(433.0, 1.4, 0.9),
            lateral: AxisGains::new(349.0, 1.6, 1.1),
            rotational: AxisGains::new(107.0, 1.5, 1.0),
            integral_limit: 5.0,
        }
    }

    /// The gain set for the nearer of the two extreme forms.
    pub fn for_expansion(expansion: f64) -> Self {
        if expansion < 0.25 {
            Self::contracted()
        } else {
            Self::expanded()
        }
    }

    fn axes(&self) -> [AxisGains; 3] {
        [self.longitudinal, self.lateral, self.rotational]
    }

    pub fn is_valid(&self) -> bool {
        self.axes()
            .iter()
            .all(|g| g.kp >= 0.0 && g.ki >= 0.0 && g.kd >= 0.0)
            && self.integral_limit >= 0.0
    }
}

/// Integrator and derivative-filter memory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: [f64; 3],
    pub derivative: [f64; 3],
    pub prev_error: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    /// Thruster forces, clamped to `±f_max`.
    pub u: Vector4<f64>,
    /// Desired `(Fx, Fy, Mz)` before allocation and saturation.
    pub desired: Vector3<f64>,
    /// Body-frame errors `(longitudinal, lateral, yaw)`.
    pub error: [f64; 3],
    pub saturated: bool,
}

/// Body-frame tracking error: position error rotated into the body frame,
/// and the wrapped yaw error.
pub fn body_error(state: &VesselState, q_ref: &Vector6<f64>) -> [f64; 3] {
    let dp = Vector3::new(q_ref[0] - state.pose.x, q_ref[1] - state.pose.y, 0.0);
    let body = rotation_matrix(state.pose.psi).transpose() * dp;
    [body[0], body[1], wrap_angle(q_ref[2] - state.pose.psi)]
}

/// One PID update at control period `dt_c`.
///
/// The derivative acts on the error through a first-order low-pass with time
/// constant `2·dt_c`; the first call after a reset has no derivative kick.
/// The integrator is frozen while any thruster saturates.
pub fn pid_step(
    state: &VesselState,
    q_ref: &Vector6<f64>,
    gains: &PidGains,
    dt_c: f64,
    arm: f64,
    f_max: f64,
    memory: &PidState,
) -> (PidOutput, PidState) {
    let error = body_error(state, q_ref);
    let alpha = dt_c / (2.0 * dt_c + dt_c);
    let mut next = *memory;
    let mut desired = Vector3::zeros();
    for (i, g) in gains.axes().iter().enumerate() {
        let raw = match memory.prev_error {
            Some(prev) => {
                let de = if i == 2 {
                    wrap_angle(error[i] - prev[i])
                } else {
                    error[i] - prev[i]
                };
                de / dt_c
            }
            None => 0.0,
        };
        next.derivative[i] = if memory.prev_error.is_some() {
            memory.derivative[i] + alpha * (raw - memory.derivative[i])
        } else {
            0.0
        };
        desired[i] = g.kp * error[i] + g.ki * memory.integral[i] + g.kd * next.derivative[i];
    }
    let alloc = allocate_forces(&desired, arm, f_max);
    if !alloc.saturated {
        for ((acc, prev), e) in next.integral.iter_mut().zip(memory.integral).zip(error) {
            *acc = (prev + e * dt_c).clamp(-gains.integral_limit, gains.integral_limit);
        }
    }
    next.prev_error = Some(error);
    (
        PidOutput {
            u: alloc.u,
            desired,
            error,
            saturated: alloc.saturated,
        },
        next,
    )
}

/// Ultimate gain and oscillation period of a P-only loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimatePoint {
    pub gain: f64,
    pub period: f64,
}

/// Relay-free Ziegler–Nichols search on one axis modelled as
/// `m ẍ + d ẋ = F`, with the controller sampled at `dt_c` under
/// zero-order hold. The proportional gain is raised until the sampled loop
/// stops decaying; the classic PID rule is then applied.
pub fn ziegler_nichols(mass: f64, damping: f64, dt_c: f64) -> Option<(AxisGains, UltimatePoint)> {
    let decays = |kp: f64| -> (bool, f64) {
        // Exact discretization of the double integrator with drag.
        let a = damping / mass;
        let e = (-a * dt_c).exp();
        let phi = nalgebra::Matrix2::new(1.0, (1.0 - e) / a, 0.0, e);
        let gamma = Vector2::new((dt_c - (1.0 - e) / a) / (a * mass), (1.0 - e) / (a * mass));
        let mut x = Vector2::new(1.0_f64, 0.0);
        let mut peaks = Vec::new();
        let mut last_sign = x[0].signum();
        let mut crossings = Vec::new();
        for k in 0..4000 {
            let f = -kp * x[0];
            x = phi * x + gamma * f;
            peaks.push(x[0].abs());
            let sign = x[0].signum();
            if sign != last_sign && sign != 0.0 {
                crossings.push(k as f64 * dt_c);
                last_sign = sign;
            }
        }
        let early = peaks[..400].iter().cloned().fold(0.0, f64::max);
        let late = peaks[3600..].iter().cloned().fold(0.0, f64::max);
        let period = if crossings.len() >= 3 {
            let n = crossings.len();
            crossings[n - 1] - crossings[n - 3]
        } else {
            f64::NAN
        };
        (late < early, period)
    };

    let mut lo = 0.0;
    let mut hi = mass;
    while decays(hi).0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return None;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if decays(mid).0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ku = hi;
    let tu = decays(ku).1;
    if !tu.is_finite() {
        return None;
    }
    Some((
        AxisGains::new(0.6 * ku, 1.2 * ku / tu, 0.075 * ku * tu),
        UltimatePoint {
            gain: ku,
            period: tu,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::Pose;

    const ARM: f64 = 0.4435;

    #[test]
    fn published_gain_tables() {
        let c = PidGains::contracted();
        assert_eq!(c.longitudinal, AxisGains::new(349.0, 1.4, 0.9));
        assert_eq!(c.lateral, AxisGains::new(349.0, 1.5, 1.0));
        assert_eq!(c.rotational, AxisGains::new(67.0, 1.6, 1.1));
        let e = PidGains::expanded();
        assert_eq!(e.longitudinal, AxisGains::new(433.0, 1.4, 0.9));
        assert_eq!(e.lateral, AxisGains::new(349.0, 1.6, 1.1));
        assert_eq!(e.rotational, AxisGains::new(107.0, 1.5, 1.0));
        assert!(c.is_valid() && e.is_valid());
    }

    #[test]
    fn zero_error_gives_zero_thrust() {
        let s = VesselState::at_rest(Pose::new(1.0, 1.0, 0.3), 0.0);
        let r = Vector6::new(1.0, 1.0, 0.3, 0.0, 0.0, 0.0);
        let (out, _) = pid_step(
            &s,
            &r,
            &PidGains::contracted(),
            0.1,
            ARM,
            6.0,
            &PidState::default(),
        );
        assert_eq!(out.u, Vector4::zeros());
    }

    #[test]
    fn forward_offset_is_pure_proportional_surge() {
        let s = VesselState::at_rest(Pose::new(0.0, 0.0, 0.0), 0.0);
        let r = Vector6::new(0.01, 0.0, 0.0, 0.0, 0.0, 0.0);
        let (out, _) = pid_step(
            &s,
            &r,
            &PidGains::contracted(),
            0.1,
            ARM,
            6.0,
            &PidState::default(),
        );
        assert!((out.desired[0] - 349.0 * 0.01).abs() < 1e-12);
        assert_eq!(out.desired[1], 0.0);
        assert_eq!(out.desired[2], 0.0);
        assert!(!out.saturated);
    }

    #[test]
    fn body_frame_error_follows_heading() {
        // Facing +y, a target at +y is straight ahead.
        let s = VesselState::at_rest(Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_2), 0.0);
        let e = body_error(
            &s,
            &Vector6::new(0.0, 1.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0),
        );
        assert!((e[0] - 1.0).abs() < 1e-12 && e[1].abs() < 1e-12 && e[2] == 0.0);
    }

    #[test]
    fn saturation_clamps_and_freezes_integrator() {
        let s = VesselState::at_rest(Pose::new(0.0, 0.0, 0.0), 0.0);
        let r = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let mem = PidState {
            integral: [0.2, 0.0, 0.0],
            ..PidState::default()
        };
        let (out, next) = pid_step(&s, &r, &PidGains::contracted(), 0.1, ARM, 6.0, &mem);
        assert!(out.saturated);
        assert!(out.u.iter().all(|f| f.abs() <= 6.0));
        assert_eq!(out.u[1], 6.0);
        assert_eq!(next.integral, mem.integral);
    }

    #[test]
    fn integrator_accumulates_when_unsaturated() {
        let s = VesselState::at_rest(Pose::new(0.0, 0.0, 0.0), 0.0);
        let r = Vector6::new(0.001, 0.0, 0.0, 0.0, 0.0, 0.0);
        let (_, next) = pid_step(
            &s,
            &r,
            &PidGains::contracted(),
            0.1,
            ARM,
            6.0,
            &PidState::default(),
        );
        assert!((next.integral[0] - 1e-4).abs() < 1e-15);
        assert_eq!(next.prev_error, Some([0.001, 0.0, 0.0]));
    }

    #[test]
    fn ziegler_nichols_gains_stabilize_sampled_axis() {
        let (m, d, dt) = (22.83, 19.8, 0.1);
        let (g, ultimate) = ziegler_nichols(m, d, dt).unwrap();
        assert!(ultimate.gain > 0.0 && ultimate.period > 0.0);
        // Closed-loop PID on the sampled axis converges to the setpoint.
        let a = d / m;
        let e = (-a * dt).exp();
        let (mut x, mut v, mut integ, mut prev) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
        for _ in 0..3000 {
            let err = -x;
            let f = g.kp * err + g.ki * integ + g.kd * (err - prev) / dt;
            integ += err * dt;
            prev = err;
            let nx = x + v * (1.0 - e) / a + (dt - (1.0 - e) / a) * f / (a * m);
            v = v * e + (1.0 - e) * f / (a * m);
            x = nx;
        }
        assert!(x.abs() < 1e-3, "residual {x}");
    }
}
