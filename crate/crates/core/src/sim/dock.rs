//! Docking ports and the capture test.
//!
//! A port is a target pose: the vessel is captured when its reference point
//! sits inside the capture window around the port position, its heading is
//! within the yaw tolerance of the port facing and its speed is below the
//! approach cap, continuously for the dwell time.

use serde::{Deserialize, Serialize};

use crate::vessel::{wrap_angle, VesselState};
use crate::{Error, Result};

/// Magnetic latch holding forces, N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatchForces {
    pub long_on_on: f64,
    pub lat_on_on: f64,
    pub long_on_ferro: f64,
    pub lat_on_ferro: f64,
}

impl Default for LatchForces {
    fn default() -> Self {
        Self {
            long_on_on: 570.0,
            lat_on_on: 150.0,
            long_on_ferro: 340.0,
            lat_on_ferro: 67.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DockPort {
    pub position: [f64; 2],
    /// Heading the vessel must hold when captured, rad.
    pub facing: f64,
    pub capture_longitudinal: f64,
    pub capture_lateral: f64,
    pub capture_yaw: f64,
    pub approach_speed_cap: f64,
    pub dwell: f64,
    pub latch_forces: LatchForces,
}

impl Default for DockPort {
    fn default() -> Self {
        Self {
            position: [0.0, 0.0],
            facing: 0.0,
            capture_longitudinal: 0.04,
            capture_lateral: 0.025,
            capture_yaw: 15f64.to_radians(),
            approach_speed_cap: 0.1,
            dwell: 0.5,
            latch_forces: LatchForces::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureFailure {
    Longitudinal,
    Lateral,
    Yaw,
    Speed,
    Dwell,
}

impl std::fmt::Display for CaptureFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaptureFailure::Longitudinal => "longitudinal",
            CaptureFailure::Lateral => "lateral",
            CaptureFailure::Yaw => "yaw",
            CaptureFailure::Speed => "speed",
            CaptureFailure::Dwell => "dwell",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureOutcome {
    Captured,
    NotCaptured(CaptureFailure),
}

impl CaptureOutcome {
    pub fn is_captured(&self) -> bool {
        matches!(self, CaptureOutcome::Captured)
    }
}

impl DockPort {
    pub fn at(x: f64, y: f64, facing: f64) -> Self {
        Self {
            position: [x, y],
            facing,
            ..Self::default()
        }
    }

    /// Window scaled by `factor` on every tolerance (dwell unchanged).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            capture_longitudinal: self.capture_longitudinal * factor,
            capture_lateral: self.capture_lateral * factor,
            capture_yaw: self.capture_yaw * factor,
            approach_speed_cap: self.approach_speed_cap * factor,
            ..*self
        }
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        for (key, v) in [
            ("port.capture_longitudinal", self.capture_longitudinal),
            ("port.capture_lateral", self.capture_lateral),
            ("port.capture_yaw", self.capture_yaw),
            ("port.approach_speed_cap", self.approach_speed_cap),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be strictly positive"));
            }
        }
        if !(self.dwell >= dt) {
            return Err(Error::config(
                "port.dwell",
                format!("must be at least one step ({dt} s)"),
            ));
        }
        Ok(())
    }

    /// Offsets of the vessel in the port frame: (longitudinal, lateral, yaw).
    pub fn offsets(&self, state: &VesselState) -> (f64, f64, f64) {
        let dx = state.pose.x - self.position[0];
        let dy = state.pose.y - self.position[1];
        let (s, c) = self.facing.sin_cos();
        (
            c * dx + s * dy,
            -s * dx + c * dy,
            wrap_angle(state.pose.psi - self.facing),
        )
    }

    /// Reason the instantaneous state is outside the window, if any.
    pub fn window_failure(&self, state: &VesselState) -> Option<CaptureFailure> {
        let (lon, lat, yaw) = self.offsets(state);
        if lon.abs() > self.capture_longitudinal {
            Some(CaptureFailure::Longitudinal)
        } else if lat.abs() > self.capture_lateral {
            Some(CaptureFailure::Lateral)
        } else if yaw.abs() > self.capture_yaw {
            Some(CaptureFailure::Yaw)
        } else if state.vel.u.hypot(state.vel.v) > self.approach_speed_cap {
            Some(CaptureFailure::Speed)
        } else {
            None
        }
    }

    /// Samples needed to cover the dwell time at step `dt`.
    pub fn dwell_samples(&self, dt: f64) -> usize {
        ((self.dwell / dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Capture test over `history` (oldest first) followed by `state`, sampled
/// every `dt`. The current state is checked first so the reported reason
/// names the violated tolerance; otherwise the window must have held for the
/// trailing `dwell / dt` samples.
pub fn docking_capture_check(
    state: &VesselState,
    port: &DockPort,
    history: &[VesselState],
    dt: f64,
) -> CaptureOutcome {
    if let Some(f) = port.window_failure(state) {
        return CaptureOutcome::NotCaptured(f);
    }
    let needed = port.dwell_samples(dt);
    let held = 1 + history
        .iter()
        .rev()
        .take_while(|s| port.window_failure(s).is_none())
        .count();
    if held >= needed {
        CaptureOutcome::Captured
    } else {
        CaptureOutcome::NotCaptured(CaptureFailure::Dwell)
    }
}

/// Incremental form of [`docking_capture_check`] for use inside a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureMonitor {
    pub port: DockPort,
    needed: usize,
    held: usize,
}

impl CaptureMonitor {
    pub fn new(port: DockPort, dt: f64) -> Self {
        Self {
            port,
            needed: port.dwell_samples(dt),
            held: 0,
        }
    }

    pub fn update(&mut self, state: &VesselState) -> CaptureOutcome {
        match self.port.window_failure(state) {
            Some(f) => {
                self.held = 0;
                CaptureOutcome::NotCaptured(f)
            }
            None => {
                self.held += 1;
                if self.held >= self.needed {
                    CaptureOutcome::Captured
                } else {
                    CaptureOutcome::NotCaptured(CaptureFailure::Dwell)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::{BodyVelocity, Pose};
    use proptest::prelude::*;

    const DT: f64 = 0.02;

    fn at(x: f64, y: f64, psi: f64, u: f64) -> VesselState {
        VesselState {
            pose: Pose::new(x, y, psi),
            vel: BodyVelocity::new(u, 0.0, 0.0),
            expansion: 0.0,
        }
    }

    #[test]
    fn aligned_at_rest_for_dwell_is_captured() {
        let port = DockPort::at(1.0, 2.0, 0.3);
        let s = at(1.0, 2.0, 0.3, 0.0);
        let history = vec![s; 24];
        assert_eq!(
            docking_capture_check(&s, &port, &history, DT),
            CaptureOutcome::Captured
        );
    }

    #[test]
    fn lateral_offset_beyond_window() {
        let port = DockPort::at(0.0, 0.0, 0.0);
        let s = at(0.0, 0.03, 0.0, 0.0);
        let history = vec![s; 30];
        assert_eq!(
            docking_capture_check(&s, &port, &history, DT),
            CaptureOutcome::NotCaptured(CaptureFailure::Lateral)
        );
    }

    #[test]
    fn window_is_in_port_frame() {
        // Port facing +y: a 0.03 m offset along y is longitudinal.
        let port = DockPort::at(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let s = at(0.0, 0.03, std::f64::consts::FRAC_PI_2, 0.0);
        assert_eq!(port.window_failure(&s), None);
        let s = at(0.03, 0.0, std::f64::consts::FRAC_PI_2, 0.0);
        assert_eq!(port.window_failure(&s), Some(CaptureFailure::Lateral));
    }

    #[test]
    fn one_step_short_of_dwell() {
        let port = DockPort::default();
        let s = at(0.0, 0.0, 0.0, 0.0);
        let history = vec![s; 23];
        assert_eq!(
            docking_capture_check(&s, &port, &history, DT),
            CaptureOutcome::NotCaptured(CaptureFailure::Dwell)
        );
    }

    #[test]
    fn fast_pass_is_not_a_capture() {
        let port = DockPort::default();
        let s = at(0.0, 0.0, 0.0, 0.2);
        assert_eq!(
            docking_capture_check(&s, &port, &vec![s; 30], DT),
            CaptureOutcome::NotCaptured(CaptureFailure::Speed)
        );
        let s = at(0.0, 0.0, 0.5, 0.0);
        assert_eq!(port.window_failure(&s), Some(CaptureFailure::Yaw));
    }

    #[test]
    fn zero_window_rejected() {
        let port = DockPort {
            capture_lateral: 0.0,
            ..DockPort::default()
        };
        assert!(port.validate(DT).is_err());
        let port = DockPort {
            dwell: 0.01,
            ..DockPort::default()
        };
        assert!(port.validate(DT).is_err());
        DockPort::default().validate(DT).unwrap();
    }

    fn trajectory() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
        prop::collection::vec(
            (-0.06..0.06f64, -0.04..0.04f64, -0.4..0.4f64, 0.0..0.15f64),
            1..60,
        )
    }

    proptest! {
        #[test]
        fn enlarging_window_never_loses_a_capture(traj in trajectory(), factor in 1.0..3.0f64) {
            let port = DockPort::default();
            let big = port.scaled(factor);
            let states: Vec<_> = traj.iter().map(|&(x, y, p, u)| at(x, y, p, u)).collect();
            let (last, history) = states.split_last().unwrap();
            if docking_capture_check(last, &port, history, DT).is_captured() {
                prop_assert!(docking_capture_check(last, &big, history, DT).is_captured());
            }
        }

        #[test]
        fn monitor_agrees_with_history_check(traj in trajectory()) {
            let port = DockPort::default();
            let states: Vec<_> = traj.iter().map(|&(x, y, p, u)| at(x * 0.5, y * 0.5, p * 0.5, u * 0.5)).collect();
            let mut monitor = CaptureMonitor::new(port, DT);
            for i in 0..states.len() {
                let incremental = monitor.update(&states[i]);
                let batch = docking_capture_check(&states[i], &port, &states[..i], DT);
                prop_assert_eq!(incremental, batch);
            }
        }
    }
}
