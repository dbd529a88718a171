//! Time-parameterized reference trajectories.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use crate::vessel::{rotation_matrix, wrap_angle, Pose};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Circle,
    Square,
    Hourglass,
    DockApproach,
    Custom,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Shape::Circle),
            "square" => Ok(Shape::Square),
            "hourglass" => Ok(Shape::Hourglass),
            "dock_approach" => Ok(Shape::DockApproach),
            "custom" => Ok(Shape::Custom),
            other => Err(Error::config("shape", format!("unknown shape `{other}`"))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Hourglass => "hourglass",
            Shape::DockApproach => "dock_approach",
            Shape::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// A corner of a segmented path, passed at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub t: f64,
    pub arc_length: f64,
    pub x: f64,
    pub y: f64,
}

/// Reference states sampled at a fixed period. Velocity components are
/// body-frame finite differences of the pose samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub shape: Shape,
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<[f64; 6]>,
    pub corners: Vec<Corner>,
}

/// One straight leg of a waypoint path: travel to `pose` at `speed`, then
/// hold it for `hold` seconds. Yaw is interpolated along the leg and turns
/// no faster than `yaw_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub pose: Pose,
    pub speed: f64,
    pub yaw_rate: f64,
    pub hold: f64,
}

impl Leg {
    pub fn new(pose: Pose, speed: f64) -> Self {
        Self {
            pose,
            speed,
            yaw_rate: 0.5,
            hold: 0.0,
        }
    }

    pub fn with_hold(mut self, hold: f64) -> Self {
        self.hold = hold;
        self
    }
}

impl ReferenceTrajectory {
    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len().saturating_sub(1)) as f64
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration()
    }

    pub fn final_pose(&self) -> Pose {
        let s = self.samples[self.samples.len() - 1];
        Pose::new(s[0], s[1], s[2])
    }

    /// Reference state at time `t`, held constant (at rest) outside the
    /// sampled interval.
    pub fn sample(&self, t: f64) -> Vector6<f64> {
        let n = self.samples.len();
        let s = (t - self.t0) / self.dt;
        if s <= 0.0 {
            let f = self.samples[0];
            return Vector6::new(f[0], f[1], f[2], 0.0, 0.0, 0.0);
        }
        if s >= (n - 1) as f64 {
            let f = self.samples[n - 1];
            return Vector6::new(f[0], f[1], f[2], 0.0, 0.0, 0.0);
        }
        let k = s.floor() as usize;
        let a = s - k as f64;
        let (p, q) = (self.samples[k], self.samples[k + 1]);
        let mut out = Vector6::zeros();
        for i in 0..6 {
            out[i] = p[i] + a * (q[i] - p[i]);
        }
        out[2] = wrap_angle(p[2] + a * wrap_angle(q[2] - p[2]));
        out
    }

    /// `n + 1` reference states at `t, t + dt_c, …, t + n·dt_c`.
    pub fn window(&self, t: f64, dt_c: f64, n: usize) -> Vec<Vector6<f64>> {
        (0..=n).map(|k| self.sample(t + k as f64 * dt_c)).collect()
    }

    pub fn from_poses(
        shape: Shape,
        t0: f64,
        dt: f64,
        poses: Vec<(f64, f64, f64)>,
        corners: Vec<Corner>,
    ) -> Self {
        let n = poses.len();
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = if n == 1 {
                (k, k)
            } else if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            let span = (b - a) as f64 * dt;
            let (x, y, psi) = poses[k];
            let mut v = Vector6::zeros();
            if span > 0.0 {
                let deta = nalgebra::Vector3::new(
                    (poses[b].0 - poses[a].0) / span,
                    (poses[b].1 - poses[a].1) / span,
                    wrap_angle(poses[b].2 - poses[a].2) / span,
                );
                let body = rotation_matrix(psi).transpose() * deta;
                v.fixed_rows_mut::<3>(3).copy_from(&body);
            }
            samples.push([x, y, wrap_angle(psi), v[3], v[4], v[5]]);
        }
        Self {
            shape,
            t0,
            dt,
            samples,
            corners,
        }
    }

    /// Piecewise-linear path from `start` through `legs`.
    pub fn from_legs(shape: Shape, start: Pose, legs: &[Leg], t0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Reference("sample period must be positive".into()));
        }
        let mut poses = vec![(start.x, start.y, start.psi)];
        let mut corners = Vec::new();
        let mut from = start;
        let mut arc = 0.0;
        let mut t_leg_start = 0.0;
        for leg in legs {
            if !(leg.speed > 0.0 && leg.yaw_rate > 0.0) || leg.hold < 0.0 {
                return Err(Error::Reference(
                    "legs need positive speed and yaw rate and a nonnegative hold".into(),
                ));
            }
            let dist = from.distance_to(&leg.pose);
            let dpsi = wrap_angle(leg.pose.psi - from.psi);
            let travel = (dist / leg.speed).max(dpsi.abs() / leg.yaw_rate);
            let steps = (travel / dt - 1e-9).ceil() as usize;
            for k in 1..=steps {
                let a = k as f64 / steps as f64;
                poses.push((
                    from.x + a * (leg.pose.x - from.x),
                    from.y + a * (leg.pose.y - from.y),
                    from.psi + a * dpsi,
                ));
            }
            arc += dist;
            t_leg_start += steps as f64 * dt;
            corners.push(Corner {
                t: t0 + t_leg_start,
                arc_length: arc,
                x: leg.pose.x,
                y: leg.pose.y,
            });
            let hold_steps = (leg.hold / dt).round() as usize;
            for _ in 0..hold_steps {
                poses.push((leg.pose.x, leg.pose.y, leg.pose.psi));
            }
            t_leg_start += hold_steps as f64 * dt;
            from = leg.pose;
        }
        Ok(Self::from_poses(shape, t0, dt, poses, corners))
    }
}

/// Constant-speed reference of the given shape centered on `origin`.
///
/// `size` is the radius for a circle, the side for a square and the width
/// (equal to the height) for the hourglass. One lap is generated per unit
/// of `laps`.
pub fn build_reference(
    shape: Shape,
    size: f64,
    speed: f64,
    origin: (f64, f64),
    laps: usize,
    dt: f64,
) -> Result<ReferenceTrajectory> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::Reference(format!(
            "size must be positive, got {size}"
        )));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::Reference(format!(
            "speed must be positive, got {speed}"
        )));
    }
    if laps == 0 || !(dt > 0.0) {
        return Err(Error::Reference(
            "need at least one lap and a positive sample period".into(),
        ));
    }
    let (cx, cy) = origin;
    match shape {
        Shape::Circle => {
            let period = 2.0 * PI * size / speed;
            let steps = (laps as f64 * period / dt).round() as usize;
            let poses = (0..=steps)
                .map(|k| {
                    let theta = -FRAC_PI_2 + speed * k as f64 * dt / size;
                    (
                        cx + size * theta.cos(),
                        cy + size * theta.sin(),
                        theta + FRAC_PI_2,
                    )
                })
                .collect();
            Ok(ReferenceTrajectory::from_poses(
                Shape::Circle,
                0.0,
                dt,
                poses,
                Vec::new(),
            ))
        }
        Shape::Square | Shape::Hourglass => {
            let a = size / 2.0;
            let vertices: Vec<(f64, f64)> = if shape == Shape::Square {
                vec![(-a, -a), (a, -a), (a, a), (-a, a)]
            } else {
                // Two triangles meeting at the center: the diagonals cross
                // once at the waist.
                vec![(-a, a), (a, a), (-a, -a), (a, -a)]
            };
            let closed: Vec<(f64, f64)> =
                vertices.iter().chain(vertices.first()).copied().collect();
            let heading = |p: (f64, f64), q: (f64, f64)| (q.1 - p.1).atan2(q.0 - p.0);
            let start = Pose::new(
                cx + closed[0].0,
                cy + closed[0].1,
                heading(closed[0], closed[1]),
            );
            let mut legs = Vec::new();
            for _ in 0..laps {
                for w in closed.windows(2) {
                    legs.push(Leg::new(
                        Pose::new(cx + w[1].0, cy + w[1].1, heading(w[0], w[1])),
                        speed,
                    ));
                }
            }
            segmented(shape, start, &legs, speed, dt)
        }
        Shape::DockApproach | Shape::Custom => Err(Error::Reference(format!(
            "{shape} references are built from explicit legs"
        ))),
    }
}

/// Segment-aligned yaw: the heading switches at each corner rather than
/// being interpolated along the leg.
fn segmented(
    shape: Shape,
    start: Pose,
    legs: &[Leg],
    speed: f64,
    dt: f64,
) -> Result<ReferenceTrajectory> {
    let mut poses = vec![(start.x, start.y, start.psi)];
    let mut corners = Vec::new();
    let mut from = start;
    let mut arc = 0.0;
    let mut t = 0.0;
    for leg in legs {
        let dist = from.distance_to(&leg.pose);
        let steps = ((dist / speed) / dt).round().max(1.0) as usize;
        for k in 1..=steps {
            let a = k as f64 / steps as f64;
            poses.push((
                from.x + a * (leg.pose.x - from.x),
                from.y + a * (leg.pose.y - from.y),
                leg.pose.psi,
            ));
        }
        arc += dist;
        t += steps as f64 * dt;
        corners.push(Corner {
            t,
            arc_length: arc,
            x: leg.pose.x,
            y: leg.pose.y,
        });
        from = leg.pose;
    }
    Ok(ReferenceTrajectory::from_poses(
        shape, 0.0, dt, poses, corners,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_period() {
        let r = build_reference(Shape::Circle, 1.5, 0.2, (3.0, 3.0), 1, 0.1).unwrap();
        assert!((r.duration() - 2.0 * PI * 1.5 / 0.2).abs() < 0.05);
        assert!((r.duration() - 47.12).abs() <= 0.05);
        let first = r.samples[0];
        let last = r.samples[r.samples.len() - 1];
        assert!((first[0] - last[0]).abs() < 1e-2 && (first[1] - last[1]).abs() < 1e-2);
        // Tangent-aligned yaw: surge equals the path speed, no sway.
        let mid = r.samples[200];
        assert!((mid[3] - 0.2).abs() < 1e-3 && mid[4].abs() < 1e-3);
    }

    #[test]
    fn square_corners_equally_spaced() {
        let r = build_reference(Shape::Square, 2.0, 0.2, (0.0, 0.0), 1, 0.1).unwrap();
        assert_eq!(r.corners.len(), 4);
        for (i, c) in r.corners.iter().enumerate() {
            assert!((c.arc_length - 2.0 * (i + 1) as f64).abs() < 1e-12);
            assert!((c.t - 10.0 * (i + 1) as f64).abs() < 1e-9);
        }
        assert!((r.duration() - 40.0).abs() < 1e-9);
    }

    fn segments_cross(p1: (f64, f64), p2: (f64, f64), p3: (f64, f64), p4: (f64, f64)) -> bool {
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let d1 = cross(p3, p4, p1);
        let d2 = cross(p3, p4, p2);
        let d3 = cross(p1, p2, p3);
        let d4 = cross(p1, p2, p4);
        d1 * d2 < 0.0 && d3 * d4 < 0.0
    }

    #[test]
    fn hourglass_crosses_itself_once_per_lap() {
        let r = build_reference(Shape::Hourglass, 2.0, 0.2, (3.0, 3.0), 1, 0.1).unwrap();
        let mut pts = vec![(r.samples[0][0], r.samples[0][1])];
        pts.extend(r.corners.iter().map(|c| (c.x, c.y)));
        let segs: Vec<_> = pts.windows(2).map(|w| (w[0], w[1])).collect();
        let mut crossings = Vec::new();
        for i in 0..segs.len() {
            for j in i + 2..segs.len() {
                if i == 0 && j == segs.len() - 1 {
                    continue;
                }
                if segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                    crossings.push((i, j));
                }
            }
        }
        assert_eq!(crossings.len(), 1);
        // ... and the crossing is the waist.
        let mid = r.sample(0.5 * (r.corners[0].t + r.corners[1].t));
        assert!((mid[0] - 3.0).abs() < 1e-9 && (mid[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(build_reference(Shape::Square, 0.0, 0.2, (0.0, 0.0), 1, 0.1).is_err());
        assert!(build_reference(Shape::Circle, 1.0, -0.2, (0.0, 0.0), 1, 0.1).is_err());
    }

    #[test]
    fn sample_holds_outside_range_and_wraps_yaw() {
        let legs = [Leg::new(Pose::new(1.0, 0.0, -3.0), 0.5).with_hold(1.0)];
        let r = ReferenceTrajectory::from_legs(
            Shape::Custom,
            Pose::new(0.0, 0.0, 3.0),
            &legs,
            0.0,
            0.1,
        )
        .unwrap();
        let end = r.sample(100.0);
        assert_eq!((end[0], end[1], end[3]), (1.0, 0.0, 0.0));
        // The short way from 3.0 to -3.0 passes through π.
        let mid = r.sample(1.0);
        assert!(mid[2].abs() > 3.0);
        assert!(r
            .samples
            .windows(2)
            .all(|w| (wrap_angle(w[1][2] - w[0][2])).abs() < 0.2));
    }
}
