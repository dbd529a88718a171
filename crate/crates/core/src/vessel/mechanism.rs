//! Scissor-linkage kinematics of the deployable outrigger mechanism.
//!
//! Joint `P0` sits on the hull, `P4` carries the outrigger. The servo angle
//! `θ1` fixes the remaining rod angles through the closure relations, and the
//! expansion length is the travel of `P4` beyond its most retracted position.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TABLE_SIZE: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub rod_lengths: [f64; 4],
    pub y_p0: f64,
    pub y_p4: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self {
            rod_lengths: [0.19; 4],
            y_p0: 0.0,
            y_p4: 0.0,
            theta_min: 0.0,
            theta_max: 70f64.to_radians(),
        }
    }
}

/// Validated mechanism geometry with its precomputed `θ1 → l` table.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismGeometry {
    spec: GeometrySpec,
    x_retract: f64,
    /// `(θ1, l)` samples, θ1 ascending, l strictly descending.
    table: Vec<(f64, f64)>,
}

impl Default for MechanismGeometry {
    fn default() -> Self {
        Self::new(GeometrySpec::default()).expect("default geometry is consistent")
    }
}

impl MechanismGeometry {
    pub fn new(spec: GeometrySpec) -> Result<Self> {
        if spec
            .rod_lengths
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(Error::Geometry(format!(
                "rod lengths must be positive, got {:?}",
                spec.rod_lengths
            )));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(0.0 <= spec.theta_min && spec.theta_min < spec.theta_max && spec.theta_max < half_pi) {
            return Err(Error::Geometry(format!(
                "need 0 <= theta_min < theta_max < pi/2, got [{}, {}]",
                spec.theta_min, spec.theta_max
            )));
        }

        let mut samples = Vec::with_capacity(TABLE_SIZE);
        for i in 0..TABLE_SIZE {
            let theta = if i == TABLE_SIZE - 1 {
                spec.theta_max
            } else {
                spec.theta_min
                    + (spec.theta_max - spec.theta_min) * i as f64 / (TABLE_SIZE - 1) as f64
            };
            samples.push((theta, x_p4(&spec, theta)?));
        }

        let (imin, &(_, mut x_retract)) = samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("table is non-empty");
        if imin != 0 && imin != TABLE_SIZE - 1 {
            let lo = samples[imin - 1].0;
            let hi = samples[imin + 1].0;
            x_retract = x_retract.min(golden_min(
                |t| x_p4(&spec, t).unwrap_or(f64::INFINITY),
                lo,
                hi,
            ));
        }

        let table: Vec<(f64, f64)> = samples.iter().map(|&(t, x)| (t, x - x_retract)).collect();
        if table.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(Error::Geometry(
                "expansion is not strictly decreasing in theta1 over the configured range".into(),
            ));
        }
        Ok(Self {
            spec,
            x_retract,
            table,
        })
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    /// The most retracted position of `P4`.
    pub fn x_retract(&self) -> f64 {
        self.x_retract
    }

    /// Largest achievable expansion, reached at `theta_min`.
    pub fn max_expansion(&self) -> f64 {
        self.table[0].1
    }

    /// Returns `(x_P4, l)` for servo angle `theta1`.
    pub fn forward(&self, theta1: f64) -> Result<(f64, f64)> {
        if !(self.spec.theta_min..=self.spec.theta_max).contains(&theta1) {
            return Err(Error::Range {
                what: "theta1",
                value: theta1,
                min: self.spec.theta_min,
                max: self.spec.theta_max,
            });
        }
        let x = x_p4(&self.spec, theta1)?;
        Ok((x, (x - self.x_retract).max(0.0)))
    }

    /// Servo angle producing expansion `l`, by bisection on the forward map.
    pub fn inverse(&self, l: f64) -> Result<f64> {
        let l_max = self.max_expansion();
        if !(0.0..=l_max).contains(&l) {
            return Err(Error::Range {
                what: "expansion",
                value: l,
                min: 0.0,
                max: l_max,
            });
        }
        if l == 0.0 {
            return Ok(self.spec.theta_max);
        }
        if l == l_max {
            return Ok(self.spec.theta_min);
        }
        // First sample whose expansion drops to l or below.
        let k = self.table.partition_point(|&(_, e)| e > l);
        let (mut lo, mut hi) = (self.table[k - 1].0, self.table[k].0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.forward(mid)?.1 > l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Position of the outer joint for a given servo angle.
fn x_p4(spec: &GeometrySpec, theta1: f64) -> Result<f64> {
    let [l1, l2, l3, l4] = spec.rod_lengths;
    let (s1, c1) = theta1.sin_cos();
    let a2 = l1 / l2 * s1 + spec.y_p0 / l2;
    let a4 = -l1 * l3 / (l2 * l4) * s1 + spec.y_p0 / l2 + spec.y_p4 / l4;
    for (name, arg) in [("theta2", a2), ("theta4", a4)] {
        if !(-1.0..=1.0).contains(&arg) {
            return Err(Error::Geometry(format!(
                "arcsine argument for {name} is {arg} at theta1 = {theta1}"
            )));
        }
    }
    let theta2 = -a2.asin();
    let theta4 = a4.asin();
    Ok(l1 * c1 + (l2 + l3) * theta2.cos() + l4 * theta4.cos())
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-14 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    f(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retraction_limit_gives_zero_expansion() {
        let g = MechanismGeometry::default();
        let (x, l) = g.forward(70f64.to_radians()).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(x, g.x_retract());
    }

    #[test]
    fn forward_matches_closed_form_for_equal_rods() {
        // With equal rods and zero offsets every rod mirrors theta1, so
        // x_P4 = 4 * 0.19 * cos(theta1).
        let g = MechanismGeometry::default();
        let retract = 0.76 * 70f64.to_radians().cos();
        for deg in [0.0f64, 10.0, 45.0, 69.0] {
            let (x, l) = g.forward(deg.to_radians()).unwrap();
            let expect = 0.76 * deg.to_radians().cos();
            assert!((x - expect).abs() < 1e-12);
            assert!((l - (expect - retract)).abs() < 1e-12);
        }
        assert!((g.forward(0.0).unwrap().1 - 0.500064691).abs() < 1e-8);
        assert!((g.forward(45f64.to_radians()).unwrap().1 - 0.277465845).abs() < 1e-8);
    }

    #[test]
    fn inverse_hits_boundaries() {
        let g = MechanismGeometry::default();
        assert_eq!(g.inverse(0.0).unwrap(), 70f64.to_radians());
        assert_eq!(g.inverse(g.max_expansion()).unwrap(), 0.0);
        let t = g.inverse(0.5).unwrap();
        assert!(t > 0.0 && t < 0.02);
        assert!(matches!(g.inverse(0.6), Err(Error::Range { .. })));
        assert!(matches!(g.inverse(-1e-9), Err(Error::Range { .. })));
    }

    #[test]
    fn inverse_round_trips_over_range() {
        let g = MechanismGeometry::default();
        let (lo, hi) = (0.0, 70f64.to_radians());
        for i in 0..50 {
            let theta = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
            let l = g.forward(theta).unwrap().1;
            let back = g.inverse(l).unwrap();
            assert!((back - theta).abs() < 1e-5, "theta {theta} -> {back}");
            assert!((g.forward(back).unwrap().1 - l).abs() <= 1e-6);
        }
    }

    #[test]
    fn forward_strictly_decreasing() {
        let g = MechanismGeometry::default();
        let mut prev = f64::INFINITY;
        for i in 0..=700 {
            let l = g.forward((i as f64 * 0.1).to_radians()).unwrap().1;
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn rejects_arcsine_domain_violation() {
        let spec = GeometrySpec {
            rod_lengths: [0.3, 0.1, 0.19, 0.19],
            ..GeometrySpec::default()
        };
        assert!(matches!(
            MechanismGeometry::new(spec),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn rejects_bad_angle_range() {
        let spec = GeometrySpec {
            theta_max: 1.6,
            ..GeometrySpec::default()
        };
        assert!(matches!(
            MechanismGeometry::new(spec),
            Err(Error::Geometry(_))
        ));
    }
}
