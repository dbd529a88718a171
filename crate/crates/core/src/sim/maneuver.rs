//! Open-loop excitation maneuvers for identification.

use nalgebra::{Vector4, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::sysid::log::{ManeuverKind, ManeuverLog};
use crate::vessel::dynamics::rk4;
use crate::vessel::thrusters::apply_allocation;
use crate::vessel::{ParamPolynomials, MAX_EXPANSION};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManeuverOptions {
    pub dt: f64,
    /// Thrust level of the program, N.
    pub thrust: f64,
    /// Fraction of the duration with thrust on; the rest is free decay.
    pub on_fraction: f64,
    /// Additive Gaussian velocity noise, as a fraction of each channel's RMS.
    pub noise: f64,
    pub arm_offset: f64,
}

impl Default for ManeuverOptions {
    fn default() -> Self {
        Self {
            dt: 0.02,
            thrust: 3.0,
            on_fraction: 0.6,
            noise: 0.0,
            arm_offset: 0.4435,
        }
    }
}

/// Per-thruster command of a program while thrust is on. The spin pattern
/// cancels both force rows of the allocation and leaves a pure moment.
pub fn program(kind: ManeuverKind, f: f64) -> Vector4<f64> {
    match kind {
        ManeuverKind::Straight => Vector4::new(0.0, f, 0.0, f),
        ManeuverKind::Circle => Vector4::new(0.0, 0.3 * f, 0.0, f),
        ManeuverKind::Spin => Vector4::new(-f, -f, f, f),
    }
}

/// Simulates one maneuver from rest at the origin under the true parameter
/// functions and logs every integration step.
pub fn generate_maneuver_logs(
    truth: &ParamPolynomials,
    kind: ManeuverKind,
    l: f64,
    duration: f64,
    seed: u64,
    opts: &ManeuverOptions,
) -> Result<ManeuverLog> {
    if !(0.0..=MAX_EXPANSION).contains(&l) {
        return Err(Error::Range {
            what: "expansion",
            value: l,
            min: 0.0,
            max: MAX_EXPANSION,
        });
    }
    if !(duration > 0.0 && opts.dt > 0.0) {
        return Err(Error::config(
            "maneuver.duration",
            "duration and dt must be positive",
        ));
    }
    let params = truth.eval(l)?;
    let arm = l + opts.arm_offset;
    let steps = (duration / opts.dt).round() as usize;
    let on_steps = (opts.on_fraction * steps as f64).round() as usize;
    let thrust = program(kind, opts.thrust);

    let mut q = Vector6::zeros();
    let mut log = ManeuverLog {
        kind,
        expansion: l,
        dt: opts.dt,
        t: Vec::with_capacity(steps + 1),
        q: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
    };
    for k in 0..=steps {
        let u = if k < on_steps {
            thrust
        } else {
            Vector4::zeros()
        };
        log.t.push(k as f64 * opts.dt);
        log.q.push(q.into());
        log.u.push(u.into());
        if k < steps {
            q = rk4(&q, &apply_allocation(&u, arm), &params, opts.dt);
        }
    }
    if !q.iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical {
            component: "maneuver state",
        });
    }

    if opts.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for j in 3..6 {
            let rms = (log.q.iter().map(|q| q[j] * q[j]).sum::<f64>() / log.q.len() as f64).sqrt();
            if rms == 0.0 {
                continue;
            }
            let normal = Normal::new(0.0, opts.noise * rms)
                .map_err(|e| Error::config("maneuver.noise", e.to_string()))?;
            for q in log.q.iter_mut() {
                q[j] += normal.sample(&mut rng);
            }
        }
    }
    Ok(log)
}

/// Steady turning radius at the end of the thrust phase, m.
pub fn turning_radius(log: &ManeuverLog, on_fraction: f64) -> f64 {
    let k = ((on_fraction * (log.len() - 1) as f64).round() as usize).saturating_sub(1);
    let q = log.q[k];
    q[3].hypot(q[4]) / q[5].abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::thrusters::apply_allocation;

    fn truth() -> ParamPolynomials {
        ParamPolynomials::default()
    }

    #[test]
    fn spin_program_has_no_net_force() {
        let opts = ManeuverOptions::default();
        for l in [0.0, 0.25, 0.5] {
            let log =
                generate_maneuver_logs(&truth(), ManeuverKind::Spin, l, 5.0, 0, &opts).unwrap();
            for u in &log.u {
                let f = apply_allocation(&Vector4::from(*u), l + opts.arm_offset);
                assert_eq!((f.x, f.y), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn straight_run_stays_on_its_line() {
        let log = generate_maneuver_logs(
            &truth(),
            ManeuverKind::Straight,
            0.3,
            20.0,
            0,
            &ManeuverOptions::default(),
        )
        .unwrap();
        assert!(log.q.iter().all(|q| q[1].abs() < 1e-9));
        assert!(log.q.last().unwrap()[0] > 1.0);
    }

    #[test]
    fn circle_radius_is_seed_independent_without_noise() {
        let opts = ManeuverOptions {
            on_fraction: 1.0,
            ..ManeuverOptions::default()
        };
        let a =
            generate_maneuver_logs(&truth(), ManeuverKind::Circle, 0.0, 60.0, 1, &opts).unwrap();
        let b =
            generate_maneuver_logs(&truth(), ManeuverKind::Circle, 0.0, 60.0, 2, &opts).unwrap();
        let ra = turning_radius(&a, 1.0);
        assert_eq!(ra, turning_radius(&b, 1.0));
        // Steady: radius barely changes over the last ten seconds.
        let earlier = a.q[a.len() - 500];
        let r_early = earlier[3].hypot(earlier[4]) / earlier[5].abs();
        assert!((ra - r_early).abs() < 1e-6 * ra, "{ra} {r_early}");
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let clean = ManeuverOptions::default();
        let noisy = ManeuverOptions {
            noise: 0.01,
            ..clean
        };
        let c =
            generate_maneuver_logs(&truth(), ManeuverKind::Straight, 0.0, 20.0, 0, &clean).unwrap();
        let a =
            generate_maneuver_logs(&truth(), ManeuverKind::Straight, 0.0, 20.0, 4, &noisy).unwrap();
        let b =
            generate_maneuver_logs(&truth(), ManeuverKind::Straight, 0.0, 20.0, 4, &noisy).unwrap();
        assert_eq!(a, b);
        let rms = (c.q.iter().map(|q| q[3] * q[3]).sum::<f64>() / c.len() as f64).sqrt();
        let err =
            (a.q.iter()
                .zip(&c.q)
                .map(|(a, c)| (a[3] - c[3]).powi(2))
                .sum::<f64>()
                / c.len() as f64)
                .sqrt();
        assert!((err / rms - 0.01).abs() < 0.002, "{}", err / rms);
        // Poses are untouched.
        assert!(a.q.iter().zip(&c.q).all(|(a, c)| a[0] == c[0]));
    }

    #[test]
    fn rejects_out_of_range_expansion() {
        assert!(generate_maneuver_logs(
            &truth(),
            ManeuverKind::Spin,
            0.6,
            5.0,
            0,
            &ManeuverOptions::default()
        )
        .is_err());
    }
}
