//! Replay-based identification at one expansion length.
//!
//! A candidate parameter set is scored by replaying each log's thrust
//! sequence through the model from the log's first state and comparing the
//! simulated body velocities with the logged ones. The symmetric ties
//! `m1 = m2`, `Xu = Yv` are enforced by searching over the reduced vector
//! `(m12, m3, Xuv, Nr)`.

use nalgebra::{DVector, Vector3, Vector4, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::log::ManeuverLog;
use crate::optim::{minimize_bounded, LsqOptions};
use crate::vessel::dynamics::rk4;
use crate::vessel::thrusters::apply_allocation;
use crate::vessel::HydroParams;
use crate::{Error, Result};

/// Rigid-body starting guess: 42 kg hull, drag 15, yaw terms scaled by a
/// 0.4 m radius of gyration.
pub fn rigid_body_guess() -> [f64; 4] {
    let mass = 42.0;
    let drag = 15.0;
    let radius2 = 0.4 * 0.4;
    [mass, mass * radius2, drag, drag * radius2]
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationProblem {
    pub logs: Vec<ManeuverLog>,
    /// Diagonal of the velocity-error weight, applied to `(u, v, r)`.
    pub weights: [f64; 3],
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub guess: [f64; 4],
    /// Thruster arm at zero expansion; the log's expansion is added.
    pub arm_offset: f64,
    pub starts: usize,
    /// Relative jitter of the extra starts around the guess.
    pub jitter: f64,
    pub seed: u64,
}

impl IdentificationProblem {
    /// Default weights `(1, 1, 0.25)`, bounds `[0.2×, 5×]` of the rigid-body
    /// guess and five starts.
    pub fn new(logs: Vec<ManeuverLog>) -> Self {
        let guess = rigid_body_guess();
        Self {
            logs,
            weights: [1.0, 1.0, 0.25],
            lower: guess.map(|g| 0.2 * g),
            upper: guess.map(|g| 5.0 * g),
            guess,
            arm_offset: 0.4435,
            starts: 5,
            jitter: 0.3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.logs.is_empty() {
            return Err(Error::Identification("no maneuver logs".into()));
        }
        for log in &self.logs {
            log.validate()?;
        }
        if self.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::config("sysid.weights", "must be positive"));
        }
        for i in 0..4 {
            if !(0.0 < self.lower[i]
                && self.lower[i] <= self.guess[i]
                && self.guess[i] <= self.upper[i])
            {
                return Err(Error::config(
                    format!("sysid.bounds[{i}]"),
                    "need 0 < lower <= guess <= upper",
                ));
            }
        }
        if self.starts == 0 {
            return Err(Error::config("sysid.starts", "need at least one start"));
        }
        Ok(())
    }

    fn arm(&self, log: &ManeuverLog) -> f64 {
        log.expansion + self.arm_offset
    }
}

/// Simulated body velocities under `params` with zero-order-hold thrust, or
/// `None` when the replay diverges.
pub fn simulate_candidate(
    log: &ManeuverLog,
    params: &HydroParams,
    arm: f64,
) -> Option<Vec<[f64; 3]>> {
    if params.validate().is_err() || log.is_empty() {
        return None;
    }
    let mut q = Vector6::from(log.q[0]);
    let mut out = Vec::with_capacity(log.len());
    out.push([q[3], q[4], q[5]]);
    for k in 0..log.len() - 1 {
        let f: Vector3<f64> = apply_allocation(&Vector4::from(log.u[k]), arm);
        q = rk4(&q, &f, params, log.dt);
        if !q.iter().all(|x| x.is_finite()) {
            return None;
        }
        out.push([q[3], q[4], q[5]]);
    }
    Some(out)
}

/// Stacked weighted residuals `√W·(v_e − v_s)` over all logs and samples.
pub fn residuals(problem: &IdentificationProblem, params: &HydroParams) -> Option<DVector<f64>> {
    let sw = problem.weights.map(f64::sqrt);
    let total: usize = problem.logs.iter().map(|l| 3 * l.len()).sum();
    let mut r = DVector::zeros(total);
    let mut at = 0;
    for log in &problem.logs {
        let sim = simulate_candidate(log, params, problem.arm(log))?;
        for (q, s) in log.q.iter().zip(&sim) {
            for j in 0..3 {
                r[at] = sw[j] * (q[3 + j] - s[j]);
                at += 1;
            }
        }
    }
    Some(r)
}

/// `Σ_t εᵀ W ε` over all logs; `+∞` when the replay diverges.
pub fn velocity_error_cost(problem: &IdentificationProblem, params: &HydroParams) -> f64 {
    match residuals(problem, params) {
        Some(r) => r.norm_squared(),
        None => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub start: [f64; 4],
    pub solution: [f64; 4],
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identified {
    pub params: HydroParams,
    /// Velocity-error cost at the returned parameters.
    pub residual: f64,
    /// The solution rests on at least one bound.
    pub active_bound: bool,
    pub starts: Vec<StartReport>,
}

fn start_points(problem: &IdentificationProblem) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut points = vec![problem.guess];
    for _ in 1..problem.starts {
        let mut p = problem.guess;
        for (i, v) in p.iter_mut().enumerate() {
            *v = (*v * (1.0 + rng.gen_range(-problem.jitter..=problem.jitter)))
                .clamp(problem.lower[i], problem.upper[i]);
        }
        points.push(p);
    }
    points
}

/// Bounded multi-start minimization of [`velocity_error_cost`]. Starts run
/// in parallel; the result does not depend on scheduling.
pub fn identify_at_length(problem: &IdentificationProblem) -> Result<Identified> {
    problem.validate()?;
    let opts = LsqOptions {
        max_iter: 100,
        ..LsqOptions::default()
    };
    let outcomes: Vec<_> = start_points(problem)
        .into_par_iter()
        .map(|x0| {
            let residual = |x: &[f64]| {
                residuals(
                    problem,
                    &HydroParams::from_reduced(&[x[0], x[1], x[2], x[3]]),
                )
            };
            (
                x0,
                minimize_bounded(residual, &x0, &problem.lower, &problem.upper, &opts),
            )
        })
        .collect();

    let mut reports = Vec::new();
    let mut best: Option<(f64, [f64; 4], bool)> = None;
    let mut errors = Vec::new();
    for (x0, outcome) in outcomes {
        match outcome {
            Ok(rep) => {
                let x = [rep.x[0], rep.x[1], rep.x[2], rep.x[3]];
                let cost = 2.0 * rep.cost;
                reports.push(StartReport {
                    start: x0,
                    solution: x,
                    cost,
                    iterations: rep.iterations,
                    converged: rep.converged,
                });
                if cost.is_finite() && best.is_none_or(|b| cost < b.0) {
                    best = Some((cost, x, rep.any_active_bound()));
                }
            }
            Err(e) => errors.push(format!("start {x0:?}: {e}")),
        }
    }
    let Some((residual, x, active_bound)) = best else {
        return Err(Error::Identification(format!(
            "all {} starts diverged at l = {}: {}",
            problem.starts,
            problem.logs[0].expansion,
            errors.join("; ")
        )));
    };
    Ok(Identified {
        params: HydroParams::from_reduced(&x),
        residual,
        active_bound,
        starts: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::maneuver::{generate_maneuver_logs, ManeuverOptions};
    use crate::sysid::log::ManeuverKind;
    use crate::vessel::ParamPolynomials;

    fn logs(l: f64, noise: f64, seed: u64) -> Vec<ManeuverLog> {
        let opts = ManeuverOptions {
            noise,
            ..ManeuverOptions::default()
        };
        ManeuverKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                generate_maneuver_logs(
                    &ParamPolynomials::default(),
                    k,
                    l,
                    20.0,
                    seed * 3 + i as u64,
                    &opts,
                )
                .unwrap()
            })
            .collect()
    }

    fn truth(l: f64) -> HydroParams {
        ParamPolynomials::default().eval(l).unwrap()
    }

    #[test]
    fn truth_replays_exactly() {
        let problem = IdentificationProblem::new(logs(0.2, 0.0, 0));
        for log in &problem.logs {
            let sim = simulate_candidate(log, &truth(0.2), 0.6435).unwrap();
            for (s, q) in sim.iter().zip(&log.q) {
                for j in 0..3 {
                    assert!((s[j] - q[3 + j]).abs() <= 1e-8);
                }
            }
        }
        assert!(velocity_error_cost(&problem, &truth(0.2)) <= 1e-10);
    }

    #[test]
    fn more_drag_slows_the_straight_run() {
        let log = &logs(0.0, 0.0, 0)[0];
        let p = truth(0.0);
        let heavy = HydroParams {
            xu: 2.0 * p.xu,
            ..p
        };
        let on_end = (0.6 * (log.len() - 1) as f64) as usize;
        let a = simulate_candidate(log, &p, 0.4435).unwrap();
        let b = simulate_candidate(log, &heavy, 0.4435).unwrap();
        assert!(b[on_end][0] < a[on_end][0]);
    }

    #[test]
    fn huge_inertia_stops_the_spin() {
        let log = &logs(0.0, 0.0, 0)[2];
        let p = truth(0.0);
        let rigid = HydroParams { m3: 1e9, ..p };
        let sim = simulate_candidate(log, &rigid, 0.4435).unwrap();
        assert!(sim.iter().all(|v| v[2].abs() < 1e-6));
    }

    #[test]
    fn cost_is_linear_in_weights_and_order_free() {
        let mut problem = IdentificationProblem::new(logs(0.1, 0.0, 0));
        let p = HydroParams::from_reduced(&truth(0.1).reduced().map(|v| 1.1 * v));
        problem.weights = [1.0; 3];
        let c1 = velocity_error_cost(&problem, &p);
        assert!(c1 > 0.0);
        problem.weights = [2.0; 3];
        let c2 = velocity_error_cost(&problem, &p);
        assert!((c2 - 2.0 * c1).abs() <= 1e-12 * c2);
        problem.logs.reverse();
        let c3 = velocity_error_cost(&problem, &p);
        assert!((c3 - c2).abs() <= 1e-12 * c2);
    }

    #[test]
    fn split_log_costs_the_same_at_truth() {
        let full = logs(0.3, 0.0, 0);
        let (a, b) = full[1].split_at(400);
        let whole = IdentificationProblem::new(vec![full[1].clone()]);
        let split = IdentificationProblem::new(vec![a, b]);
        assert!(velocity_error_cost(&whole, &truth(0.3)) <= 1e-12);
        assert!(velocity_error_cost(&split, &truth(0.3)) <= 1e-12);
    }

    #[test]
    fn recovers_truth_from_clean_logs() {
        let problem = IdentificationProblem::new(logs(0.0, 0.0, 0));
        let id = identify_at_length(&problem).unwrap();
        let t = truth(0.0).reduced();
        let got = id.params.reduced();
        for i in 0..4 {
            assert!(
                (got[i] - t[i]).abs() <= 0.01 * t[i],
                "{i}: {} vs {}",
                got[i],
                t[i]
            );
        }
        assert!(!id.active_bound);
        assert_eq!(id.starts.len(), 5);
    }

    #[test]
    fn bounds_excluding_truth_leave_an_active_bound() {
        let mut problem = IdentificationProblem::new(logs(0.0, 0.0, 0));
        // Truth drag is about 19.8; cap it at 12.
        problem.upper[2] = 12.0;
        problem.guess[2] = 10.0;
        let id = identify_at_length(&problem).unwrap();
        assert!(id.active_bound);
        assert!((id.params.xu - 12.0).abs() < 1e-9);
    }

    #[test]
    fn weight_scale_does_not_move_the_argmin() {
        let mut problem = IdentificationProblem::new(logs(0.4, 0.01, 7));
        problem.starts = 2;
        let a = identify_at_length(&problem).unwrap();
        problem.weights = problem.weights.map(|w| 10.0 * w);
        let b = identify_at_length(&problem).unwrap();
        for (x, y) in a.params.reduced().iter().zip(b.params.reduced()) {
            assert!((x - y).abs() <= 1e-5 * x, "{x} {y}");
        }
    }

    #[test]
    fn invalid_problems_rejected() {
        let mut problem = IdentificationProblem::new(logs(0.0, 0.0, 0));
        problem.weights[1] = 0.0;
        assert!(identify_at_length(&problem).is_err());
        let problem = IdentificationProblem::new(Vec::new());
        assert!(identify_at_length(&problem).is_err());
    }
}
