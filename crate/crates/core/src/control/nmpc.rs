//! Nonlinear MPC by single shooting.
//!
//! The control sequence `U = (u_0, …, u_{N-1})` is the only decision
//! variable; states are obtained by RK4 rollouts of the vessel model at the
//! control period. The cost
//!
//! ```text
//! Σ_{k<N} ε_qᵀ Q ε_q + Σ_{k<N} ε_uᵀ H ε_u + ε_q(N)ᵀ Q_N ε_q(N)
//! ε_q(k) = q_k − q_ref(k),   ε_u(k) = u_k − u_{k−1},   u_{−1} = last applied
//! ```
//!
//! is a sum of squares, so each SQP iteration uses the Gauss–Newton Hessian
//! built from exact forward sensitivities of the integrator and solves a
//! box-constrained QP; thrust bounds are therefore satisfied exactly. State
//! bounds enter as a quadratic exterior penalty.

use nalgebra::{DMatrix, DVector, Matrix3x4, Matrix6, Matrix6x3, Vector3, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use crate::optim::solve_box_qp;
use crate::vessel::dynamics::{derivative, force_jacobian, state_jacobian};
use crate::vessel::thrusters::{allocation_matrix, apply_allocation};
use crate::vessel::{wrap_angle, HydroParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmpcConfig {
    pub horizon: usize,
    /// Control period, s.
    pub dt: f64,
    pub q: [f64; 6],
    pub h: [f64; 4],
    pub q_terminal: [f64; 6],
    pub q_min: [f64; 6],
    pub q_max: [f64; 6],
    /// Weight of the exterior penalty on state-bound violations.
    pub state_penalty: f64,
    pub u_min: [f64; 4],
    pub u_max: [f64; 4],
    /// Position error below which the tracking loop may stop, m.
    pub position_threshold: f64,
    /// Yaw error below which the tracking loop may stop, rad.
    pub yaw_threshold: f64,
    pub max_iterations: usize,
    pub warm_start: bool,
    /// Stationarity tolerance, relative to `1 + cost`.
    pub tolerance: f64,
}

impl Default for NmpcConfig {
    fn default() -> Self {
        let q = [8000.0, 8000.0, 4000.0, 0.01, 0.01, 0.01];
        Self {
            horizon: 20,
            dt: 0.1,
            q,
            h: [0.01; 4],
            q_terminal: q,
            q_min: [
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
                -1.5,
                -1.5,
                -4.0,
            ],
            q_max: [f64::INFINITY, f64::INFINITY, f64::INFINITY, 1.5, 1.5, 4.0],
            state_penalty: 1e4,
            u_min: [-6.0; 4],
            u_max: [6.0; 4],
            position_threshold: 0.05,
            yaw_threshold: 5f64.to_radians(),
            max_iterations: 20,
            warm_start: true,
            tolerance: 1e-6,
        }
    }
}

impl NmpcConfig {
    /// Default weights with symmetric thrust bounds `±f_max`.
    pub fn with_thrust_limit(f_max: f64) -> Self {
        Self {
            u_min: [-f_max; 4],
            u_max: [f_max; 4],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::config("nmpc.horizon", "must be at least 2"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("nmpc.dt", "must be positive"));
        }
        let positive = |name: &str, w: &[f64]| -> Result<()> {
            if w.iter().all(|x| x.is_finite() && *x > 0.0) {
                Ok(())
            } else {
                Err(Error::config(
                    format!("nmpc.{name}"),
                    "weights must be positive (positive definite)",
                ))
            }
        };
        positive("q", &self.q)?;
        positive("h", &self.h)?;
        positive("q_terminal", &self.q_terminal)?;
        for i in 0..4 {
            if !(self.u_min[i] <= self.u_max[i]) {
                return Err(Error::config(
                    format!("nmpc.u_min[{i}]"),
                    "infeasible control bounds",
                ));
            }
        }
        for i in 0..6 {
            if !(self.q_min[i] <= self.q_max[i]) {
                return Err(Error::config(
                    format!("nmpc.q_min[{i}]"),
                    "infeasible state bounds",
                ));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::config("nmpc.max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// The prediction model for one solve: hydrodynamic parameters at the
/// current expansion and the matching thruster arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    pub params: HydroParams,
    pub arm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached; the best iterate is returned.
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmpcSolution {
    pub controls: Vec<Vector4<f64>>,
    pub predicted: Vec<Vector6<f64>>,
    pub cost: f64,
    pub iterations: usize,
    /// Infinity norm of the projected gradient at the returned point.
    pub stationarity: f64,
    pub status: SolveStatus,
}

impl NmpcSolution {
    pub fn first(&self) -> Vector4<f64> {
        self.controls[0]
    }
}

/// One finite-horizon problem: initial state, reference window, previous
/// command and prediction model.
pub struct ShootingProblem<'a> {
    pub cfg: &'a NmpcConfig,
    pub x0: Vector6<f64>,
    pub refs: &'a [Vector6<f64>],
    pub last_u: Vector4<f64>,
    pub plant: PlantModel,
    e: Matrix3x4<f64>,
    sqrt_q: Vector6<f64>,
    sqrt_qn: Vector6<f64>,
    sqrt_h: Vector4<f64>,
}

impl<'a> ShootingProblem<'a> {
    pub fn new(
        cfg: &'a NmpcConfig,
        x0: Vector6<f64>,
        refs: &'a [Vector6<f64>],
        last_u: Vector4<f64>,
        plant: PlantModel,
    ) -> Result<Self> {
        cfg.validate()?;
        if refs.len() != cfg.horizon + 1 {
            return Err(Error::Reference(format!(
                "reference window has {} states, horizon needs {}",
                refs.len(),
                cfg.horizon + 1
            )));
        }
        plant.params.validate()?;
        Ok(Self {
            cfg,
            x0,
            refs,
            last_u,
            plant,
            e: allocation_matrix(plant.arm),
            sqrt_q: Vector6::from(cfg.q).map(f64::sqrt),
            sqrt_qn: Vector6::from(cfg.q_terminal).map(f64::sqrt),
            sqrt_h: Vector4::from(cfg.h).map(f64::sqrt),
        })
    }

    pub fn dim(&self) -> usize {
        4 * self.cfg.horizon
    }

    fn control(u: &DVector<f64>, k: usize) -> Vector4<f64> {
        Vector4::new(u[4 * k], u[4 * k + 1], u[4 * k + 2], u[4 * k + 3])
    }

    fn tracking_error(&self, q: &Vector6<f64>, k: usize) -> Vector6<f64> {
        let mut e = q - self.refs[k];
        e[2] = wrap_angle(e[2]);
        e
    }

    fn bound_violation(&self, q: &Vector6<f64>) -> Vector6<f64> {
        Vector6::from_fn(|i, _| {
            if q[i] > self.cfg.q_max[i] {
                q[i] - self.cfg.q_max[i]
            } else if q[i] < self.cfg.q_min[i] {
                q[i] - self.cfg.q_min[i]
            } else {
                0.0
            }
        })
    }

    /// Predicted states `q_0 … q_N` under `u`.
    pub fn rollout(&self, u: &DVector<f64>) -> Vec<Vector6<f64>> {
        let mut states = Vec::with_capacity(self.cfg.horizon + 1);
        let mut q = self.x0;
        states.push(q);
        for k in 0..self.cfg.horizon {
            let f = apply_allocation(&Self::control(u, k), self.plant.arm);
            q = crate::vessel::dynamics::rk4(&q, &f, &self.plant.params, self.cfg.dt);
            states.push(q);
        }
        states
    }

    /// Shooting cost of control sequence `u` (stacked, length `4N`).
    pub fn cost(&self, u: &DVector<f64>) -> f64 {
        let states = self.rollout(u);
        let n = self.cfg.horizon;
        let mut total = 0.0;
        for (k, q) in states.iter().enumerate() {
            let w = if k == n { &self.sqrt_qn } else { &self.sqrt_q };
            total += self.tracking_error(q, k).component_mul(w).norm_squared();
            if k > 0 {
                total += self.cfg.state_penalty * self.bound_violation(q).norm_squared();
            }
        }
        let mut prev = self.last_u;
        for k in 0..n {
            let uk = Self::control(u, k);
            total += (uk - prev).component_mul(&self.sqrt_h).norm_squared();
            prev = uk;
        }
        total
    }

    /// Cost, exact gradient and Gauss–Newton Hessian.
    pub fn linearize(&self, u: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = self.cfg.horizon;
        let nu = self.dim();
        let p = &self.plant.params;
        let dt = self.cfg.dt;
        let g_force = force_jacobian(p);

        let mut grad = DVector::zeros(nu);
        let mut hess = DMatrix::zeros(nu, nu);
        let mut cost = 0.0;

        // Sensitivity of the current state to all controls; only the first
        // 4k columns are nonzero at step k.
        let mut sens = DMatrix::<f64>::zeros(6, nu);
        let mut q = self.x0;
        cost += self
            .tracking_error(&q, 0)
            .component_mul(&self.sqrt_q)
            .norm_squared();

        for k in 0..n {
            let uk = Self::control(u, k);
            let f = self.e * uk;
            let (q_next, a, b_force) = rk4_with_jacobians(&q, &f, p, dt, &g_force);
            let b = b_force * self.e;

            let cols = 4 * k;
            if cols > 0 {
                let prev = sens.columns(0, cols).clone_owned();
                sens.columns_mut(0, cols).copy_from(&(a * prev));
            }
            sens.fixed_view_mut::<6, 4>(0, cols).copy_from(&b);
            q = q_next;

            let step = k + 1;
            let active = 4 * step;
            let w = if step == n {
                &self.sqrt_qn
            } else {
                &self.sqrt_q
            };
            let err = self.tracking_error(&q, step);
            let viol = self.bound_violation(&q);
            let pen = self.cfg.state_penalty;
            cost += err.component_mul(w).norm_squared() + pen * viol.norm_squared();

            // Per-component residual weights: tracking (w²) plus penalty on
            // violated components.
            let mut weight = w.component_mul(w);
            let mut weighted_res = err.component_mul(&weight);
            for i in 0..6 {
                if viol[i] != 0.0 {
                    weight[i] += pen;
                    weighted_res[i] += pen * viol[i];
                }
            }
            let s = sens.columns(0, active);
            grad.rows_mut(0, active)
                .gemv_tr(2.0, &s, &weighted_res, 1.0);
            let ws = DMatrix::from_fn(6, active, |i, j| s[(i, j)] * weight[i]);
            hess.view_mut((0, 0), (active, active))
                .gemm_tr(2.0, &s, &ws, 1.0);
        }

        // Control-rate terms: (u_k - u_{k-1})ᵀ H (u_k - u_{k-1}).
        let mut prev = self.last_u;
        for k in 0..n {
            let uk = Self::control(u, k);
            let du = uk - prev;
            for i in 0..4 {
                let h = self.cfg.h[i];
                cost += h * du[i] * du[i];
                let a = 4 * k + i;
                grad[a] += 2.0 * h * du[i];
                hess[(a, a)] += 2.0 * h;
                if k > 0 {
                    let b = a - 4;
                    grad[b] -= 2.0 * h * du[i];
                    hess[(b, b)] += 2.0 * h;
                    hess[(a, b)] -= 2.0 * h;
                    hess[(b, a)] -= 2.0 * h;
                }
            }
            prev = uk;
        }
        (cost, grad, hess)
    }

    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        self.linearize(u).1
    }

    fn bounds(&self) -> (DVector<f64>, DVector<f64>) {
        let nu = self.dim();
        (
            DVector::from_fn(nu, |i, _| self.cfg.u_min[i % 4]),
            DVector::from_fn(nu, |i, _| self.cfg.u_max[i % 4]),
        )
    }

    /// SQP iterations from `guess` (projected onto the bounds).
    pub fn solve(&self, guess: &DVector<f64>) -> NmpcSolution {
        let (lo, hi) = self.bounds();
        let nu = self.dim();
        let mut u = DVector::from_fn(nu, |i, _| guess[i].clamp(lo[i], hi[i]));
        let (mut cost, mut grad, mut hess) = self.linearize(&u);
        let mut iterations = 0;
        let mut status = SolveStatus::IterationCap;
        let stationarity = |u: &DVector<f64>, g: &DVector<f64>| {
            (0..nu)
                .map(|i| (u[i] - (u[i] - g[i]).clamp(lo[i], hi[i])).abs())
                .fold(0.0, f64::max)
        };
        let mut pg = stationarity(&u, &grad);

        while iterations < self.cfg.max_iterations {
            if pg <= self.cfg.tolerance * (1.0 + cost) {
                status = SolveStatus::Converged;
                break;
            }
            iterations += 1;
            let reg = 1e-9 * hess.diagonal().amax().max(1.0);
            for i in 0..nu {
                hess[(i, i)] += reg;
            }
            let dlo = &lo - &u;
            let dhi = &hi - &u;
            let step = solve_box_qp(&hess, &grad, &dlo, &dhi, &DVector::zeros(nu)).x;
            let slope = grad.dot(&step);
            if slope >= 0.0 {
                status = SolveStatus::Converged;
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let raw = &u + alpha * &step;
                let trial = DVector::from_fn(nu, |i, _| raw[i].clamp(lo[i], hi[i]));
                let c = self.cost(&trial);
                if c <= cost + 1e-4 * alpha * slope {
                    accepted = Some((trial, c));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((trial, trial_cost)) = accepted else {
                status = SolveStatus::Converged;
                break;
            };
            let gain = cost - trial_cost;
            u = trial;
            (cost, grad, hess) = self.linearize(&u);
            pg = stationarity(&u, &grad);
            if gain <= 1e-10 * (1.0 + cost) {
                status = SolveStatus::Converged;
                break;
            }
        }
        if status == SolveStatus::IterationCap && pg <= self.cfg.tolerance * (1.0 + cost) {
            status = SolveStatus::Converged;
        }

        let controls = (0..self.cfg.horizon)
            .map(|k| Self::control(&u, k))
            .collect();
        NmpcSolution {
            controls,
            predicted: self.rollout(&u),
            cost,
            iterations,
            stationarity: pg,
            status,
        }
    }
}

/// RK4 step together with `∂q⁺/∂q` and `∂q⁺/∂F`.
fn rk4_with_jacobians(
    q: &Vector6<f64>,
    f: &Vector3<f64>,
    p: &HydroParams,
    dt: f64,
    g: &Matrix6x3<f64>,
) -> (Vector6<f64>, Matrix6<f64>, Matrix6x3<f64>) {
    let id = Matrix6::identity();
    let h2 = 0.5 * dt;

    let k1 = derivative(q, f, p);
    let a1 = state_jacobian(q, p);
    let dk1_q = a1;
    let dk1_f = *g;

    let q2 = q + h2 * k1;
    let k2 = derivative(&q2, f, p);
    let a2 = state_jacobian(&q2, p);
    let dk2_q = a2 * (id + h2 * dk1_q);
    let dk2_f = a2 * (h2 * dk1_f) + g;

    let q3 = q + h2 * k2;
    let k3 = derivative(&q3, f, p);
    let a3 = state_jacobian(&q3, p);
    let dk3_q = a3 * (id + h2 * dk2_q);
    let dk3_f = a3 * (h2 * dk2_f) + g;

    let q4 = q + dt * k3;
    let k4 = derivative(&q4, f, p);
    let a4 = state_jacobian(&q4, p);
    let dk4_q = a4 * (id + dt * dk3_q);
    let dk4_f = a4 * (dt * dk3_f) + g;

    let s = dt / 6.0;
    let next = q + s * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    let jq = id + s * (dk1_q + 2.0 * dk2_q + 2.0 * dk3_q + dk4_q);
    let jf = s * (dk1_f + 2.0 * dk2_f + 2.0 * dk3_f + dk4_f);
    (next, jq, jf)
}

/// Stateful controller holding the previous solution for warm starts.
#[derive(Debug, Clone)]
pub struct Nmpc {
    pub cfg: NmpcConfig,
    previous: Option<Vec<Vector4<f64>>>,
}

impl Nmpc {
    pub fn new(cfg: NmpcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            previous: None,
        })
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }

    /// Solves the horizon problem from `x0`. The warm start shifts the
    /// previous solution by one period; the cold start repeats `last_u`.
    pub fn solve(
        &mut self,
        x0: &Vector6<f64>,
        refs: &[Vector6<f64>],
        last_u: &Vector4<f64>,
        plant: PlantModel,
    ) -> Result<NmpcSolution> {
        let problem = ShootingProblem::new(&self.cfg, *x0, refs, *last_u, plant)?;
        let n = self.cfg.horizon;
        let guess = match (&self.previous, self.cfg.warm_start) {
            (Some(prev), true) if prev.len() == n => {
                let mut g = DVector::zeros(4 * n);
                for k in 0..n {
                    let src = prev[(k + 1).min(n - 1)];
                    g.fixed_rows_mut::<4>(4 * k).copy_from(&src);
                }
                g
            }
            _ => cold_guess(last_u, n),
        };
        let sol = problem.solve(&guess);
        self.previous = Some(sol.controls.clone());
        Ok(sol)
    }
}

pub fn cold_guess(last_u: &Vector4<f64>, horizon: usize) -> DVector<f64> {
    DVector::from_fn(4 * horizon, |i, _| last_u[i % 4])
}

/// Stateless solve from a cold start.
pub fn nmpc_step(
    x0: &Vector6<f64>,
    refs: &[Vector6<f64>],
    last_u: &Vector4<f64>,
    cfg: &NmpcConfig,
    plant: PlantModel,
) -> Result<NmpcSolution> {
    let problem = ShootingProblem::new(cfg, *x0, refs, *last_u, plant)?;
    Ok(problem.solve(&cold_guess(last_u, cfg.horizon)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::ParamPolynomials;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plant(l: f64) -> PlantModel {
        PlantModel {
            params: ParamPolynomials::default().eval(l).unwrap(),
            arm: l + 0.4435,
        }
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        n: usize,
    ) -> (Vector6<f64>, Vec<Vector6<f64>>, Vector4<f64>) {
        let x0 = Vector6::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.5..0.5),
        );
        let vx = rng.gen_range(-0.2..0.2);
        let vy = rng.gen_range(-0.2..0.2);
        let yaw = rng.gen_range(-3.0..3.0);
        let refs = (0..=n)
            .map(|k| Vector6::new(vx * k as f64 * 0.1, vy * k as f64 * 0.1, yaw, 0.0, 0.0, 0.0))
            .collect();
        let last_u = Vector4::from_fn(|_, _| rng.gen_range(-3.0..3.0));
        (x0, refs, last_u)
    }

    #[test]
    fn at_rest_on_reference_needs_no_thrust() {
        let cfg = NmpcConfig::default();
        let x0 = Vector6::new(1.0, 2.0, 0.5, 0.0, 0.0, 0.0);
        let refs = vec![x0; cfg.horizon + 1];
        let sol = nmpc_step(&x0, &refs, &Vector4::zeros(), &cfg, plant(0.0)).unwrap();
        assert!(sol.controls.iter().all(|u| u.amax() <= 1e-3));
        assert!(sol.cost <= 1e-6);
        assert_eq!(sol.status, SolveStatus::Converged);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let cfg = NmpcConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let (x0, refs, last_u) = random_instance(&mut rng, cfg.horizon);
            let problem =
                ShootingProblem::new(&cfg, x0, &refs, last_u, plant(rng.gen_range(0.0..0.5)))
                    .unwrap();
            let u = DVector::from_fn(problem.dim(), |_, _| rng.gen_range(-5.0..5.0));
            let g = problem.gradient(&u);
            let mut fd = DVector::zeros(problem.dim());
            for i in 0..problem.dim() {
                let h = 1e-5;
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += h;
                um[i] -= h;
                fd[i] = (problem.cost(&up) - problem.cost(&um)) / (2.0 * h);
            }
            let rel = (&g - &fd).norm() / fd.norm();
            assert!(rel <= 1e-4, "relative gradient error {rel}");
        }
    }

    #[test]
    fn linearized_cost_matches_rollout_cost() {
        let cfg = NmpcConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x0, refs, last_u) = random_instance(&mut rng, cfg.horizon);
        let problem = ShootingProblem::new(&cfg, x0, &refs, last_u, plant(0.3)).unwrap();
        let u = DVector::from_fn(problem.dim(), |_, _| rng.gen_range(-6.0..6.0));
        let (c, _, _) = problem.linearize(&u);
        assert!((c - problem.cost(&u)).abs() <= 1e-9 * c.max(1.0));
    }

    #[test]
    fn solution_respects_bounds_and_beats_zero_control() {
        let cfg = NmpcConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let (x0, refs, last_u) = random_instance(&mut rng, cfg.horizon);
            let problem = ShootingProblem::new(&cfg, x0, &refs, last_u, plant(0.0)).unwrap();
            let sol = nmpc_step(&x0, &refs, &last_u, &cfg, plant(0.0)).unwrap();
            for u in &sol.controls {
                for i in 0..4 {
                    assert!(u[i] >= cfg.u_min[i] && u[i] <= cfg.u_max[i]);
                }
            }
            let zero = problem.cost(&DVector::zeros(problem.dim()));
            assert!(sol.cost <= zero + 1e-9, "{} > {}", sol.cost, zero);
        }
    }

    #[test]
    fn heavier_rate_penalty_does_not_increase_first_move() {
        let base = NmpcConfig::default();
        let heavy = NmpcConfig {
            h: base.h.map(|h| 100.0 * h),
            ..base.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let (x0, refs, last_u) = random_instance(&mut rng, base.horizon);
            let a = nmpc_step(&x0, &refs, &last_u, &base, plant(0.2)).unwrap();
            let b = nmpc_step(&x0, &refs, &last_u, &heavy, plant(0.2)).unwrap();
            let da = (a.first() - last_u).norm();
            let db = (b.first() - last_u).norm();
            assert!(db <= da + 1e-6, "{db} > {da}");
        }
    }

    #[test]
    fn rejects_bad_config_and_window() {
        let cfg = NmpcConfig {
            horizon: 1,
            ..NmpcConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
        let cfg = NmpcConfig {
            u_min: [7.0; 4],
            ..NmpcConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
        let cfg = NmpcConfig::default();
        let refs = vec![Vector6::zeros(); 3];
        assert!(nmpc_step(
            &Vector6::zeros(),
            &refs,
            &Vector4::zeros(),
            &cfg,
            plant(0.0)
        )
        .is_err());
    }
}
