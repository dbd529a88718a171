//! Bounded nonlinear least squares by a Levenberg–Marquardt trust region.
//!
//! Each iteration builds a forward-difference Jacobian, solves the damped
//! Gauss–Newton subproblem restricted to the box with [`solve_box_qp`], and
//! adapts the damping from the ratio of actual to predicted reduction.
//! Variables are scaled by the magnitude of the starting point so that
//! parameters of very different size share one damping constant.

use nalgebra::{DMatrix, DVector};

use super::box_qp::solve_box_qp;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LsqOptions {
    pub max_iter: usize,
    /// Relative cost reduction below which an accepted step ends the run.
    pub ftol: f64,
    /// Relative step size below which the run ends.
    pub xtol: f64,
    /// Scaled projected-gradient tolerance.
    pub gtol: f64,
    /// Relative forward-difference step.
    pub fd_step: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            ftol: 1e-14,
            xtol: 1e-12,
            gtol: 1e-14,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqReport {
    pub x: Vec<f64>,
    /// `½ Σ r²` at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Per-variable flags for solutions resting on a bound.
    pub at_lower: Vec<bool>,
    pub at_upper: Vec<bool>,
}

impl LsqReport {
    pub fn any_active_bound(&self) -> bool {
        self.at_lower.iter().chain(&self.at_upper).any(|&b| b)
    }
}

/// Minimizes `½‖r(x)‖²` over `lo ≤ x ≤ hi`. The residual returns `None`
/// when the model diverges; such points are treated as infinitely costly.
pub fn minimize_bounded<F>(
    residual: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &LsqOptions,
) -> Result<LsqReport>
where
    F: Fn(&[f64]) -> Option<DVector<f64>>,
{
    let n = x0.len();
    if lo.len() != n || hi.len() != n {
        return Err(Error::Identification(
            "bound dimensions differ from start point".into(),
        ));
    }
    if (0..n).any(|i| !(lo[i] <= hi[i])) {
        return Err(Error::Identification(
            "lower bound above upper bound".into(),
        ));
    }
    let scale: Vec<f64> = x0.iter().map(|v| v.abs().max(1e-8)).collect();
    let to_x = |z: &DVector<f64>| -> Vec<f64> { (0..n).map(|i| z[i] * scale[i]).collect() };
    let zlo = DVector::from_fn(n, |i, _| lo[i] / scale[i]);
    let zhi = DVector::from_fn(n, |i, _| hi[i] / scale[i]);

    let mut z = DVector::from_fn(n, |i, _| (x0[i] / scale[i]).clamp(zlo[i], zhi[i]));
    let mut evaluations = 1;
    let mut r = residual(&to_x(&z))
        .ok_or_else(|| Error::Identification("model diverges at the starting point".into()))?;
    let mut cost = 0.5 * r.norm_squared();
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;

        let m = r.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = opts.fd_step * z[k].abs().max(1.0);
            let mut zp = z.clone();
            let step = if zp[k] + h <= zhi[k] { h } else { -h };
            zp[k] += step;
            evaluations += 1;
            let rp = residual(&to_x(&zp))
                .ok_or_else(|| Error::Identification("model diverges while differencing".into()))?;
            jac.set_column(k, &((rp - &r) / step));
        }
        let grad = jac.tr_mul(&r);
        let pg = (0..n)
            .map(|i| (z[i] - (z[i] - grad[i]).clamp(zlo[i], zhi[i])).abs())
            .fold(0.0, f64::max);
        if pg <= opts.gtol * (1.0 + cost) {
            converged = true;
            break;
        }
        let jtj = jac.tr_mul(&jac);

        let mut accepted = false;
        for _ in 0..30 {
            let damped = &jtj + DMatrix::from_diagonal(&jtj.diagonal().map(|d| mu * d.max(1e-12)));
            let dlo = &zlo - &z;
            let dhi = &zhi - &z;
            let step = solve_box_qp(&damped, &grad, &dlo, &dhi, &DVector::zeros(n)).x;
            let predicted = -(grad.dot(&step) + 0.5 * step.dot(&(&jtj * &step)));
            let trial = DVector::from_fn(n, |i, _| (z[i] + step[i]).clamp(zlo[i], zhi[i]));
            evaluations += 1;
            let trial_r = residual(&to_x(&trial));
            let trial_cost = trial_r
                .as_ref()
                .map_or(f64::INFINITY, |tr| 0.5 * tr.norm_squared());
            let actual = cost - trial_cost;
            let rho = if predicted > 0.0 {
                actual / predicted
            } else {
                -1.0
            };

            if rho > 1e-4 && trial_cost.is_finite() {
                let small_step = step.amax() <= opts.xtol * (z.amax() + opts.xtol);
                let small_gain = actual <= opts.ftol * cost;
                z = trial;
                r = trial_r.expect("finite cost implies residual");
                cost = trial_cost;
                if rho > 0.75 {
                    mu = (mu / 3.0).max(1e-12);
                } else if rho < 0.25 {
                    mu *= 2.0;
                }
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
            if step.amax() <= opts.xtol * (z.amax() + opts.xtol) {
                break;
            }
        }
        if !accepted {
            // No descent possible at machine precision: stationary.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let x = to_x(&z);
    let at_lower = (0..n)
        .map(|i| x[i] <= lo[i] * (1.0 + 1e-9) + 1e-300)
        .collect();
    let at_upper = (0..n).map(|i| x[i] >= hi[i] * (1.0 - 1e-9)).collect();
    Ok(LsqReport {
        x,
        cost,
        iterations,
        evaluations,
        converged,
        at_lower,
        at_upper,
    })
}
