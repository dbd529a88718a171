//! Projected-Newton solver for strictly convex box-constrained QPs
//!
//! ```text
//! min ½ xᵀ H x + gᵀ x   s.t.  lo ≤ x ≤ hi
//! ```

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct BoxQpOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_ITER: usize = 100;

/// `H` must be symmetric positive definite. Starts from `x0` projected onto
/// the box.
pub fn solve_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    x0: &DVector<f64>,
) -> BoxQpOutcome {
    let n = g.len();
    let project = |x: &DVector<f64>| DVector::from_fn(n, |i, _| x[i].clamp(lo[i], hi[i]));
    let objective = |x: &DVector<f64>| 0.5 * x.dot(&(h * x)) + g.dot(x);

    let mut x = project(x0);
    let mut fx = objective(&x);
    let scale = h.diagonal().amax().max(1.0);
    let tol = 1e-12 * scale;

    for it in 0..MAX_ITER {
        let grad = h * &x + g;
        let free: Vec<usize> = (0..n)
            .filter(|&i| {
                let at_lo = x[i] <= lo[i] && grad[i] > 0.0;
                let at_hi = x[i] >= hi[i] && grad[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();

        let pg = (0..n)
            .map(|i| (x[i] - (x[i] - grad[i]).clamp(lo[i], hi[i])).abs())
            .fold(0.0, f64::max);
        if pg <= tol * (1.0 + x.amax()) || free.is_empty() {
            return BoxQpOutcome {
                x,
                iterations: it,
                converged: true,
            };
        }

        let m = free.len();
        let hff = DMatrix::from_fn(m, m, |a, b| h[(free[a], free[b])]);
        let rhs = DVector::from_fn(m, |a, _| -grad[free[a]]);
        let step = match hff.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => rhs,
        };
        let mut dir = DVector::zeros(n);
        for (a, &i) in free.iter().enumerate() {
            dir[i] = step[a];
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = project(&(&x + alpha * &dir));
            let ft = objective(&trial);
            if ft <= fx + 1e-4 * grad.dot(&(&trial - &x)) {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                let moved = (&trial - &x).amax();
                x = trial;
                let improvement = fx - ft;
                fx = ft;
                if moved <= 1e-15 * (1.0 + x.amax()) || improvement <= 1e-16 * fx.abs().max(1e-300)
                {
                    return BoxQpOutcome {
                        x,
                        iterations: it + 1,
                        converged: true,
                    };
                }
            }
            None => {
                return BoxQpOutcome {
                    x,
                    iterations: it + 1,
                    converged: false,
                }
            }
        }
    }
    BoxQpOutcome {
        x,
        iterations: MAX_ITER,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive oracle: for each of the 3ⁿ active patterns solve the
    /// equality-constrained subproblem and keep the best feasible point.
    fn brute_force(
        h: &DMatrix<f64>,
        g: &DVector<f64>,
        lo: &DVector<f64>,
        hi: &DVector<f64>,
    ) -> DVector<f64> {
        let n = g.len();
        let mut best: Option<(f64, DVector<f64>)> = None;
        for code in 0..3usize.pow(n as u32) {
            let mut pattern = vec![0u8; n];
            let mut c = code;
            for p in pattern.iter_mut() {
                *p = (c % 3) as u8;
                c /= 3;
            }
            let mut x = DVector::zeros(n);
            let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
            for i in 0..n {
                match pattern[i] {
                    1 => x[i] = lo[i],
                    2 => x[i] = hi[i],
                    _ => {}
                }
            }
            if !free.is_empty() {
                let m = free.len();
                let hff = DMatrix::from_fn(m, m, |a, b| h[(free[a], free[b])]);
                let mut rhs = DVector::from_fn(m, |a, _| -g[free[a]]);
                for (a, &i) in free.iter().enumerate() {
                    for j in 0..n {
                        if pattern[j] != 0 {
                            rhs[a] -= h[(i, j)] * x[j];
                        }
                    }
                }
                let sol = hff.lu().solve(&rhs).unwrap();
                for (a, &i) in free.iter().enumerate() {
                    x[i] = sol[a];
                }
            }
            if (0..n).any(|i| x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12) {
                continue;
            }
            let f = 0.5 * x.dot(&(h * &x)) + g.dot(&x);
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, x));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn unconstrained_minimum_inside_box() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = DVector::from_vec(vec![-1.0, -0.5]);
        let lo = DVector::from_element(2, -10.0);
        let hi = DVector::from_element(2, 10.0);
        let out = solve_box_qp(&h, &g, &lo, &hi, &DVector::zeros(2));
        let exact = h.clone().lu().solve(&(-&g)).unwrap();
        assert!((out.x - exact).amax() < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn matches_enumeration_on_random_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let h = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
            let g = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
            let lo = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..0.0));
            let hi = DVector::from_fn(n, |i, _| lo[i] + rng.gen_range(0.1..1.5));
            let x0 = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let out = solve_box_qp(&h, &g, &lo, &hi, &x0);
            let oracle = brute_force(&h, &g, &lo, &hi);
            let f = |x: &DVector<f64>| 0.5 * x.dot(&(&h * x)) + g.dot(x);
            assert!(
                f(&out.x) <= f(&oracle) + 1e-10,
                "{} vs {}",
                f(&out.x),
                f(&oracle)
            );
            assert!((0..n).all(|i| out.x[i] >= lo[i] && out.x[i] <= hi[i]));
        }
    }
}
