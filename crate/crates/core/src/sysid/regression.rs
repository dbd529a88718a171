//! Quadratic regression of identified parameters over expansion length.

use nalgebra::{DMatrix, DVector};

use crate::vessel::{HydroParams, ParamPolynomials, Quadratic};
use crate::{Error, Result};

/// Least-squares quadratic through `(x, y)` pairs. Needs three distinct
/// abscissae.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<Quadratic> {
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Rank {
            needed: 3,
            got: distinct.len(),
        });
    }
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(2 - j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Identification(format!("regression failed: {e}")))?;
    Ok(Quadratic::new(c[0], c[1], c[2]))
}

/// Fits one quadratic per parameter family. The symmetric pairs are fitted
/// on their mean.
pub fn fit_polynomials(points: &[(f64, HydroParams)]) -> Result<ParamPolynomials> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let family =
        |f: fn(&HydroParams) -> f64| -> Vec<f64> { points.iter().map(|p| f(&p.1)).collect() };
    Ok(ParamPolynomials {
        m12: fit_quadratic(&xs, &family(|p| 0.5 * (p.m1 + p.m2)))?,
        m3: fit_quadratic(&xs, &family(|p| p.m3))?,
        xuv: fit_quadratic(&xs, &family(|p| 0.5 * (p.xu + p.yv)))?,
        nr: fit_quadratic(&xs, &family(|p| p.nr))?,
    })
}

/// Largest relative deviation between two parameter functions over `n + 1`
/// evenly spaced lengths in `[0, l_max]`.
pub fn max_relative_deviation(
    a: &ParamPolynomials,
    b: &ParamPolynomials,
    l_max: f64,
    n: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let l = l_max * k as f64 / n as f64;
        for (fa, fb) in a.families().iter().zip(b.families()) {
            let (va, vb) = (fa.eval(l), fb.eval(l));
            worst = worst.max((va - vb).abs() / vb.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(poly: &ParamPolynomials, ls: &[f64]) -> Vec<(f64, HydroParams)> {
        ls.iter().map(|&l| (l, poly.eval(l).unwrap())).collect()
    }

    #[test]
    fn exact_quadratic_data_round_trips() {
        let truth = ParamPolynomials::default();
        let ls = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        let fit = fit_polynomials(&sampled(&truth, &ls)).unwrap();
        for (a, b) in fit.families().iter().zip(truth.families()) {
            for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
                assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn constant_data_gives_constant_fit() {
        let q = fit_quadratic(&[0.0, 0.2, 0.4, 0.5], &[3.5; 4]).unwrap();
        assert!(q.c2.abs() < 1e-10 && q.c1.abs() < 1e-10);
        assert!((q.c0 - 3.5).abs() < 1e-12);
    }

    #[test]
    fn three_points_interpolate() {
        let xs = [0.0, 0.25, 0.5];
        let ys = [1.0, -2.0, 7.0];
        let q = fit_quadratic(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(ys) {
            assert!((q.eval(*x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_lengths_is_a_rank_error() {
        let truth = ParamPolynomials::default();
        let err = fit_polynomials(&sampled(&truth, &[0.0, 0.5])).unwrap_err();
        assert_eq!(err, Error::Rank { needed: 3, got: 2 });
        let err = fit_polynomials(&sampled(&truth, &[0.0, 0.5, 0.5, 0.0])).unwrap_err();
        assert_eq!(err, Error::Rank { needed: 3, got: 2 });
    }
}
