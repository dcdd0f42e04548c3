use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// HC1 robust standard error.
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionOutput {
    pub coefficients: Vec<Coefficient>,
    /// Centered R².
    pub r_squared: f64,
    pub n: usize,
    /// Classical (homoskedastic) standard errors, same order.
    pub classical_se: Vec<f64>,
}

impl RegressionOutput {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Two-sided significance stars at 1%, 5% and 10%.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

const RANK_TOL: f64 = 1e-10;

fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter()
        .filter(|s| **s > RANK_TOL * top.max(f64::MIN_POSITIVE) * (m.nrows().max(m.ncols()) as f64))
        .count()
}

/// Least squares of `y` on the columns of `x` (which should contain the
/// intercept) with HC1 sandwich errors.
pub fn ols_hc1(y: &[f64], x: &DMatrix<f64>, names: &[String]) -> Result<RegressionOutput> {
    let (n, k) = x.shape();
    if y.len() != n || names.len() != k {
        return Err(Error::Data(format!(
            "shape mismatch: y has {} rows, x is {n}x{k}, {} names",
            y.len(),
            names.len()
        )));
    }
    if n <= k {
        return Err(Error::Data(format!(
            "need more observations ({n}) than regressors ({k})"
        )));
    }
    if rank(x) < k {
        // columns that add nothing to the span of those before them
        let mut kept: Vec<usize> = Vec::new();
        let mut collinear = Vec::new();
        for (j, name) in names.iter().enumerate() {
            let mut trial = kept.clone();
            trial.push(j);
            if rank(&x.select_columns(&trial)) > kept.len() {
                kept = trial;
            } else {
                collinear.push(name.clone());
            }
        }
        return Err(Error::RankDeficient { columns: collinear });
    }

    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * x;
    let chol = xtx.clone().cholesky().ok_or_else(|| Error::RankDeficient {
        columns: names.to_vec(),
    })?;
    let xtx_inv = chol.inverse();
    let beta = &xtx_inv * (x.transpose() * &yv);
    let resid = &yv - x * &beta;

    let mut meat = DMatrix::zeros(k, k);
    for i in 0..n {
        let row = x.row(i);
        meat += row.transpose() * row * (resid[i] * resid[i]);
    }
    let scale = n as f64 / (n - k) as f64;
    let cov = &xtx_inv * meat * &xtx_inv * scale;

    let ssr = resid.norm_squared();
    let mean = yv.mean();
    let sst: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    let s2 = ssr / (n - k) as f64;

    let tdist = StudentsT::new(0.0, 1.0, (n - k) as f64).map_err(|e| Error::Data(e.to_string()))?;
    let coefficients = (0..k)
        .map(|j| {
            let se = cov[(j, j)].max(0.0).sqrt();
            let t = if se > 0.0 {
                beta[j] / se
            } else {
                f64::INFINITY * beta[j].signum()
            };
            let p = if t.is_finite() {
                2.0 * tdist.sf(t.abs())
            } else if beta[j] == 0.0 {
                1.0
            } else {
                0.0
            };
            Coefficient {
                name: names[j].clone(),
                estimate: beta[j],
                se,
                t,
                p,
                stars: stars(p).to_string(),
            }
        })
        .collect();
    Ok(RegressionOutput {
        coefficients,
        r_squared,
        n,
        classical_se: (0..k).map(|j| (s2 * xtx_inv[(j, j)]).sqrt()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn three_points_textbook() {
        // x = 0,1,2 ; y = 1,2,4: slope = Sxy/Sxx = 3/2, intercept = 7/3 - 3/2
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let out = ols_hc1(&[1.0, 2.0, 4.0], &x, &names(&["const", "x"])).unwrap();
        assert!((out.coefficients[1].estimate - 1.5).abs() < 1e-12);
        assert!((out.coefficients[0].estimate - (7.0 / 3.0 - 1.5)).abs() < 1e-12);
        // residuals (1/6, -1/3, 1/6): SSR = 1/6, SST = 14/3
        assert!((out.r_squared - (1.0 - (1.0 / 6.0) / (14.0 / 3.0))).abs() < 1e-12);
    }

    #[test]
    fn exact_fit() {
        let x = DMatrix::from_fn(20, 2, |i, j| if j == 0 { 1.0 } else { i as f64 * 0.3 });
        let y: Vec<f64> = (0..20).map(|i| 0.5 + 0.1 * i as f64 * 0.3).collect();
        let out = ols_hc1(&y, &x, &names(&["const", "x"])).unwrap();
        assert!((out.r_squared - 1.0).abs() < 1e-12);
        assert!(out.coefficients.iter().all(|c| c.se < 1e-10));
    }

    #[test]
    fn constant_magnitude_residuals() {
        // residuals +-c orthogonal to [1, x]: HC0 equals the n-denominator
        // classical variance, so HC1 equals the (n-k) classical one
        let n = 40;
        let xs: Vec<f64> = (0..n).map(|i| (i / 2) as f64).collect();
        let e: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let y: Vec<f64> = xs.iter().zip(&e).map(|(x, e)| 1.0 + 2.0 * x + e).collect();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let out = ols_hc1(&y, &x, &names(&["const", "x"])).unwrap();
        for (c, cl) in out.coefficients.iter().zip(&out.classical_se) {
            assert!((c.se / cl - 1.0).abs() < 1e-10);
            let hc0 = c.se / (n as f64 / (n - 2) as f64).sqrt();
            let mle = cl * (((n - 2) as f64) / n as f64).sqrt();
            assert!((hc0 / mle - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn planted_heteroskedastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z = Normal::new(0.0, 1.0).unwrap();
        let n = 5000;
        let a: Vec<f64> = (0..n).map(|_| z.sample(&mut rng)).collect();
        let y: Vec<f64> = a
            .iter()
            .map(|v| 0.5 + 0.1 * v + 0.2 * (1.0 + v.abs()) * z.sample(&mut rng))
            .collect();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { a[i] });
        let out = ols_hc1(&y, &x, &names(&["const", "aioe"])).unwrap();
        let c = out.coef("aioe").unwrap();
        assert!((c.estimate - 0.1).abs() < 2.0 * c.se, "{c:?}");
        assert_eq!(c.stars, "***");
    }

    #[test]
    fn duplicate_intercept_named() {
        let x = DMatrix::from_fn(10, 3, |i, j| if j == 1 { i as f64 } else { 1.0 });
        match ols_hc1(&[1.0; 10], &x, &names(&["const", "x", "copy"])) {
            Err(Error::RankDeficient { columns }) => assert_eq!(columns, vec!["copy".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.009), "***");
        assert_eq!(stars(0.04), "**");
        assert_eq!(stars(0.09), "*");
        assert_eq!(stars(0.2), "");
    }
}
