use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gini::delta_gini;
use crate::model::moments::moment_model;
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS, N_PARAMS};

/// Smallest/largest eigenvalue ratio of `G'WG` treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

fn rel_step(x: f64, fd_step: f64) -> f64 {
    fd_step * x.abs().max(1e-2)
}

/// `dm/dtheta'` (6 x 5) by central differences with relative step.
pub fn jacobian(theta: &StructuralParams, env: &FixedEnv, fd_step: f64) -> Result<DMatrix<f64>> {
    let x = theta.to_array();
    let mut g = DMatrix::zeros(N_MOMENTS, N_PARAMS);
    for j in 0..N_PARAMS {
        let h = rel_step(x[j], fd_step);
        let (mut up, mut dn) = (x, x);
        up[j] += h;
        dn[j] -= h;
        let mu = moment_model(&StructuralParams::from_slice(&up), env)?;
        let md = moment_model(&StructuralParams::from_slice(&dn), env)?;
        for i in 0..N_MOMENTS {
            g[(i, j)] = (mu[i] - md[i]) / (2.0 * h);
        }
    }
    Ok(g)
}

/// `dΔGini/dtheta` by central differences.
pub fn delta_gini_gradient(
    theta: &StructuralParams,
    env: &FixedEnv,
    fd_step: f64,
) -> Result<[f64; N_PARAMS]> {
    let x = theta.to_array();
    let mut out = [0.0; N_PARAMS];
    for (j, o) in out.iter_mut().enumerate() {
        let h = rel_step(x[j], fd_step);
        let (mut up, mut dn) = (x, x);
        up[j] += h;
        dn[j] -= h;
        let a = delta_gini(&StructuralParams::from_slice(&up), env, None)?;
        let b = delta_gini(&StructuralParams::from_slice(&dn), env, None)?;
        *o = (a - b) / (2.0 * h);
    }
    Ok(out)
}

/// `dΔGini/dxi` by central differences.
pub fn delta_gini_xi_derivative(
    theta: &StructuralParams,
    env: &FixedEnv,
    fd_step: f64,
) -> Result<f64> {
    let h = rel_step(env.xi, fd_step);
    let a = delta_gini(theta, env, Some(env.xi + h))?;
    let b = delta_gini(theta, env, Some((env.xi - h).max(0.0)))?;
    Ok((a - b) / (env.xi + h - (env.xi - h).max(0.0)))
}

/// Local sensitivity of the calibrated point and of ΔGini.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub theta: StructuralParams,
    pub delta_gini: f64,
    pub model_moments: [f64; N_MOMENTS],
    /// Moment Jacobian, rows = moments.
    pub jacobian: [[f64; N_PARAMS]; N_MOMENTS],
    /// `(G'WG)^-1 G'W`, rows = parameters, columns = moments.
    pub s: [[f64; N_MOMENTS]; N_PARAMS],
    /// `S_ji * m_i / theta_j` at the model moments.
    pub elasticities: [[f64; N_MOMENTS]; N_PARAMS],
    /// ΔGini response to a one-standard-error move in each moment.
    pub boundary: [f64; N_MOMENTS],
    /// `dΔGini/dtheta_j` followed by `dΔGini/dxi`.
    pub direct: [f64; N_PARAMS + 1],
    /// `direct * x / ΔGini`, same order.
    pub direct_elasticities: [f64; N_PARAMS + 1],
}

pub fn sensitivity(
    theta: &StructuralParams,
    targets: &MomentVector,
    env: &FixedEnv,
    fd_step: f64,
) -> Result<Sensitivity> {
    targets.validate()?;
    let g = jacobian(theta, env, fd_step)?;
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        N_MOMENTS,
        targets.ses.iter().map(|s| 1.0 / (s * s)),
    ));
    let gtw = g.transpose() * &w;
    let info = &gtw * &g;

    let eig = SymmetricEigen::new(info.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    if !(lmax > 0.0) || lmin / lmax < SINGULAR_TOL {
        return Err(Error::Singular {
            direction: describe_direction(eig.eigenvectors.column(imin).iter().cloned()),
            eigenvalue: lmin,
        });
    }
    let inv = info.try_inverse().ok_or_else(|| Error::Singular {
        direction: describe_direction(eig.eigenvectors.column(imin).iter().cloned()),
        eigenvalue: lmin,
    })?;
    let s = inv * gtw;

    let m = moment_model(theta, env)?;
    let x = theta.to_array();
    let dg = delta_gini(theta, env, None)?;
    let grad = delta_gini_gradient(theta, env, fd_step)?;
    let dxi = delta_gini_xi_derivative(theta, env, fd_step)?;

    let mut out = Sensitivity {
        theta: *theta,
        delta_gini: dg,
        model_moments: m,
        jacobian: [[0.0; N_PARAMS]; N_MOMENTS],
        s: [[0.0; N_MOMENTS]; N_PARAMS],
        elasticities: [[0.0; N_MOMENTS]; N_PARAMS],
        boundary: [0.0; N_MOMENTS],
        direct: [0.0; N_PARAMS + 1],
        direct_elasticities: [0.0; N_PARAMS + 1],
    };
    for i in 0..N_MOMENTS {
        for j in 0..N_PARAMS {
            out.jacobian[i][j] = g[(i, j)];
            out.s[j][i] = s[(j, i)];
            out.elasticities[j][i] = s[(j, i)] * m[i] / x[j];
        }
        out.boundary[i] = (0..N_PARAMS).map(|j| grad[j] * s[(j, i)]).sum::<f64>() * targets.ses[i];
    }
    for j in 0..N_PARAMS {
        out.direct[j] = grad[j];
        out.direct_elasticities[j] = grad[j] * x[j] / dg;
    }
    out.direct[N_PARAMS] = dxi;
    out.direct_elasticities[N_PARAMS] = dxi * env.xi / dg;
    Ok(out)
}

fn describe_direction(v: impl Iterator<Item = f64>) -> String {
    let mut parts: Vec<(usize, f64)> = v.enumerate().collect();
    parts.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    parts
        .iter()
        .filter(|(_, c)| c.abs() > 0.1)
        .map(|(j, c)| format!("{} ({:+.3})", StructuralParams::NAMES[*j], c))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at_reference() -> Sensitivity {
        let env = FixedEnv::default();
        sensitivity(
            &StructuralParams::reference(),
            &MomentVector::published_targets(),
            &env,
            1e-4,
        )
        .unwrap()
    }

    #[test]
    fn s_times_g_is_identity() {
        let sens = at_reference();
        for a in 0..N_PARAMS {
            for b in 0..N_PARAMS {
                let v: f64 = (0..N_MOMENTS)
                    .map(|i| sens.s[a][i] * sens.jacobian[i][b])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-4, "({a},{b}) = {v}");
            }
        }
    }

    #[test]
    fn halving_step_is_stable() {
        let env = FixedEnv::default();
        let p = StructuralParams::reference();
        let t = MomentVector::published_targets();
        let a = sensitivity(&p, &t, &env, 1e-4).unwrap();
        let b = sensitivity(&p, &t, &env, 5e-5).unwrap();
        for j in 0..N_PARAMS {
            for i in 0..N_MOMENTS {
                let (x, y) = (a.s[j][i], b.s[j][i]);
                assert!(
                    (x - y).abs() <= 0.01 * x.abs().max(1e-6),
                    "S[{j}][{i}] {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn sigma_row_dominated_by_m5() {
        let sens = at_reference();
        let row = sens.s[1];
        let big = row
            .iter()
            .map(|v| v.abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(big.0, 4);
    }

    #[test]
    fn xi_elasticity_identity() {
        let sens = at_reference();
        let env = FixedEnv::default();
        let e = sens.direct[N_PARAMS] * env.xi / sens.delta_gini;
        assert!((e - sens.direct_elasticities[N_PARAMS]).abs() < 1e-12);
    }

    #[test]
    fn singular_when_moments_collapse() {
        // sigma only enters m5; with s_share tiny its column vanishes
        let env = FixedEnv {
            s_share: 1e-9,
            ..FixedEnv::default()
        };
        let err = sensitivity(
            &StructuralParams::reference(),
            &MomentVector::published_targets(),
            &env,
            1e-4,
        )
        .unwrap_err();
        match err {
            Error::Singular { direction, .. } => {
                assert!(direction.starts_with("sigma"), "{direction}")
            }
            e => panic!("unexpected {e}"),
        }
    }
}
