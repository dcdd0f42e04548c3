//! Lognormal Gini machinery and the aggregation of the two channels into
//! a change in the wage Gini.
//!
//! Log-wage variance is split into three additive pieces:
//!
//! * within-firm ability dispersion, `CV_h^2` before AI and
//!   `CV_h^2 (1 - |S| (1 - 1/(1+r)^2))` after (the AI floor applies to the
//!   augmentable share of tasks);
//! * a residual between-firm component `nu_loading * Var(log K)` that AI
//!   leaves unchanged;
//! * rent sharing, `xi^2 Var(log K) (eta / (1 - gamma_L))^2`, evaluated at
//!   `eta0` before and `eta1` after.
//!
//! The Gini of a lognormal with log-scale `s` is `2 Phi(s / sqrt 2) - 1`.
//! Because only the rent-sharing and within pieces move, the sign of the
//! Gini change is exactly the sign of `lhs - rhs` in [`knife_edge`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::normal;
use crate::model::params::{FixedEnv, StructuralParams};

/// Gini coefficient of a lognormal distribution with log-scale `sigma_log`.
pub fn lognormal_gini(sigma_log: f64) -> Result<f64> {
    if !(sigma_log >= 0.0) {
        return Err(Error::domain(
            "lognormal_gini",
            format!("sigma_log must be >= 0, got {sigma_log}"),
        ));
    }
    Ok(normal::erf_half(sigma_log))
}

/// Inverse of [`lognormal_gini`].
pub fn gini_to_sigma(g: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&g) {
        return Err(Error::domain(
            "gini_to_sigma",
            format!("gini must lie in [0,1), got {g}"),
        ));
    }
    Ok(normal::two_erf_inv(g))
}

/// Rent-sharing between-firm log-wage variance at asset elasticity `eta`.
pub fn rent_between(eta: f64, var_log_k: f64, xi: f64, gamma_l: f64) -> f64 {
    let c = eta / (1.0 - gamma_l);
    xi * xi * var_log_k * c * c
}

/// Pre/post log-wage variance pieces and the implied Gini change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniShift {
    pub within_pre: f64,
    pub within_post: f64,
    pub residual_between: f64,
    pub rent_pre: f64,
    pub rent_post: f64,
    pub var_pre: f64,
    pub var_post: f64,
    pub gini_pre: f64,
    pub gini_post: f64,
    pub delta: f64,
}

impl GiniShift {
    /// Pre-AI within-firm share of log-wage variance.
    pub fn within_share_pre(&self) -> f64 {
        self.within_pre / self.var_pre
    }
}

/// Full variance decomposition behind [`delta_gini`].
pub fn gini_shift(
    p: &StructuralParams,
    env: &FixedEnv,
    xi_override: Option<f64>,
) -> Result<GiniShift> {
    let xi = xi_override.unwrap_or(env.xi);
    if !(xi >= 0.0) {
        return Err(Error::domain(
            "delta_gini",
            format!("xi must be >= 0, got {xi}"),
        ));
    }
    let var_k = gini_to_sigma(p.gini_k)?.powi(2);
    let within_pre = env.cv_h * env.cv_h;
    let within_post = within_pre - equalizing_drop(p.r, env);
    let residual_between = env.nu_loading * var_k;
    let rent_pre = rent_between(p.eta0, var_k, xi, env.gamma_l);
    let rent_post = rent_between(p.eta1, var_k, xi, env.gamma_l);
    let var_pre = within_pre + residual_between + rent_pre;
    let var_post = within_post + residual_between + rent_post;
    let gini_pre = lognormal_gini(var_pre.sqrt())?;
    let gini_post = lognormal_gini(var_post.max(0.0).sqrt())?;
    Ok(GiniShift {
        within_pre,
        within_post,
        residual_between,
        rent_pre,
        rent_post,
        var_pre,
        var_post,
        gini_pre,
        gini_post,
        delta: gini_post - gini_pre,
    })
}

/// Signed change in the wage Gini between `A = 0` and `A = 1`.
pub fn delta_gini(p: &StructuralParams, env: &FixedEnv, xi_override: Option<f64>) -> Result<f64> {
    Ok(gini_shift(p, env, xi_override)?.delta)
}

fn equalizing_drop(r: f64, env: &FixedEnv) -> f64 {
    env.cv_h * env.cv_h * env.s_share * (1.0 - 1.0 / (1.0 + r).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Equalizing,
    Concentrating,
    Boundary,
}

impl Regime {
    pub const BOUNDARY_TOL: f64 = 1e-9;

    pub fn classify(lhs: f64, rhs: f64) -> Self {
        let gap = lhs - rhs;
        if gap.abs() <= Self::BOUNDARY_TOL {
            Regime::Boundary
        } else if gap > 0.0 {
            Regime::Concentrating
        } else {
            Regime::Equalizing
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Equalizing => "Equalizing",
            Regime::Concentrating => "Concentrating",
            Regime::Boundary => "Boundary",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeOutcome {
    /// Rise in between-firm variance from rent sharing.
    pub lhs: f64,
    /// Fall in within-firm variance from homogenization.
    pub rhs: f64,
    pub delta_gini: f64,
    pub regime: Regime,
}

/// Which channel dominates at `p`.
pub fn knife_edge(p: &StructuralParams, env: &FixedEnv) -> Result<RegimeOutcome> {
    let var_k = gini_to_sigma(p.gini_k)?.powi(2);
    let lhs = rent_between(p.eta1, var_k, env.xi, env.gamma_l)
        - rent_between(p.eta0, var_k, env.xi, env.gamma_l);
    let rhs = equalizing_drop(p.r, env);
    Ok(RegimeOutcome {
        lhs,
        rhs,
        delta_gini: delta_gini(p, env, None)?,
        regime: Regime::classify(lhs, rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_points() {
        assert_eq!(lognormal_gini(0.0).unwrap(), 0.0);
        assert_eq!(gini_to_sigma(0.0).unwrap(), 0.0);
        // 2.389 to three decimals; 2.390228 from the normal quantile
        assert!((gini_to_sigma(0.909).unwrap() - 2.389).abs() < 2e-3);
        assert!((gini_to_sigma(0.909).unwrap() - 2.390_228).abs() < 1e-6);
        assert!((gini_to_sigma(0.40).unwrap() - 0.7416).abs() < 1e-4);
        assert!(gini_to_sigma(1.0).is_err());
        assert!(gini_to_sigma(-0.1).is_err());
        assert!(lognormal_gini(-1.0).is_err());
    }

    #[test]
    fn knife_edge_without_rent_sharing_is_equalizing() {
        let env = FixedEnv::default().with_xi(0.0);
        let out = knife_edge(&StructuralParams::reference(), &env).unwrap();
        assert_eq!(out.lhs, 0.0);
        assert_eq!(out.regime, Regime::Equalizing);

        let mut p = StructuralParams::reference();
        p.eta1 = p.eta0;
        let out = knife_edge(&p, &FixedEnv::default()).unwrap();
        assert_eq!(out.lhs, 0.0);
        assert_eq!(out.regime, Regime::Equalizing);
    }

    #[test]
    fn reference_point_is_concentrating() {
        let out = knife_edge(&StructuralParams::reference(), &FixedEnv::default()).unwrap();
        assert_eq!(out.regime, Regime::Concentrating);
        assert!(out.delta_gini > 0.0);
        // rhs = 0.35^2 * 0.5 * (1 - 1/1.526^2)
        assert!((out.rhs - 0.034_95).abs() < 1e-4);
    }

    #[test]
    fn pure_equalizing_channel_is_negative() {
        let p = StructuralParams::reference();
        let d = delta_gini(&p, &FixedEnv::default(), Some(0.0)).unwrap();
        assert!(d < 0.0);
    }

    #[test]
    fn zero_r_leaves_only_rent_sharing() {
        let mut p = StructuralParams::reference();
        p.r = 0.0;
        let s = gini_shift(&p, &FixedEnv::default(), None).unwrap();
        assert_eq!(s.within_pre, s.within_post);
        assert!(s.delta > 0.0);
    }

    #[test]
    fn monotone_in_gini_k_and_xi() {
        let env = FixedEnv::default();
        let mut p = StructuralParams::reference();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=78 {
            p.gini_k = 0.2 + 0.01 * i as f64;
            let d = delta_gini(&p, &env, None).unwrap();
            assert!(d > prev, "gini_k={}", p.gini_k);
            prev = d;
        }
        let p = StructuralParams::reference();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=40 {
            let d = delta_gini(&p, &env, Some(0.01 * i as f64)).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn within_share_matches_anchor_at_reference() {
        let s = gini_shift(&StructuralParams::reference(), &FixedEnv::default(), None).unwrap();
        assert!((s.within_share_pre() - 0.30).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn sigma_roundtrip(s in 0.0f64..4.0) {
                let back = gini_to_sigma(lognormal_gini(s).unwrap()).unwrap();
                prop_assert!((back - s).abs() < 1e-10);
            }

            #[test]
            fn regime_agrees_with_gini_sign(
                r in 0.05f64..1.5,
                eta0 in 0.05f64..0.8,
                eta1 in 0.05f64..0.9,
                gini_k in 0.2f64..0.98,
                xi in 0.0f64..0.4,
            ) {
                let p = StructuralParams { r, sigma: 1.2, eta0, eta1, gini_k };
                let env = FixedEnv::default().with_xi(xi);
                let out = knife_edge(&p, &env).unwrap();
                if out.delta_gini.abs() > 1e-6 {
                    let expected = if out.delta_gini > 0.0 { Regime::Concentrating } else { Regime::Equalizing };
                    prop_assert_eq!(out.regime, expected);
                }
            }
        }
    }
}
