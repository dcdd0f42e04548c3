use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gini::gini_to_sigma;

/// Number of calibrated structural parameters.
pub const N_PARAMS: usize = 5;
/// Number of targeted moments.
pub const N_MOMENTS: usize = 6;

/// The five calibrated structural parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuralParams {
    /// AI-to-human task output ratio `alpha / (phi * mu_h)`.
    pub r: f64,
    /// Elasticity of substitution across tasks.
    pub sigma: f64,
    /// Asset output elasticity before AI.
    pub eta0: f64,
    /// Asset output elasticity after AI.
    pub eta1: f64,
    /// Gini coefficient of the asset distribution.
    pub gini_k: f64,
}

impl StructuralParams {
    pub const NAMES: [&'static str; N_PARAMS] = ["r", "sigma", "eta0", "eta1", "gini_k"];

    /// Box used by the calibration search.
    pub const BOUNDS: [(f64, f64); N_PARAMS] = [
        (0.05, 1.5),
        (0.2, 5.0),
        (0.05, 0.8),
        (0.05, 0.9),
        (0.2, 0.98),
    ];

    pub fn new(r: f64, sigma: f64, eta0: f64, eta1: f64, gini_k: f64) -> Result<Self> {
        let p = Self {
            r,
            sigma,
            eta0,
            eta1,
            gini_k,
        };
        p.validate()?;
        Ok(p)
    }

    /// Point estimates printed in the published calibration table.
    pub const fn reference() -> Self {
        Self {
            r: 0.526,
            sigma: 1.166,
            eta0: 0.142,
            eta1: 0.323,
            gini_k: 0.909,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        for (name, v) in Self::NAMES.iter().zip(a) {
            if !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "not finite",
                });
            }
        }
        let check = |name, v: f64, ok: bool, reason| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason,
                })
            }
        };
        check("r", self.r, self.r >= 0.0, "must be >= 0")?;
        check("sigma", self.sigma, self.sigma > 0.0, "must be > 0")?;
        check(
            "eta0",
            self.eta0,
            self.eta0 > 0.0 && self.eta0 < 1.0,
            "must lie in (0,1)",
        )?;
        check(
            "eta1",
            self.eta1,
            self.eta1 > 0.0 && self.eta1 < 1.0,
            "must lie in (0,1)",
        )?;
        check(
            "gini_k",
            self.gini_k,
            self.gini_k > 0.0 && self.gini_k < 1.0,
            "must lie in (0,1)",
        )
    }

    pub fn in_bounds(&self) -> bool {
        self.to_array()
            .iter()
            .zip(Self::BOUNDS)
            .all(|(v, (lo, hi))| *v >= lo && *v <= hi)
    }

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [self.r, self.sigma, self.eta0, self.eta1, self.gini_k]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            r: x[0],
            sigma: x[1],
            eta0: x[2],
            eta1: x[3],
            gini_k: x[4],
        }
    }

    /// Variance of log assets implied by `gini_k` under lognormality.
    pub fn var_log_k(&self) -> f64 {
        let s = gini_to_sigma(self.gini_k).unwrap_or(f64::NAN);
        s * s
    }
}

/// Parameters held fixed during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedEnv {
    /// Within-occupation ability coefficient of variation.
    pub cv_h: f64,
    /// Share of tasks AI can augment.
    pub s_share: f64,
    /// Labor share.
    pub gamma_l: f64,
    /// Rent-sharing pass-through from log profits to the firm wage premium.
    pub xi: f64,
    /// Pre-AI within-firm share of log-wage variance at the reference point.
    pub m3_anchor: f64,
    /// Screening signal noise standard deviation.
    pub sigma_eps: f64,
    /// Top-firm population fraction used for the concentration moment.
    pub top_q: f64,
    /// AI capability before adoption.
    pub a_pre: f64,
    /// AI capability after adoption.
    pub a_post: f64,
    /// Residual between-firm log-wage variance per unit of `Var(log K)`.
    pub nu_loading: f64,
}

impl Default for FixedEnv {
    fn default() -> Self {
        let mut env = Self {
            cv_h: 0.35,
            s_share: 0.50,
            gamma_l: 0.55,
            xi: 0.20,
            m3_anchor: 0.30,
            sigma_eps: 0.35,
            top_q: 0.04,
            a_pre: 0.0,
            a_post: 1.0,
            nu_loading: 0.0,
        };
        env.anchor_nu_loading(&StructuralParams::reference());
        env
    }
}

impl FixedEnv {
    pub fn validate(&self) -> Result<()> {
        let share = |name, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "must lie in (0,1)",
                })
            }
        };
        share("s_share", self.s_share)?;
        share("gamma_l", self.gamma_l)?;
        share("m3_anchor", self.m3_anchor)?;
        share("top_q", self.top_q)?;
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "must be positive",
                })
            }
        };
        positive("cv_h", self.cv_h)?;
        positive("sigma_eps", self.sigma_eps)?;
        if !(self.xi >= 0.0) {
            return Err(Error::InvalidParam {
                name: "xi",
                value: self.xi,
                reason: "must be >= 0",
            });
        }
        if !(self.nu_loading >= 0.0) {
            return Err(Error::InvalidParam {
                name: "nu_loading",
                value: self.nu_loading,
                reason: "must be >= 0",
            });
        }
        if !(self.a_post > self.a_pre && self.a_pre >= 0.0) {
            return Err(Error::InvalidParam {
                name: "a_post",
                value: self.a_post,
                reason: "must exceed a_pre >= 0",
            });
        }
        Ok(())
    }

    /// Sets `nu_loading` so that the pre-AI within-firm variance share equals
    /// `m3_anchor` at `at`. Returns `true` when the anchor was infeasible and
    /// the loading had to be clamped to zero.
    pub fn anchor_nu_loading(&mut self, at: &StructuralParams) -> bool {
        let within = self.cv_h * self.cv_h;
        let var_k = at.var_log_k();
        let rent = crate::model::gini::rent_between(at.eta0, var_k, self.xi, self.gamma_l);
        let residual = within / self.m3_anchor - within - rent;
        if residual < 0.0 || var_k <= 0.0 {
            self.nu_loading = 0.0;
            true
        } else {
            self.nu_loading = residual / var_k;
            false
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }
}

/// Technology of a single AI-augmentable task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTech {
    /// Human-capital intensity of the task.
    pub phi: f64,
    /// AI productivity on the task.
    pub alpha: f64,
    /// Multiplicative augmentation; zero for the purely additive case.
    pub beta: f64,
    pub mu_h: f64,
    pub sigma_h: f64,
}

impl TaskTech {
    /// Additive task with `phi = mu_h = 1`, so `alpha` equals the output ratio.
    pub fn additive(r: f64, cv_h: f64) -> Self {
        Self {
            phi: 1.0,
            alpha: r,
            beta: 0.0,
            mu_h: 1.0,
            sigma_h: cv_h,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn cv_h(&self) -> f64 {
        self.sigma_h / self.mu_h
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParam {
                name,
                value,
                reason,
            })
        };
        if !(self.phi > 0.0) {
            return bad("phi", self.phi, "must be > 0");
        }
        if !(self.alpha >= 0.0) {
            return bad("alpha", self.alpha, "must be >= 0");
        }
        if !(self.beta >= 0.0) {
            return bad("beta", self.beta, "must be >= 0");
        }
        if !(self.mu_h > 0.0) {
            return bad("mu_h", self.mu_h, "must be > 0");
        }
        if !(self.sigma_h >= 0.0) {
            return bad("sigma_h", self.sigma_h, "must be >= 0");
        }
        Ok(())
    }
}

/// Six targeted moments and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentVector {
    pub values: [f64; N_MOMENTS],
    pub ses: [f64; N_MOMENTS],
}

impl MomentVector {
    pub const NAMES: [&'static str; N_MOMENTS] = [
        "cv_reduction",
        "gap_compression",
        "within_firm_share",
        "top4_revenue_share",
        "educ_premium_decline",
        "delta_gini",
    ];

    /// Published targets with the default standard errors.
    pub const fn published_targets() -> Self {
        Self {
            values: [0.35, 0.50, 0.30, 0.45, 0.025, 0.005],
            ses: [0.05, 0.08, 0.03, 0.05, 0.01, 0.005],
        }
    }

    pub fn new(values: [f64; N_MOMENTS], ses: [f64; N_MOMENTS]) -> Result<Self> {
        let m = Self { values, ses };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, se) in self.ses.iter().enumerate() {
            if !(*se > 0.0 && se.is_finite()) {
                return Err(Error::InvalidParam {
                    name: Self::NAMES[i],
                    value: *se,
                    reason: "standard error must be positive",
                });
            }
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParam {
                name: "values",
                value: *v,
                reason: "not finite",
            });
        }
        Ok(())
    }
}

impl Default for MomentVector {
    fn default() -> Self {
        Self::published_targets()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_is_valid_and_inside_box() {
        let p = StructuralParams::reference();
        p.validate().unwrap();
        assert!(p.in_bounds());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(StructuralParams::new(0.5, 1.0, 1.2, 0.3, 0.9).is_err());
        assert!(StructuralParams::new(0.5, 0.0, 0.2, 0.3, 0.9).is_err());
        assert!(StructuralParams::new(f64::NAN, 1.0, 0.2, 0.3, 0.9).is_err());
        assert!(MomentVector::new([0.0; 6], [1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn default_env_anchors_within_share() {
        let env = FixedEnv::default();
        env.validate().unwrap();
        let p = StructuralParams::reference();
        let within = env.cv_h * env.cv_h;
        let rent = crate::model::gini::rent_between(p.eta0, p.var_log_k(), env.xi, env.gamma_l);
        let share = within / (within + env.nu_loading * p.var_log_k() + rent);
        assert!((share - 0.30).abs() < 1e-12);
    }

    #[test]
    fn infeasible_anchor_clamps() {
        let mut env = FixedEnv {
            m3_anchor: 0.99,
            ..FixedEnv::default()
        };
        assert!(env.anchor_nu_loading(&StructuralParams::reference()));
        assert_eq!(env.nu_loading, 0.0);
    }
}
