//! Firm-side closed forms: asset elasticities and channel rates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::params::{FixedEnv, StructuralParams};

/// Inputs of the two-channel firm technology `K^eta0 L^gamma + delta A K^psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSectorFirm {
    pub k: f64,
    pub l: f64,
    pub eta0: f64,
    pub psi: f64,
    pub gamma: f64,
    pub delta_scale: f64,
}

/// Effective output elasticity of assets at capability `a`.
///
/// Evaluated through the AI-channel weight `R / (T + R)` in log space, so
/// very large or small `k` do not overflow.
pub fn effective_eta(firm: &TwoSectorFirm, a: f64) -> Result<f64> {
    if !(firm.k > 0.0 && firm.l > 0.0 && firm.delta_scale > 0.0 && a >= 0.0) {
        return Err(Error::domain(
            "effective_eta",
            "need k > 0, l > 0, delta_scale > 0 and a >= 0",
        ));
    }
    if a == 0.0 {
        return Ok(firm.eta0);
    }
    let ln_k = firm.k.ln();
    let ln_t = firm.eta0 * ln_k + firm.gamma * firm.l.ln();
    let ln_r = firm.delta_scale.ln() + a.ln() + firm.psi * ln_k;
    let weight = 1.0 / (1.0 + (ln_t - ln_r).exp());
    Ok(firm.eta0 + (firm.psi - firm.eta0) * weight)
}

/// Elasticity of optimal profits with respect to assets, `eta / (1 - gamma_l)`.
pub fn profit_elasticity(eta: f64, gamma_l: f64) -> Result<f64> {
    if !(gamma_l > 0.0 && gamma_l < 1.0) {
        return Err(Error::domain(
            "profit_elasticity",
            format!("gamma_l must lie in (0,1), got {gamma_l}"),
        ));
    }
    Ok(eta / (1.0 - gamma_l))
}

/// Whether log-asset variance grows under reinvestment of profits.
pub fn self_reinforcing(eta: f64, gamma_l: f64) -> Result<bool> {
    Ok(profit_elasticity(eta, gamma_l)? > 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelRates {
    /// Speed at which within-task variance falls, per unit of capability.
    pub equalizing: f64,
    /// Speed at which rent-sharing variance rises, per unit of capability.
    pub concentrating: f64,
    /// `concentrating / equalizing`; infinite when the equalizing rate is zero.
    pub ratio: f64,
}

/// Marginal rates of the two channels at `A = 1`, with `eta` moving linearly
/// from `eta0` at `A = 0` to `eta1` at `A = 1`.
pub fn rate_comparison(p: &StructuralParams, env: &FixedEnv) -> ChannelRates {
    let sigma_h2 = env.cv_h * env.cv_h;
    // d/da [ |S| sigma_h^2 / (1 + r a)^2 ] = -2 r |S| sigma_h^2 / (1 + r a)^3
    let equalizing = 2.0 * p.r * env.s_share * sigma_h2 / (1.0 + p.r).powi(3);
    let denom = (1.0 - env.gamma_l).powi(2);
    let concentrating = env.xi * env.xi * p.var_log_k() * 2.0 * p.eta1 * (p.eta1 - p.eta0) / denom;
    let ratio = if equalizing > 0.0 {
        concentrating / equalizing
    } else {
        f64::INFINITY
    };
    ChannelRates {
        equalizing,
        concentrating,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn firm(psi: f64) -> TwoSectorFirm {
        TwoSectorFirm {
            k: 3.0,
            l: 2.0,
            eta0: 0.142,
            psi,
            gamma: 0.55,
            delta_scale: 0.8,
        }
    }

    #[test]
    fn eta_at_zero_capability_is_eta0() {
        assert_eq!(effective_eta(&firm(0.6), 0.0).unwrap(), 0.142);
    }

    #[test]
    fn eta_constant_when_psi_equals_eta0() {
        for a in [0.1, 1.0, 10.0] {
            assert!((effective_eta(&firm(0.142), a).unwrap() - 0.142).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_increasing_when_psi_above_eta0() {
        let seq: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
            .iter()
            .map(|&a| effective_eta(&firm(0.6), a).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] > w[0]), "{seq:?}");
    }

    #[test]
    fn eta_matches_direct_formula_and_survives_extreme_k() {
        let f = firm(0.6);
        let t = f.k.powf(f.eta0) * f.l.powf(f.gamma);
        let r = f.delta_scale * 1.3 * f.k.powf(f.psi);
        let direct = (f.eta0 * t + f.psi * r) / (t + r);
        assert!((effective_eta(&f, 1.3).unwrap() - direct).abs() < 1e-14);

        let huge = TwoSectorFirm { k: 1e300, ..f };
        let v = effective_eta(&huge, 1.0).unwrap();
        assert!(v.is_finite() && (v - 0.6).abs() < 1e-6);
        assert!(effective_eta(&TwoSectorFirm { k: 0.0, ..f }, 1.0).is_err());
    }

    #[test]
    fn profit_elasticity_points() {
        assert!((profit_elasticity(0.142, 0.55).unwrap() - 0.3156).abs() < 1e-4);
        assert!((profit_elasticity(0.323, 0.55).unwrap() - 0.7178).abs() < 1e-4);
        assert_eq!(profit_elasticity(0.0, 0.55).unwrap(), 0.0);
        assert!(!self_reinforcing(0.0, 0.55).unwrap());
        assert!(!self_reinforcing(0.323, 0.55).unwrap());
        assert!(self_reinforcing(0.5, 0.55).unwrap());
        assert!(profit_elasticity(0.3, 1.0).is_err());
    }

    #[test]
    fn rates_vanish_in_degenerate_cases() {
        let env = FixedEnv::default();
        let mut p = StructuralParams::reference();
        p.eta1 = p.eta0;
        assert_eq!(rate_comparison(&p, &env).concentrating, 0.0);
        let mut p = StructuralParams::reference();
        p.r = 0.0;
        let rates = rate_comparison(&p, &env);
        assert_eq!(rates.equalizing, 0.0);
        assert!(rates.ratio.is_infinite());
    }

    #[test]
    fn concentrating_outpaces_equalizing_at_reference() {
        let rates = rate_comparison(&StructuralParams::reference(), &FixedEnv::default());
        assert!(rates.concentrating > rates.equalizing);
        // equalizing rate: 2 * 0.526 * 0.5 * 0.1225 / 1.526^3
        assert!((rates.equalizing - 0.018_13).abs() < 1e-4);
    }
}
