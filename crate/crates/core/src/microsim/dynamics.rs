use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microsim::SimPopulation;
use crate::model::firm::profit_elasticity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FirmDynamicsConfig {
    /// Share of profits reinvested.
    pub s: f64,
    pub delta: f64,
    pub horizon: usize,
    /// Wage level; enters profits as `w^(-gamma_l/(1-gamma_l))`.
    pub w: f64,
}

impl Default for FirmDynamicsConfig {
    fn default() -> Self {
        Self {
            s: 0.3,
            delta: 0.05,
            horizon: 50,
            w: 1.0,
        }
    }
}

impl FirmDynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.s) || !(0.0..1.0).contains(&self.delta) {
            return Err(Error::domain(
                "firm_dynamics",
                "s and delta must lie in [0,1)",
            ));
        }
        if self.horizon == 0 || !(self.w > 0.0) {
            return Err(Error::domain(
                "firm_dynamics",
                "need horizon >= 1 and w > 0",
            ));
        }
        Ok(())
    }
}

/// Ratio of mean profit to mean capital in the first period.
pub const INITIAL_PROFIT_RATE: f64 = 0.1;

/// Upper limit on capital before a run is declared explosive.
pub const K_CEILING: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmTrajectory {
    /// `Var(log K)` at t = 0, 1, ..., periods.
    pub var_log_k: Vec<f64>,
    pub exponent: f64,
    pub explosive: bool,
}

/// Iterates `K' = (1 - delta) K + s pi(K)` with `pi = c K^(eta/(1-gamma_l))`.
pub fn firm_dynamics(
    pop: &SimPopulation,
    cfg: &FirmDynamicsConfig,
    eta: f64,
    gamma_l: f64,
) -> Result<FirmTrajectory> {
    cfg.validate()?;
    if pop.firms.is_empty() {
        return Err(Error::domain("firm_dynamics", "no firms"));
    }
    let exponent = profit_elasticity(eta, gamma_l)?;
    let mut k: Vec<f64> = pop.firms.iter().map(|f| f.k).collect();

    let wage_factor = cfg.w.powf(-gamma_l / (1.0 - gamma_l));
    let mean_k = k.iter().sum::<f64>() / k.len() as f64;
    let mean_kx = k.iter().map(|x| x.powf(exponent)).sum::<f64>() / k.len() as f64;
    let level = INITIAL_PROFIT_RATE * mean_k / (wage_factor * mean_kx);

    let mut out = vec![log_variance(&k)];
    let mut explosive = false;
    for _ in 0..cfg.horizon {
        for x in k.iter_mut() {
            *x = (1.0 - cfg.delta) * *x + cfg.s * level * wage_factor * x.powf(exponent);
        }
        if k.iter().any(|x| !(x.is_finite() && *x <= K_CEILING)) {
            explosive = true;
            break;
        }
        out.push(log_variance(&k));
    }
    Ok(FirmTrajectory {
        var_log_k: out,
        exponent,
        explosive,
    })
}

fn log_variance(k: &[f64]) -> f64 {
    let n = k.len() as f64;
    let mean = k.iter().map(|x| x.ln()).sum::<f64>() / n;
    k.iter().map(|x| (x.ln() - mean).powi(2)).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microsim::simulate_population;

    fn pop() -> SimPopulation {
        simulate_population(10, 400, 0.35, 0.909, 9).unwrap()
    }

    // eta chosen so eta / (1 - 0.55) hits the target exponent
    fn eta_for(exponent: f64) -> f64 {
        exponent * 0.45
    }

    #[test]
    fn contracts_below_threshold() {
        let tr = firm_dynamics(&pop(), &FirmDynamicsConfig::default(), 0.323, 0.55).unwrap();
        assert!((tr.exponent - 0.7178).abs() < 1e-3);
        assert_eq!(tr.var_log_k.len(), 51);
        assert!(tr.var_log_k.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn expands_above_threshold() {
        let tr = firm_dynamics(&pop(), &FirmDynamicsConfig::default(), eta_for(1.2), 0.55).unwrap();
        assert!(!tr.explosive);
        assert!(tr.var_log_k.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn direction_flips_at_unit_elasticity() {
        let cfg = FirmDynamicsConfig::default();
        let lo = firm_dynamics(&pop(), &cfg, eta_for(0.95), 0.55).unwrap();
        let hi = firm_dynamics(&pop(), &cfg, eta_for(1.05), 0.55).unwrap();
        assert!(lo.var_log_k.last() < lo.var_log_k.first());
        assert!(hi.var_log_k.last() > hi.var_log_k.first());
    }

    #[test]
    fn frozen_without_flows() {
        let cfg = FirmDynamicsConfig {
            s: 0.0,
            delta: 0.0,
            ..FirmDynamicsConfig::default()
        };
        let tr = firm_dynamics(&pop(), &cfg, 0.3, 0.55).unwrap();
        assert!(tr.var_log_k.iter().all(|v| *v == tr.var_log_k[0]));
    }

    #[test]
    fn flags_explosion() {
        let cfg = FirmDynamicsConfig {
            s: 0.99,
            horizon: 2000,
            ..FirmDynamicsConfig::default()
        };
        let tr = firm_dynamics(&pop(), &cfg, eta_for(2.5), 0.55).unwrap();
        assert!(tr.explosive);
        assert!(tr.var_log_k.len() < 2001);
    }
}
