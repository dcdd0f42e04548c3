use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microsim::SimPopulation;
use crate::model::params::TaskTech;
use crate::model::task::reliability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdClamp {
    None,
    /// Even the least able worker gains from the credential.
    Lower,
    /// No worker gains from the credential.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Screening {
    pub rho: f64,
    /// Credential premium at a given signal: `(1 - rho)` times the gap in
    /// mean ability between the credentialed and uncredentialed groups.
    pub wage_gap: f64,
    /// Gap in mean ability between the two groups.
    pub group_ability_gap: f64,
    pub theta_hat: f64,
    pub credential_share: f64,
    pub clamp: ThresholdClamp,
}

/// Separating equilibrium with credential cost `cost_scale / theta`.
///
/// Employers weight the noisy signal by `rho` and the credential-group mean
/// by `1 - rho`. The group means are computed from the population at the
/// candidate threshold, and the reported threshold is the lowest ability at
/// which the credential premium covers the cost.
pub fn screening_equilibrium(
    pop: &SimPopulation,
    tech: &TaskTech,
    a: f64,
    sigma_eps: f64,
    cost_scale: f64,
) -> Result<Screening> {
    if !(cost_scale > 0.0) {
        return Err(Error::domain(
            "screening_equilibrium",
            "cost_scale must be > 0",
        ));
    }
    if pop.workers.len() < 2 {
        return Err(Error::domain(
            "screening_equilibrium",
            "need at least two workers",
        ));
    }
    let rho = reliability(tech, a, sigma_eps)?;
    let weight = 1.0 - rho;

    let mut theta: Vec<f64> = pop.workers.iter().map(|w| w.theta).collect();
    theta.sort_by(f64::total_cmp);
    let n = theta.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for t in &theta {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + t);
    }
    let total = prefix[n];
    // workers k.. credential; both groups non-empty for 1 <= k < n
    let gap_at = |k: usize| {
        let m0 = prefix[k] / k as f64;
        let m1 = (total - prefix[k]) / (n - k) as f64;
        m1 - m0
    };
    let net = |k: usize| weight * gap_at(k) - cost_scale / theta[k];

    let first = (1..n).find(|&k| net(k) >= 0.0);
    let (theta_hat, k, clamp) = match first {
        None => (theta[n - 1], n, ThresholdClamp::Upper),
        Some(1) if weight * gap_at(1) >= cost_scale / theta[0] => {
            (theta[0], 0, ThresholdClamp::Lower)
        }
        Some(k) => {
            // premium is constant for thresholds in (theta[k-1], theta[k]]
            let t_star = cost_scale / (weight * gap_at(k));
            (
                t_star.clamp(theta[k - 1], theta[k]),
                k,
                ThresholdClamp::None,
            )
        }
    };
    let gap = if (1..n).contains(&k) { gap_at(k) } else { 0.0 };
    Ok(Screening {
        rho,
        wage_gap: weight * gap,
        group_ability_gap: gap,
        theta_hat,
        credential_share: (n - k) as f64 / n as f64,
        clamp,
    })
}
