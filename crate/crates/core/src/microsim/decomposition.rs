use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microsim::SimPopulation;
use crate::model::firm::profit_elasticity;
use crate::seed::substream;

/// How workers are assigned to firms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Matching {
    /// Rank workers by `theta_grad * h + noise` and firms by capital, then
    /// pair equal-size blocks. `noise_sd = 0` is exact assortative matching;
    /// with noise, sorting weakens as the ability gradient falls.
    Assortative { noise_sd: f64 },
    /// Keep the population's random firm assignment.
    Random,
}

impl Default for Matching {
    fn default() -> Self {
        Matching::Assortative { noise_sd: 0.35 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSplit {
    /// `Var(psi_j)`
    pub between: f64,
    /// `Var(theta_j h_i)`
    pub within: f64,
    /// `2 Cov(psi_j, theta_j h_i)`
    pub cov: f64,
    /// `Var(w)`
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub pre: VarianceSplit,
    pub post: VarianceSplit,
}

#[allow(clippy::too_many_arguments)]
/// Splits the variance of `w = psi_j + theta_j h_i` before and after AI,
/// where `psi_j = xi * eta/(1-gamma_l) * log K_j` and the ability gradient
/// moves from `theta_grad_pre` to `theta_grad_post`.
pub fn wage_decomposition(
    pop: &SimPopulation,
    xi: f64,
    theta_grad_pre: f64,
    theta_grad_post: f64,
    eta0: f64,
    eta1: f64,
    gamma_l: f64,
    matching: Matching,
) -> Result<Decomposition> {
    if !(theta_grad_pre > 0.0 && theta_grad_post > 0.0) {
        return Err(Error::domain(
            "wage_decomposition",
            "ability gradients must be > 0",
        ));
    }
    if pop.workers.is_empty() || pop.firms.is_empty() {
        return Err(Error::domain("wage_decomposition", "empty population"));
    }
    let noise = match matching {
        Matching::Assortative { noise_sd } if noise_sd > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(pop.seed, "matching"));
            let d = Normal::new(0.0, noise_sd)
                .map_err(|e| Error::domain("wage_decomposition", e.to_string()))?;
            pop.workers.iter().map(|_| d.sample(&mut rng)).collect()
        }
        Matching::Assortative { noise_sd } if noise_sd < 0.0 => {
            return Err(Error::domain("wage_decomposition", "noise_sd must be >= 0"));
        }
        _ => vec![0.0; pop.workers.len()],
    };

    let split = |grad: f64, eta: f64| -> Result<VarianceSplit> {
        let pass = xi * profit_elasticity(eta, gamma_l)?;
        let firm_of = assignment(pop, matching, grad, &noise);
        let n = pop.workers.len() as f64;
        let psi: Vec<f64> = firm_of
            .iter()
            .map(|&j| pass * pop.firms[j].k.ln())
            .collect();
        let skill: Vec<f64> = pop
            .workers
            .iter()
            .zip(&firm_of)
            .map(|(w, &j)| grad * pop.firms[j].gradient * w.h)
            .collect();
        let mp = psi.iter().sum::<f64>() / n;
        let ms = skill.iter().sum::<f64>() / n;
        let (mut vb, mut vw, mut c, mut vt) = (0.0, 0.0, 0.0, 0.0);
        for (p, s) in psi.iter().zip(&skill) {
            let (dp, ds) = (p - mp, s - ms);
            vb += dp * dp;
            vw += ds * ds;
            c += dp * ds;
            vt += (dp + ds) * (dp + ds);
        }
        Ok(VarianceSplit {
            between: vb / n,
            within: vw / n,
            cov: 2.0 * c / n,
            total: vt / n,
        })
    };
    Ok(Decomposition {
        pre: split(theta_grad_pre, eta0)?,
        post: split(theta_grad_post, eta1)?,
    })
}

fn assignment(pop: &SimPopulation, matching: Matching, grad: f64, noise: &[f64]) -> Vec<usize> {
    match matching {
        Matching::Random => pop.workers.iter().map(|w| w.firm).collect(),
        Matching::Assortative { .. } => {
            let mut workers: Vec<usize> = (0..pop.workers.len()).collect();
            let score = |i: usize| grad * pop.workers[i].h + noise[i];
            workers.sort_by(|&a, &b| score(a).total_cmp(&score(b)).then(a.cmp(&b)));
            let mut firms: Vec<usize> = (0..pop.firms.len()).collect();
            firms.sort_by(|&a, &b| pop.firms[a].k.total_cmp(&pop.firms[b].k).then(a.cmp(&b)));
            let (n, m) = (workers.len(), firms.len());
            let mut out = vec![0; n];
            for (rank, &i) in workers.iter().enumerate() {
                out[i] = firms[rank * m / n];
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microsim::simulate_population;
    use crate::model::task::wage_compression;

    fn pop() -> SimPopulation {
        simulate_population(50_000, 200, 0.35, 0.909, 21).unwrap()
    }

    #[test]
    fn identity_holds() {
        for m in [
            Matching::default(),
            Matching::Random,
            Matching::Assortative { noise_sd: 0.0 },
        ] {
            let d = wage_decomposition(&pop(), 0.2, 1.0, 0.8, 0.24, 0.33, 0.55, m).unwrap();
            for s in [d.pre, d.post] {
                assert!((s.between + s.within + s.cov - s.total).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn no_rent_sharing_no_between() {
        let d = wage_decomposition(&pop(), 0.0, 1.0, 0.8, 0.24, 0.33, 0.55, Matching::default())
            .unwrap();
        assert_eq!(d.pre.between, 0.0);
        assert_eq!(d.post.cov, 0.0);
    }

    #[test]
    fn random_matching_has_no_covariance() {
        let d =
            wage_decomposition(&pop(), 0.2, 1.0, 0.8, 0.24, 0.33, 0.55, Matching::Random).unwrap();
        let scale = 2.0 * (d.pre.between * d.pre.within).sqrt();
        assert!(d.pre.cov.abs() < 0.03 * scale, "{:?}", d.pre);
    }

    #[test]
    fn signs_at_calibrated_gradients() {
        let c = wage_compression(0.5603, 0.5);
        let d = wage_decomposition(
            &pop(),
            0.2,
            1.0,
            c,
            0.2406,
            0.3279,
            0.55,
            Matching::default(),
        )
        .unwrap();
        assert!(d.post.between > d.pre.between);
        assert!((d.post.within / d.pre.within - c * c).abs() < 1e-9);
        assert!(d.post.cov < d.pre.cov && d.post.cov >= 0.0, "{d:?}");
    }

    #[test]
    fn rejects_bad_gradient() {
        assert!(
            wage_decomposition(&pop(), 0.2, 0.0, 1.0, 0.2, 0.3, 0.55, Matching::Random).is_err()
        );
    }
}
