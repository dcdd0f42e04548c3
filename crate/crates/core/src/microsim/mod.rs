//! Monte Carlo populations that check the closed forms by brute force.

pub mod decomposition;
pub mod dynamics;
pub mod education;
pub mod oracle;
pub mod screening;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gini::gini_to_sigma;
use crate::model::params::TaskTech;

pub use decomposition::{wage_decomposition, Decomposition, Matching, VarianceSplit};
pub use dynamics::{firm_dynamics, FirmDynamicsConfig, FirmTrajectory};
pub use education::{education_choice, EducationChoice, EducationForms, HumanCapitalForm};
pub use oracle::{oracle_checks, write_oracle_csv, OracleRecord};
pub use screening::{screening_equilibrium, Screening, ThresholdClamp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub theta: f64,
    pub h: f64,
    pub e: f64,
    pub credential: bool,
    pub firm: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Firm {
    pub k: f64,
    pub profit: f64,
    pub premium: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPopulation {
    pub workers: Vec<Worker>,
    pub firms: Vec<Firm>,
    pub seed: u64,
}

/// Draws a population with lognormal ability (mean one, CV `cv_h`) and
/// lognormal capital whose Gini is `gini_k`. Workers start without
/// education, so `h = theta`, and are spread over firms uniformly at random.
pub fn simulate_population(
    n_workers: usize,
    n_firms: usize,
    cv_h: f64,
    gini_k: f64,
    seed: u64,
) -> Result<SimPopulation> {
    if n_workers == 0 || n_firms == 0 {
        return Err(Error::domain(
            "simulate_population",
            "need at least one worker and one firm",
        ));
    }
    if !(cv_h > 0.0 && cv_h.is_finite()) {
        return Err(Error::domain(
            "simulate_population",
            format!("cv_h must be > 0, got {cv_h}"),
        ));
    }
    let sigma_k = gini_to_sigma(gini_k)?;
    let s_h = (1.0 + cv_h * cv_h).ln().sqrt();
    let ability = LogNormal::new(-0.5 * s_h * s_h, s_h)
        .map_err(|e| Error::domain("simulate_population", e.to_string()))?;
    let capital = LogNormal::new(0.0, sigma_k)
        .map_err(|e| Error::domain("simulate_population", e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let workers = (0..n_workers)
        .map(|_| {
            let theta = ability.sample(&mut rng);
            Worker {
                theta,
                h: theta,
                e: 0.0,
                credential: false,
                firm: rng.random_range(0..n_firms),
            }
        })
        .collect();
    let firms = (0..n_firms)
        .map(|_| {
            let k = capital.sample(&mut rng);
            Firm {
                k,
                profit: k,
                premium: 0.0,
                gradient: 1.0,
            }
        })
        .collect();
    Ok(SimPopulation {
        workers,
        firms,
        seed,
    })
}

/// Population mean and standard deviation (denominator `n`).
pub fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Sample CV of task output `y = h phi (1 + beta a) + alpha a`.
pub fn task_output_cv(pop: &SimPopulation, tech: &TaskTech, a: f64) -> Result<f64> {
    tech.validate()?;
    if pop.workers.is_empty() {
        return Err(Error::domain("task_output_cv", "empty population"));
    }
    let scale = tech.phi * (1.0 + tech.beta * a);
    let (m, s) = mean_sd(pop.workers.iter().map(|w| w.h * scale + tech.alpha * a));
    Ok(s / m)
}

/// Mean proportional AI gain `alpha a / (phi h)` within each of `bins`
/// equal-count bins of human capital, lowest bin first.
pub fn proportional_gain_by_quantile(
    pop: &SimPopulation,
    tech: &TaskTech,
    a: f64,
    bins: usize,
) -> Vec<f64> {
    let mut h: Vec<f64> = pop.workers.iter().map(|w| w.h).collect();
    h.sort_by(f64::total_cmp);
    let bins = bins.clamp(1, h.len().max(1));
    (0..bins)
        .map(|b| {
            let lo = b * h.len() / bins;
            let hi = (b + 1) * h.len() / bins;
            let chunk = &h[lo..hi];
            chunk
                .iter()
                .map(|x| tech.alpha * a / (tech.phi * x))
                .sum::<f64>()
                / chunk.len() as f64
        })
        .collect()
}

/// Gini coefficient via the sorted-rank form.
pub fn empirical_gini(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("empirical_gini", "empty sample"));
    }
    if sample.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::domain(
            "empirical_gini",
            "values must be finite and >= 0",
        ));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let total: f64 = xs.iter().sum();
    if total == 0.0 {
        return Err(Error::domain("empirical_gini", "all values are zero"));
    }
    let n = xs.len() as f64;
    let weighted: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gini::lognormal_gini;
    use crate::model::task::cv_task;

    #[test]
    fn ability_cv_matches() {
        let pop = simulate_population(100_000, 100, 0.35, 0.909, 7).unwrap();
        let (m, s) = mean_sd(pop.workers.iter().map(|w| w.h));
        assert!((s / m / 0.35 - 1.0).abs() < 0.01);
        assert!(pop.workers.iter().all(|w| w.firm < 100 && w.h > 0.0));
        assert!(pop.firms.iter().all(|f| f.k > 0.0));
    }

    #[test]
    fn tiny_cv_collapses_ability() {
        let pop = simulate_population(1000, 3, 1e-6, 0.5, 1).unwrap();
        assert!(pop.workers.iter().all(|w| (w.h - 1.0).abs() < 1e-5));
    }

    #[test]
    fn deterministic() {
        let a = simulate_population(500, 10, 0.35, 0.9, 42).unwrap();
        let b = simulate_population(500, 10, 0.35, 0.9, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = simulate_population(500, 10, 0.35, 0.9, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(simulate_population(0, 1, 0.35, 0.5, 1).is_err());
        assert!(simulate_population(1, 1, 0.0, 0.5, 1).is_err());
        assert!(simulate_population(1, 1, 0.35, 1.0, 1).is_err());
    }

    #[test]
    fn task_cv_matches_closed_form() {
        let pop = simulate_population(100_000, 10, 0.35, 0.5, 3).unwrap();
        let tech = TaskTech::additive(0.526, 0.35);
        let emp = task_output_cv(&pop, &tech, 1.0).unwrap();
        assert!((emp / (0.35 / 1.526) - 1.0).abs() < 0.01, "{emp}");
        let (m, s) = mean_sd(pop.workers.iter().map(|w| w.h));
        assert!((task_output_cv(&pop, &tech, 0.0).unwrap() - s / m).abs() < 1e-12);
        for beta in [0.25, 0.5] {
            let t = tech.with_beta(beta);
            let emp = task_output_cv(&pop, &t, 1.0).unwrap();
            let cf = cv_task(&t, 1.0).unwrap();
            assert!((emp / cf - 1.0).abs() < 0.02, "beta {beta}: {emp} vs {cf}");
        }
    }

    #[test]
    fn proportional_gain_falls_with_ability() {
        let pop = simulate_population(20_000, 10, 0.35, 0.5, 5).unwrap();
        let gains = proportional_gain_by_quantile(&pop, &TaskTech::additive(0.526, 0.35), 1.0, 10);
        assert!(gains.windows(2).all(|w| w[1] < w[0]), "{gains:?}");
    }

    #[test]
    fn gini_exact_cases() {
        assert_eq!(empirical_gini(&[3.0; 10]).unwrap(), 0.0);
        assert!((empirical_gini(&[0.0, 2.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!(empirical_gini(&[0.0, 0.0]).is_err());
        assert!(empirical_gini(&[]).is_err());
        assert!(empirical_gini(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn gini_matches_brute_force_mean_difference() {
        let xs = [0.3, 1.7, 2.2, 0.05, 9.0, 4.4, 4.4];
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mad: f64 = xs
            .iter()
            .flat_map(|a| xs.iter().map(move |b| (a - b).abs()))
            .sum::<f64>()
            / (n * n);
        let want = mad / (2.0 * mean);
        assert!((empirical_gini(&xs).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn lognormal_sample_gini() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = LogNormal::new(0.0, 0.7416).unwrap();
        let xs: Vec<f64> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
        let g = empirical_gini(&xs).unwrap();
        assert!((g - 0.40).abs() < 0.005, "{g}");
        assert!((g - lognormal_gini(0.7416).unwrap()).abs() < 0.005);
    }
}
