//! Differential evolution (rand/1/bin) over a box.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeOptions {
    pub population: usize,
    pub generations: usize,
    pub mutation: f64,
    pub crossover: f64,
    /// Stop early once `max - min` of population fitness falls below this.
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub x: Vec<f64>,
    pub fun: f64,
    pub generations: usize,
    pub evaluations: usize,
}

/// Minimises `f` over `bounds`.
///
/// Trial vectors for a generation are drawn sequentially from one seeded
/// stream and evaluated in parallel, so the result does not depend on
/// evaluation order.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], opts: &DeOptions) -> DeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    let np = opts.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect()
        })
        .collect();
    let mut fit: Vec<f64> = pop.par_iter().map(|x| f(x)).collect();
    let mut evaluations = np;
    let mut best = argmin(&fit);
    let mut generations = 0;

    for _ in 0..opts.generations {
        let (lo_fit, hi_fit) = fit
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if hi_fit - lo_fit < opts.tol {
            break;
        }
        generations += 1;

        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let (r0, r1, r2) = three_distinct(&mut rng, np, i);
                let j_rand = rng.random_range(0..dim);
                (0..dim)
                    .map(|j| {
                        if j == j_rand || rng.random::<f64>() < opts.crossover {
                            let v = pop[r0][j] + opts.mutation * (pop[r1][j] - pop[r2][j]);
                            let (lo, hi) = bounds[j];
                            // resample between parent and the violated bound
                            if v < lo {
                                lo + rng.random::<f64>() * (pop[i][j] - lo)
                            } else if v > hi {
                                hi - rng.random::<f64>() * (hi - pop[i][j])
                            } else {
                                v
                            }
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect()
            })
            .collect();

        let trial_fit: Vec<f64> = trials.par_iter().map(|x| f(x)).collect();
        evaluations += np;
        for (i, (x, fx)) in trials.into_iter().zip(trial_fit).enumerate() {
            if fx <= fit[i] {
                pop[i] = x;
                fit[i] = fx;
            }
        }
        best = argmin(&fit);
    }

    DeResult {
        x: pop[best].clone(),
        fun: fit[best],
        generations,
        evaluations,
    }
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, &x)| if x < bv { (i, x) } else { (bi, bv) },
        )
        .0
}

fn three_distinct(rng: &mut ChaCha8Rng, n: usize, a: usize) -> (usize, usize, usize) {
    let pick = |rng: &mut ChaCha8Rng, excl: &[usize]| loop {
        let k = rng.random_range(0..n);
        if !excl.contains(&k) {
            return k;
        }
    };
    let r0 = pick(rng, &[a]);
    let r1 = pick(rng, &[a, r0]);
    let r2 = pick(rng, &[a, r0, r1]);
    (r0, r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(seed: u64) -> DeOptions {
        DeOptions {
            population: 40,
            generations: 400,
            mutation: 0.7,
            crossover: 0.9,
            tol: 1e-14,
            seed,
        }
    }

    #[test]
    fn finds_rastrigin_global_minimum() {
        let rastrigin = |x: &[f64]| {
            10.0 * x.len() as f64
                + x.iter()
                    .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                    .sum::<f64>()
        };
        let res = differential_evolution(rastrigin, &[(-5.12, 5.12); 3], &opts(3));
        assert!(res.fun < 1e-6, "{res:?}");
    }

    #[test]
    fn deterministic_under_seed() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.1).powi(4);
        let a = differential_evolution(f, &[(-1.0, 1.0); 2], &opts(11));
        let b = differential_evolution(f, &[(-1.0, 1.0); 2], &opts(11));
        assert_eq!(a, b);
    }

    #[test]
    fn stays_inside_bounds() {
        // minimum sits outside the box; best point must be on the boundary
        let f = |x: &[f64]| (x[0] - 5.0).powi(2);
        let res = differential_evolution(f, &[(0.0, 1.0)], &opts(1));
        assert!(res.x[0] <= 1.0 && res.x[0] > 0.999);
    }
}
