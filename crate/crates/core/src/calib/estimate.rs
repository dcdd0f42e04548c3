use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::calib::de::{differential_evolution, DeOptions};
use crate::calib::nelder_mead::nelder_mead;
use crate::calib::objective::{masked_objective, MomentMask, ALL_MOMENTS, PENALTY};
use crate::calib::sensitivity::jacobian;
use crate::error::{Error, Result};
use crate::model::firm::profit_elasticity;
use crate::model::gini::delta_gini;
use crate::model::moments::moment_model;
use crate::model::normal;
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS, N_PARAMS};
use crate::model::task::wage_compression;
use crate::seed::{keyed_rng, substream};

/// Search budget and finite-difference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibConfig {
    pub de_population: usize,
    pub de_generations: usize,
    pub de_mutation: f64,
    pub de_crossover: f64,
    pub nm_starts: usize,
    pub nm_max_iter: usize,
    pub nm_tolerance: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub seed: u64,
    pub bounds: [(f64, f64); N_PARAMS],
}

impl Default for CalibConfig {
    fn default() -> Self {
        Self {
            de_population: 60,
            de_generations: 400,
            de_mutation: 0.7,
            de_crossover: 0.9,
            nm_starts: 30,
            nm_max_iter: 2000,
            nm_tolerance: 1e-10,
            fd_step: 1e-4,
            seed: 20_240_601,
            bounds: StructuralParams::BOUNDS,
        }
    }
}

impl CalibConfig {
    pub fn validate(&self) -> Result<()> {
        let pos_int = |name, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    value: v as f64,
                    reason: "must be >= 1",
                })
            }
        };
        pos_int("de_population", self.de_population)?;
        pos_int("de_generations", self.de_generations)?;
        pos_int("nm_starts", self.nm_starts)?;
        pos_int("nm_max_iter", self.nm_max_iter)?;
        for (name, v) in [
            ("de_mutation", self.de_mutation),
            ("de_crossover", self.de_crossover),
            ("nm_tolerance", self.nm_tolerance),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidParam {
                    name: StructuralParams::NAMES[i],
                    value: lo,
                    reason: "bounds must satisfy lo < hi",
                });
            }
        }
        Ok(())
    }

    /// Budget used inside bootstrap replications: half the DE generations,
    /// a handful of local starts.
    pub fn reduced(&self) -> Self {
        Self {
            de_generations: (self.de_generations / 2).max(1),
            nm_starts: (self.nm_starts / 6).max(1),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub delta_gini: f64,
    pub wage_compression: f64,
    pub profit_elasticity_pre: f64,
    pub profit_elasticity_post: f64,
}

impl Derived {
    pub fn at(p: &StructuralParams, env: &FixedEnv) -> Result<Self> {
        Ok(Self {
            delta_gini: delta_gini(p, env, None)?,
            wage_compression: wage_compression(p.r, env.s_share),
            profit_elasticity_pre: profit_elasticity(p.eta0, env.gamma_l)?,
            profit_elasticity_post: profit_elasticity(p.eta1, env.gamma_l)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibResult {
    pub theta_hat: StructuralParams,
    pub objective: f64,
    /// Minimised objective; no sample-size scaling.
    pub j_stat: f64,
    /// Moments used minus parameters.
    pub df: usize,
    /// `None` when the system is exactly identified.
    pub p_value: Option<f64>,
    pub model_moments: [f64; N_MOMENTS],
    pub targets: MomentVector,
    pub moments_used: MomentMask,
    pub derived: Derived,
    /// Best objective found by the global stage.
    pub de_objective: f64,
}

/// Upper-tail chi-square probability of `j_stat` with `df` degrees of freedom.
pub fn j_pvalue(j_stat: f64, df: usize) -> Result<f64> {
    if !(j_stat >= 0.0) {
        return Err(Error::domain(
            "j_pvalue",
            format!("J must be >= 0, got {j_stat}"),
        ));
    }
    if df == 0 {
        return Err(Error::domain("j_pvalue", "df must be >= 1"));
    }
    if df == 1 {
        return Ok((2.0 * normal::sf(j_stat.sqrt())).clamp(0.0, 1.0));
    }
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::domain("j_pvalue", e.to_string()))?;
    Ok(chi.sf(j_stat).clamp(0.0, 1.0))
}

/// Full six-moment calibration: differential evolution, then Nelder–Mead
/// from `nm_starts` points around the DE best.
pub fn calibrate(targets: &MomentVector, env: &FixedEnv, cfg: &CalibConfig) -> Result<CalibResult> {
    calibrate_masked(targets, env, cfg, &ALL_MOMENTS)
}

/// Calibration on the subset of moments selected by `mask`.
pub fn calibrate_masked(
    targets: &MomentVector,
    env: &FixedEnv,
    cfg: &CalibConfig,
    mask: &MomentMask,
) -> Result<CalibResult> {
    targets.validate()?;
    env.validate()?;
    cfg.validate()?;
    let used = mask.iter().filter(|&&m| m).count();
    if used < N_PARAMS {
        return Err(Error::domain(
            "calibrate",
            format!("{used} moments cannot identify {N_PARAMS} parameters"),
        ));
    }

    let bounds = cfg.bounds;
    let f = |x: &[f64]| masked_objective(x, targets, env, mask, &bounds);

    let de = differential_evolution(
        f,
        &bounds,
        &DeOptions {
            population: cfg.de_population,
            generations: cfg.de_generations,
            mutation: cfg.de_mutation,
            crossover: cfg.de_crossover,
            tol: 1e-14,
            seed: substream(cfg.seed, "de"),
        },
    );

    let widths: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let nm_seed = substream(cfg.seed, "nelder-mead");
    let starts: Vec<Vec<f64>> = (0..cfg.nm_starts)
        .map(|k| {
            if k == 0 {
                return de.x.clone();
            }
            let mut rng = keyed_rng(nm_seed, k as u64);
            de.x.iter()
                .zip(&bounds)
                .zip(&widths)
                .map(|((x, &(lo, hi)), w)| (x + rng.random_range(-0.1..0.1) * w).clamp(lo, hi))
                .collect()
        })
        .collect();
    let step: Vec<f64> = widths.iter().map(|w| 0.02 * w).collect();

    let local: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|x0| {
            let r = nelder_mead(f, x0, &step, cfg.nm_max_iter, cfg.nm_tolerance);
            (r.x, r.fun)
        })
        .collect();
    let (mut best_x, mut best_f) =
        local
            .into_iter()
            .fold((de.x.clone(), de.fun), |acc, (x, fx)| {
                if fx < acc.1 {
                    (x, fx)
                } else {
                    acc
                }
            });

    // polish: restart from the incumbent with a fresh, smaller simplex
    let mut polish_step: Vec<f64> = widths.iter().map(|w| 1e-3 * w).collect();
    for _ in 0..4 {
        let r = nelder_mead(f, &best_x, &polish_step, cfg.nm_max_iter, cfg.nm_tolerance);
        let gain = best_f - r.fun;
        if r.fun < best_f {
            best_x = r.x;
            best_f = r.fun;
        }
        if gain <= cfg.nm_tolerance * 1e-2 {
            break;
        }
        polish_step.iter_mut().for_each(|s| *s *= 0.1);
    }

    let theta_hat = StructuralParams::from_slice(&best_x);
    let model_moments = moment_model(&theta_hat, env)?;
    let df = used - N_PARAMS;
    let p_value = if df >= 1 {
        Some(j_pvalue(best_f, df)?)
    } else {
        None
    };
    Ok(CalibResult {
        theta_hat,
        objective: best_f,
        j_stat: best_f,
        df,
        p_value,
        model_moments,
        targets: *targets,
        moments_used: *mask,
        derived: Derived::at(&theta_hat, env)?,
        de_objective: de.fun,
    })
}

/// Local identification of the retained moments at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    /// Smallest over largest eigenvalue of `G'WG`.
    pub condition_ratio: f64,
    pub identified: bool,
    /// Unit eigenvector of the weakest direction, in parameter order.
    pub weakest_direction: [f64; N_PARAMS],
    /// Derivative of ΔGini along the weakest direction.
    pub delta_gini_along_weakest: f64,
}

/// Threshold on the eigenvalue ratio below which `G'WG` is treated as singular.
pub const IDENTIFICATION_TOL: f64 = 1e-10;

pub fn identification(
    theta: &StructuralParams,
    targets: &MomentVector,
    env: &FixedEnv,
    mask: &MomentMask,
    fd_step: f64,
) -> Result<Identification> {
    let g = jacobian(theta, env, fd_step)?;
    let rows: Vec<usize> = (0..N_MOMENTS).filter(|&i| mask[i]).collect();
    let gw = DMatrix::from_fn(rows.len(), N_PARAMS, |r, c| {
        g[(rows[r], c)] / targets.ses[rows[r]]
    });
    let info = gw.transpose() * &gw;
    let eig = SymmetricEigen::new(info);
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::domain("identification", "empty information matrix"))?;
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let v = eig.eigenvectors.column(imin);
    let mut dir = [0.0; N_PARAMS];
    dir.iter_mut().zip(v.iter()).for_each(|(d, x)| *d = *x);

    let grad = crate::calib::sensitivity::delta_gini_gradient(theta, env, fd_step)?;
    let along: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
    let ratio = if lmax > 0.0 {
        lmin.max(0.0) / lmax
    } else {
        0.0
    };
    Ok(Identification {
        condition_ratio: ratio,
        identified: ratio > IDENTIFICATION_TOL,
        weakest_direction: dir,
        delta_gini_along_weakest: along,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOneOut {
    /// One-based index of the dropped moment.
    pub dropped: usize,
    pub dropped_name: String,
    pub result: CalibResult,
    pub implied_delta_gini: f64,
    pub identification: Identification,
    /// Range of ΔGini over points whose objective is within
    /// `SET_SLACK` of the minimum; `None` when locally identified.
    pub delta_gini_range: Option<(f64, f64)>,
}

/// Objective slack defining the near-exact-fit set.
pub const SET_SLACK: f64 = 1e-4;

/// Recalibrates without moment `drop_index` (one-based).
pub fn leave_one_out(
    targets: &MomentVector,
    env: &FixedEnv,
    cfg: &CalibConfig,
    drop_index: usize,
) -> Result<LeaveOneOut> {
    if !(1..=N_MOMENTS).contains(&drop_index) {
        return Err(Error::InvalidParam {
            name: "drop_index",
            value: drop_index as f64,
            reason: "must lie in 1..=6",
        });
    }
    let mut mask = ALL_MOMENTS;
    mask[drop_index - 1] = false;
    let result = calibrate_masked(targets, env, cfg, &mask)?;
    let identification = identification(&result.theta_hat, targets, env, &mask, cfg.fd_step)?;
    let delta_gini_range = if identification.identified {
        None
    } else {
        Some(delta_gini_range(targets, env, cfg, &mask, result.objective))
    };
    Ok(LeaveOneOut {
        delta_gini_range,
        dropped: drop_index,
        dropped_name: MomentVector::NAMES[drop_index - 1].to_string(),
        implied_delta_gini: result.derived.delta_gini,
        result,
        identification,
    })
}

/// Extremes of ΔGini over `{x : objective(x) <= floor + SET_SLACK}`, found by
/// penalised global search in each direction.
fn delta_gini_range(
    targets: &MomentVector,
    env: &FixedEnv,
    cfg: &CalibConfig,
    mask: &MomentMask,
    floor: f64,
) -> (f64, f64) {
    let bounds = cfg.bounds;
    let extreme = |sign: f64, stream: &str| {
        let f = |x: &[f64]| {
            let obj = masked_objective(x, targets, env, mask, &bounds);
            let excess = (obj - floor - SET_SLACK).max(0.0);
            match delta_gini(&StructuralParams::from_slice(x), env, None) {
                Ok(dg) if obj < PENALTY => sign * dg + 1e3 * excess,
                _ => PENALTY,
            }
        };
        let de = differential_evolution(
            f,
            &bounds,
            &DeOptions {
                population: cfg.de_population,
                generations: cfg.de_generations,
                mutation: cfg.de_mutation,
                crossover: cfg.de_crossover,
                tol: 1e-14,
                seed: substream(cfg.seed, stream),
            },
        );
        let step: Vec<f64> = bounds.iter().map(|(lo, hi)| 1e-3 * (hi - lo)).collect();
        let nm = nelder_mead(f, &de.x, &step, cfg.nm_max_iter, cfg.nm_tolerance);
        let x = if nm.fun < de.fun { nm.x } else { de.x };
        delta_gini(&StructuralParams::from_slice(&x), env, None).unwrap_or(f64::NAN)
    };
    (extreme(1.0, "range-lo"), extreme(-1.0, "range-hi"))
}
