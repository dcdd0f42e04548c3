//! Percentile bootstrap over target-moment perturbations, optionally with a
//! joint uniform draw of the rent-sharing pass-through.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::objective::PENALTY;
use crate::calib::{calibrate, CalibConfig, CalibResult};
use crate::error::{Error, Result};
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS, N_PARAMS};
use crate::seed::{keyed_rng, substream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub b: usize,
    pub seed: u64,
    /// Range of the uniform pass-through draw; `None` for the standard bootstrap.
    pub xi_range: Option<(f64, f64)>,
    pub ci_level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            b: 1000,
            seed: 20_240_602,
            xi_range: None,
            ci_level: 0.95,
        }
    }
}

/// Pass-through range used by the augmented bootstrap when none is given.
pub const DEFAULT_XI_RANGE: (f64, f64) = (0.07, 0.25);

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidParam {
                name: "b",
                value: 0.0,
                reason: "need at least one replication",
            });
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidParam {
                name: "ci_level",
                value: self.ci_level,
                reason: "must lie in (0,1)",
            });
        }
        if let Some((lo, hi)) = self.xi_range {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidParam {
                    name: "xi_range",
                    value: lo,
                    reason: "need 0 <= lo <= hi",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub rep: usize,
    pub targets: [f64; N_MOMENTS],
    pub xi: Option<f64>,
    pub theta: Option<StructuralParams>,
    pub objective: Option<f64>,
    pub delta_gini: Option<f64>,
    pub wage_compression: Option<f64>,
    /// Why the replication was dropped from the intervals.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedInterval {
    pub name: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub config: BootstrapConfig,
    pub point: CalibResult,
    pub replications: Vec<Replication>,
    pub excluded: usize,
    pub intervals: Vec<NamedInterval>,
}

/// Names of the summarised quantities, in interval order.
pub const QUANTITIES: [&str; N_PARAMS + 2] = [
    "r",
    "sigma",
    "eta0",
    "eta1",
    "gini_k",
    "delta_gini",
    "wage_compression",
];

impl BootstrapResult {
    fn column(&self, idx: usize) -> Vec<f64> {
        self.replications
            .iter()
            .filter(|r| r.failure.is_none())
            .filter_map(|r| match idx {
                i if i < N_PARAMS => r.theta.map(|t| t.to_array()[i]),
                5 => r.delta_gini,
                _ => r.wage_compression,
            })
            .collect()
    }

    /// Percentile intervals at an arbitrary level from the stored replications.
    pub fn intervals_at(&self, level: f64) -> Vec<NamedInterval> {
        let point = self.point.theta_hat.to_array();
        QUANTITIES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let iv = percentile_interval(&self.column(i), level);
                let p = match i {
                    i if i < N_PARAMS => point[i],
                    5 => self.point.derived.delta_gini,
                    _ => self.point.derived.wage_compression,
                };
                NamedInterval {
                    name: name.to_string(),
                    point: p,
                    lower: iv.lower,
                    upper: iv.upper,
                }
            })
            .collect()
    }

    pub fn interval(&self, name: &str) -> Option<&NamedInterval> {
        self.intervals.iter().find(|iv| iv.name == name)
    }

    pub fn write_replications_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = vec!["rep".into()];
        header.extend(MomentVector::NAMES.iter().map(|n| format!("target_{n}")));
        header.push("xi".into());
        header.extend(StructuralParams::NAMES.iter().map(|n| n.to_string()));
        header.extend(["objective", "delta_gini", "wage_compression", "failure"].map(String::from));
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for r in &self.replications {
            let mut row = vec![r.rep.to_string()];
            row.extend(r.targets.iter().map(|v| format!("{v}")));
            row.push(opt(r.xi));
            match r.theta {
                Some(t) => row.extend(t.to_array().iter().map(|v| format!("{v}"))),
                None => row.extend(std::iter::repeat_n(String::new(), N_PARAMS)),
            }
            row.push(opt(r.objective));
            row.push(opt(r.delta_gini));
            row.push(opt(r.wage_compression));
            row.push(r.failure.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_json(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Summary<'a> {
            b: usize,
            excluded: usize,
            ci_level: f64,
            xi_range: Option<(f64, f64)>,
            intervals: &'a [NamedInterval],
        }
        let s = Summary {
            b: self.config.b,
            excluded: self.excluded,
            ci_level: self.config.ci_level,
            xi_range: self.config.xi_range,
            intervals: &self.intervals,
        };
        std::fs::write(path, serde_json::to_string_pretty(&s)? + "\n")?;
        Ok(())
    }
}

/// Equal-tailed percentile interval with linear interpolation between order
/// statistics. Empty input gives NaN bounds.
pub fn percentile_interval(values: &[f64], level: f64) -> Interval {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return Interval {
            lower: f64::NAN,
            upper: f64::NAN,
        };
    }
    v.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Interval {
        lower: quantile_sorted(&v, tail),
        upper: quantile_sorted(&v, 1.0 - tail),
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

/// Moments bounded to [0, 1]; the remaining ones are left unclipped.
const CLIPPED: [bool; N_MOMENTS] = [true, true, true, true, false, false];

/// Bootstrap with target perturbations only.
pub fn bootstrap_standard(
    targets: &MomentVector,
    env: &FixedEnv,
    calib_cfg: &CalibConfig,
    bs_cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let cfg = BootstrapConfig {
        xi_range: None,
        ..bs_cfg.clone()
    };
    run(targets, env, calib_cfg, &cfg)
}

/// Bootstrap with target perturbations and a uniform pass-through draw per
/// replication (`DEFAULT_XI_RANGE` when the config has none).
pub fn bootstrap_augmented(
    targets: &MomentVector,
    env: &FixedEnv,
    calib_cfg: &CalibConfig,
    bs_cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let cfg = BootstrapConfig {
        xi_range: Some(bs_cfg.xi_range.unwrap_or(DEFAULT_XI_RANGE)),
        ..bs_cfg.clone()
    };
    run(targets, env, calib_cfg, &cfg)
}

fn run(
    targets: &MomentVector,
    env: &FixedEnv,
    calib_cfg: &CalibConfig,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    targets.validate()?;
    let point = calibrate(targets, env, calib_cfg)?;
    let inner = calib_cfg.reduced();
    let stream = substream(cfg.seed, "bootstrap");

    let replications: Vec<Replication> = (0..cfg.b)
        .into_par_iter()
        .map(|rep| replicate(rep, stream, targets, env, &inner, cfg.xi_range))
        .collect();
    let excluded = replications.iter().filter(|r| r.failure.is_some()).count();
    let mut out = BootstrapResult {
        config: cfg.clone(),
        point,
        replications,
        excluded,
        intervals: Vec::new(),
    };
    out.intervals = out.intervals_at(cfg.ci_level);
    Ok(out)
}

fn replicate(
    rep: usize,
    stream: u64,
    targets: &MomentVector,
    env: &FixedEnv,
    inner: &CalibConfig,
    xi_range: Option<(f64, f64)>,
) -> Replication {
    let mut rng = keyed_rng(stream, rep as u64);
    let mut values = targets.values;
    for i in 0..N_MOMENTS {
        let z: f64 = StandardNormal.sample(&mut rng);
        values[i] += targets.ses[i] * z;
        if CLIPPED[i] {
            values[i] = values[i].clamp(0.0, 1.0);
        }
    }
    let u: f64 = rng.random();
    let xi = xi_range.map(|(lo, hi)| lo + u * (hi - lo));
    let calib_seed: u64 = rng.random();

    let env_rep = match xi {
        Some(x) => env.with_xi(x),
        None => *env,
    };
    let cfg = CalibConfig {
        seed: calib_seed,
        ..inner.clone()
    };
    let perturbed = MomentVector {
        values,
        ses: targets.ses,
    };
    let failed = |msg: String| Replication {
        rep,
        targets: values,
        xi,
        theta: None,
        objective: None,
        delta_gini: None,
        wage_compression: None,
        failure: Some(msg),
    };
    match calibrate(&perturbed, &env_rep, &cfg) {
        Ok(res) if res.objective.is_finite() && res.objective < PENALTY => Replication {
            rep,
            targets: values,
            xi,
            theta: Some(res.theta_hat),
            objective: Some(res.objective),
            delta_gini: Some(res.derived.delta_gini),
            wage_compression: Some(res.derived.wage_compression),
            failure: None,
        },
        Ok(res) => failed(format!("degenerate objective {}", res.objective)),
        Err(e) => failed(e.to_string()),
    }
}
