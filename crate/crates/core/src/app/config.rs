//! Run configuration: one JSON document, every section optional, unknown
//! keys rejected with their full path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bootstrap::{BootstrapConfig, DEFAULT_XI_RANGE};
use crate::calib::CalibConfig;
use crate::error::{Error, Result};
use crate::microsim::{EducationForms, FirmDynamicsConfig, Matching};
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS, N_PARAMS};
use crate::regress::ingest::DataPaths;
use crate::scenarios::{default_industries, IndustrySpec, DEFAULT_XI_GRID};
use crate::seed::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub targets: TargetsSection,
    pub env: EnvSection,
    pub calib: CalibSection,
    pub bootstrap: BootstrapSection,
    pub scenarios: ScenarioSection,
    pub simulate: SimulateSection,
    pub regress: Option<DataPaths>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            out: PathBuf::from("out"),
            threads: None,
            targets: TargetsSection::default(),
            env: EnvSection::default(),
            calib: CalibSection::default(),
            bootstrap: BootstrapSection::default(),
            scenarios: ScenarioSection::default(),
            simulate: SimulateSection::default(),
            regress: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetsSection {
    pub values: [f64; N_MOMENTS],
    pub ses: [f64; N_MOMENTS],
}

impl Default for TargetsSection {
    fn default() -> Self {
        let m = MomentVector::published_targets();
        Self {
            values: m.values,
            ses: m.ses,
        }
    }
}

/// Fixed environment. When `nu_loading` is absent it is re-anchored so the
/// pre-AI within-firm share equals `m3_anchor` at `anchor_at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub cv_h: f64,
    pub s_share: f64,
    pub gamma_l: f64,
    pub xi: f64,
    pub m3_anchor: f64,
    pub sigma_eps: f64,
    pub top_q: f64,
    pub a_pre: f64,
    pub a_post: f64,
    pub nu_loading: Option<f64>,
    pub anchor_at: StructuralParams,
}

impl Default for EnvSection {
    fn default() -> Self {
        let e = FixedEnv::default();
        Self {
            cv_h: e.cv_h,
            s_share: e.s_share,
            gamma_l: e.gamma_l,
            xi: e.xi,
            m3_anchor: e.m3_anchor,
            sigma_eps: e.sigma_eps,
            top_q: e.top_q,
            a_pre: e.a_pre,
            a_post: e.a_post,
            nu_loading: None,
            anchor_at: StructuralParams::reference(),
        }
    }
}

impl EnvSection {
    /// Builds the environment; the flag reports a clamped anchor.
    pub fn build(&self) -> Result<(FixedEnv, bool)> {
        let mut env = FixedEnv {
            cv_h: self.cv_h,
            s_share: self.s_share,
            gamma_l: self.gamma_l,
            xi: self.xi,
            m3_anchor: self.m3_anchor,
            sigma_eps: self.sigma_eps,
            top_q: self.top_q,
            a_pre: self.a_pre,
            a_post: self.a_post,
            nu_loading: self.nu_loading.unwrap_or(0.0),
        };
        let clamped = match self.nu_loading {
            Some(_) => false,
            None => {
                self.anchor_at.validate()?;
                env.anchor_nu_loading(&self.anchor_at)
            }
        };
        env.validate()?;
        Ok((env, clamped))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibSection {
    pub de_population: usize,
    pub de_generations: usize,
    pub de_mutation: f64,
    pub de_crossover: f64,
    pub nm_starts: usize,
    pub nm_max_iter: usize,
    pub nm_tolerance: f64,
    pub fd_step: f64,
    pub bounds: [(f64, f64); N_PARAMS],
}

impl Default for CalibSection {
    fn default() -> Self {
        let c = CalibConfig::default();
        Self {
            de_population: c.de_population,
            de_generations: c.de_generations,
            de_mutation: c.de_mutation,
            de_crossover: c.de_crossover,
            nm_starts: c.nm_starts,
            nm_max_iter: c.nm_max_iter,
            nm_tolerance: c.nm_tolerance,
            fd_step: c.fd_step,
            bounds: c.bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub b: usize,
    pub ci_level: f64,
    /// Also run the pass-through-augmented variant.
    pub augmented: bool,
    pub xi_range: (f64, f64),
}

impl Default for BootstrapSection {
    fn default() -> Self {
        Self {
            b: 1000,
            ci_level: 0.95,
            augmented: true,
            xi_range: DEFAULT_XI_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSection {
    pub eta1_range: (f64, f64),
    pub gini_range: (f64, f64),
    pub resolution: (usize, usize),
}

impl Default for ContourSection {
    fn default() -> Self {
        Self {
            eta1_range: StructuralParams::BOUNDS[3],
            gini_range: StructuralParams::BOUNDS[4],
            resolution: (60, 60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub xi_grid: Vec<f64>,
    pub eta1_grid: Vec<f64>,
    #[serde(rename = "giniK_grid", alias = "gini_grid")]
    pub gini_grid: Vec<f64>,
    pub industries: Vec<IndustrySpec>,
    pub contour: ContourSection,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            xi_grid: DEFAULT_XI_GRID.to_vec(),
            eta1_grid: (0..=16).map(|i| 0.05 + 0.05 * i as f64).collect(),
            gini_grid: (0..=15).map(|i| 0.20 + 0.05 * i as f64).collect(),
            industries: default_industries(),
            contour: ContourSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n_workers: usize,
    pub n_firms: usize,
    pub replications: usize,
    pub credential_cost: f64,
    pub capability_grid: Vec<f64>,
    pub matching: Matching,
    pub dynamics: FirmDynamicsConfig,
    pub education: EducationForms,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            n_workers: 100_000,
            n_firms: 200,
            replications: 3,
            credential_cost: 0.45,
            capability_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            matching: Matching::default(),
            dynamics: FirmDynamicsConfig::default(),
            education: EducationForms::default(),
        }
    }
}

impl RunConfig {
    /// Parses JSON, reporting the path of the first offending key.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: if e.path().to_string() == "." {
                origin.to_string()
            } else {
                format!("{origin}: {}", e.path())
            },
            msg: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        // data paths are relative to the config file, not the working directory
        if let (Some(paths), Some(dir)) = (cfg.regress.as_mut(), path.parent()) {
            for p in [&mut paths.oews_2019, &mut paths.oews_2023, &mut paths.aioe] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |path: &str, msg: String| Error::Config {
            path: path.to_string(),
            msg,
        };
        self.targets()
            .validate()
            .map_err(|e| cfg_err("targets", e.to_string()))?;
        self.env
            .build()
            .map_err(|e| cfg_err("env", e.to_string()))?;
        self.calib_config()
            .validate()
            .map_err(|e| cfg_err("calib", e.to_string()))?;
        self.bootstrap_config(false)
            .validate()
            .map_err(|e| cfg_err("bootstrap", e.to_string()))?;
        if self.threads == Some(0) {
            return Err(cfg_err("threads", "must be >= 1".into()));
        }
        let sim = &self.simulate;
        if sim.n_workers < 2 || sim.n_firms == 0 || sim.replications == 0 {
            return Err(cfg_err(
                "simulate",
                "need n_workers >= 2, n_firms >= 1, replications >= 1".into(),
            ));
        }
        sim.dynamics
            .validate()
            .map_err(|e| cfg_err("simulate.dynamics", e.to_string()))?;
        Ok(())
    }

    pub fn targets(&self) -> MomentVector {
        MomentVector {
            values: self.targets.values,
            ses: self.targets.ses,
        }
    }

    pub fn calib_config(&self) -> CalibConfig {
        let c = &self.calib;
        CalibConfig {
            de_population: c.de_population,
            de_generations: c.de_generations,
            de_mutation: c.de_mutation,
            de_crossover: c.de_crossover,
            nm_starts: c.nm_starts,
            nm_max_iter: c.nm_max_iter,
            nm_tolerance: c.nm_tolerance,
            fd_step: c.fd_step,
            seed: substream(self.seed, "calib"),
            bounds: c.bounds,
        }
    }

    pub fn bootstrap_config(&self, augmented: bool) -> BootstrapConfig {
        BootstrapConfig {
            b: self.bootstrap.b,
            seed: substream(
                self.seed,
                if augmented {
                    "bootstrap-augmented"
                } else {
                    "bootstrap"
                },
            ),
            xi_range: augmented.then_some(self.bootstrap.xi_range),
            ci_level: self.bootstrap.ci_level,
        }
    }

    pub fn microsim_seed(&self, rep: usize) -> u64 {
        substream(self.seed, &format!("microsim-{rep}"))
    }
}
