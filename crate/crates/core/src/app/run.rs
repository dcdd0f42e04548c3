use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::app::config::RunConfig;
use crate::bootstrap::{bootstrap_augmented, bootstrap_standard, BootstrapResult};
use crate::calib::{calibrate, leave_one_out, sensitivity, CalibResult};
use crate::error::{Error, Result};
use crate::microsim::{
    education_choice, firm_dynamics, oracle_checks, screening_equilibrium, simulate_population,
    wage_decomposition, write_oracle_csv, OracleRecord,
};
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS};
use crate::model::task::wage_compression;
use crate::model::TaskTech;
use crate::regress::{load_and_merge, run_table4};
use crate::scenarios::{
    contour_grid, industry_table, run_sweep, write_industry_csv, SweepParam, SweepSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Calibrate,
    Bootstrap,
    Sensitivity,
    Scenarios,
    Simulate,
    Regress,
    ReproduceAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Calibrate => "calibrate",
            Command::Bootstrap => "bootstrap",
            Command::Sensitivity => "sensitivity",
            Command::Scenarios => "scenarios",
            Command::Simulate => "simulate",
            Command::Regress => "regress",
            Command::ReproduceAll => "reproduce-all",
        }
    }

    /// Pipeline order used by `reproduce-all`.
    pub const STAGES: [Command; 6] = [
        Command::Calibrate,
        Command::Sensitivity,
        Command::Bootstrap,
        Command::Scenarios,
        Command::Simulate,
        Command::Regress,
    ];

    pub fn from_stage(name: &str) -> Option<Self> {
        Self::STAGES.into_iter().find(|c| c.name() == name)
    }
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub stage: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// SHA-256 of the resolved configuration, excluding output location and
    /// thread count.
    pub config_sha256: String,
    pub config_source: Option<String>,
    /// Worker threads in the global pool.
    pub threads: usize,
    pub stages: Vec<String>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    /// Excluded from reproducibility comparisons.
    pub wall_time_seconds: f64,
}

struct Ctx {
    cfg: RunConfig,
    env: FixedEnv,
    out: PathBuf,
    artifacts: Vec<String>,
    warnings: Vec<String>,
    calib: Option<CalibResult>,
    report: serde_json::Map<String, Value>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        fs::write(p, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    fn calibrated(&mut self) -> Result<CalibResult> {
        if let Some(c) = &self.calib {
            return Ok(c.clone());
        }
        let res = calibrate(&self.cfg.targets(), &self.env, &self.cfg.calib_config())?;
        self.calib = Some(res.clone());
        Ok(res)
    }
}

/// Resolves the configuration, runs `command`, and writes artifacts plus
/// `manifest.json` under the output directory.
pub fn run(command: Command, ov: &Overrides) -> Result<Manifest> {
    let start = Instant::now();
    let mut cfg = match &ov.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &ov.out {
        cfg.out = o.clone();
    }
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(t) = ov.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }

    let stages: Vec<Command> = match (command, &ov.stage) {
        (Command::ReproduceAll, Some(name)) => {
            vec![Command::from_stage(name).ok_or_else(|| Error::Config {
                path: "--stage".into(),
                msg: format!(
                    "unknown stage {name:?}; expected one of {}",
                    Command::STAGES.map(|c| c.name()).join(", ")
                ),
            })?]
        }
        (Command::ReproduceAll, None) => Command::STAGES.to_vec(),
        (_, Some(_)) => {
            return Err(Error::Config {
                path: "--stage".into(),
                msg: "only valid with reproduce-all".into(),
            })
        }
        (c, None) => vec![c],
    };

    let (env, clamped) = cfg.env.build()?;
    fs::create_dir_all(&cfg.out)?;
    let mut ctx = Ctx {
        out: cfg.out.clone(),
        cfg: cfg.clone(),
        env,
        artifacts: Vec::new(),
        warnings: Vec::new(),
        calib: None,
        report: serde_json::Map::new(),
    };
    if clamped {
        ctx.warnings.push(
            "residual between-firm variance anchor infeasible; nu_loading clamped to 0".into(),
        );
    }

    for stage in &stages {
        match stage {
            Command::Calibrate => stage_calibrate(&mut ctx)?,
            Command::Sensitivity => stage_sensitivity(&mut ctx)?,
            Command::Bootstrap => stage_bootstrap(&mut ctx)?,
            Command::Scenarios => stage_scenarios(&mut ctx)?,
            Command::Simulate => stage_simulate(&mut ctx)?,
            Command::Regress => {
                let direct = command == Command::Regress;
                stage_regress(&mut ctx, direct)?
            }
            Command::ReproduceAll => unreachable!("not a stage"),
        }
    }
    if command == Command::ReproduceAll {
        let report = Value::Object(std::mem::take(&mut ctx.report));
        let warnings = ctx.warnings.clone();
        ctx.write_json(
            "report.json",
            &json!({ "results": report, "warnings": warnings }),
        )?;
    }

    // hash only what determines the numbers
    let inputs = RunConfig {
        out: PathBuf::new(),
        threads: None,
        ..cfg.clone()
    };
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(&inputs)?);
    let mut artifacts = ctx.artifacts.clone();
    artifacts.sort();
    artifacts.push("manifest.json".into());
    let manifest = Manifest {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_sha256: hex::encode(hasher.finalize()),
        config_source: ov.config.as_ref().map(|p| p.display().to_string()),
        threads: rayon::current_num_threads(),
        stages: stages.iter().map(|s| s.name().to_string()).collect(),
        artifacts,
        warnings: ctx.warnings.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    fs::write(
        cfg.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

fn stage_calibrate(ctx: &mut Ctx) -> Result<()> {
    let res = ctx.calibrated()?;
    ctx.write_json("calibration.json", &res)?;
    let p = ctx.path("table1.csv");
    write_table1(&res, &p)?;

    let loo = leave_one_out(
        &ctx.cfg.targets(),
        &ctx.env,
        &ctx.cfg.calib_config(),
        N_MOMENTS,
    )?;
    ctx.write_json("leave_one_out.json", &loo)?;
    if !loo.identification.identified {
        let span = match loo.delta_gini_range {
            Some((lo, hi)) => format!("; near-exact fits span [{lo:+.4}, {hi:+.4}]"),
            None => String::new(),
        };
        ctx.warnings.push(format!(
            "dropping {} leaves the parameters underidentified; implied dGini {:+.4} is not unique{span}",
            loo.dropped_name, loo.implied_delta_gini
        ));
    }
    ctx.report.insert(
        "calibrate".into(),
        json!({
            "theta_hat": res.theta_hat,
            "j_stat": res.j_stat,
            "p_value": res.p_value,
            "derived": res.derived,
            "leave_one_out": {
                "dropped": loo.dropped_name,
                "r": loo.result.theta_hat.r,
                "implied_delta_gini": loo.implied_delta_gini,
                "identified": loo.identification.identified,
                "delta_gini_range": loo.delta_gini_range,
            }
        }),
    );
    Ok(())
}

fn write_table1(res: &CalibResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["panel", "quantity", "estimate", "target", "se"])?;
    for (name, v) in StructuralParams::NAMES.iter().zip(res.theta_hat.to_array()) {
        w.write_record(["A", name, &v.to_string(), "", ""])?;
    }
    for i in 0..N_MOMENTS {
        w.write_record([
            "B",
            MomentVector::NAMES[i],
            &res.model_moments[i].to_string(),
            &res.targets.values[i].to_string(),
            &res.targets.ses[i].to_string(),
        ])?;
    }
    let d = &res.derived;
    for (name, v) in [
        ("delta_gini", d.delta_gini),
        ("wage_compression", d.wage_compression),
        ("profit_elasticity_pre", d.profit_elasticity_pre),
        ("profit_elasticity_post", d.profit_elasticity_post),
        ("j_stat", res.j_stat),
        ("p_value", res.p_value.unwrap_or(f64::NAN)),
    ] {
        w.write_record(["C", name, &v.to_string(), "", ""])?;
    }
    w.flush()?;
    Ok(())
}

fn stage_sensitivity(ctx: &mut Ctx) -> Result<()> {
    let res = ctx.calibrated()?;
    let sens = sensitivity(
        &res.theta_hat,
        &ctx.cfg.targets(),
        &ctx.env,
        ctx.cfg.calib.fd_step,
    )?;
    ctx.write_json("sensitivity.json", &sens)?;

    let p = ctx.path("table2.csv");
    let mut w = csv::Writer::from_path(p)?;
    let mut header = vec!["panel", "row"];
    header.extend(MomentVector::NAMES);
    w.write_record(&header)?;
    for (panel, m) in [("S", &sens.s), ("elasticity", &sens.elasticities)] {
        for (name, values) in StructuralParams::NAMES.iter().zip(m.iter()) {
            let mut row = vec![panel.to_string(), name.to_string()];
            row.extend(values.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    let mut row = vec!["boundary".to_string(), "delta_gini_per_se".to_string()];
    row.extend(sens.boundary.iter().map(|v| v.to_string()));
    w.write_record(&row)?;
    w.flush()?;

    let p = ctx.path("direct_sensitivity.csv");
    let mut w = csv::Writer::from_path(p)?;
    w.write_record(["parameter", "derivative", "elasticity"])?;
    let names = StructuralParams::NAMES.iter().chain(std::iter::once(&"xi"));
    for ((name, d), e) in names.zip(sens.direct).zip(sens.direct_elasticities) {
        w.write_record([name.to_string(), d.to_string(), e.to_string()])?;
    }
    w.flush()?;
    ctx.report.insert(
        "sensitivity".into(),
        json!({ "boundary": sens.boundary, "direct": sens.direct, "direct_elasticities": sens.direct_elasticities }),
    );
    Ok(())
}

fn stage_bootstrap(ctx: &mut Ctx) -> Result<()> {
    let targets = ctx.cfg.targets();
    let calib = ctx.cfg.calib_config();
    let mut runs: Vec<(&str, BootstrapResult)> = vec![(
        "standard",
        bootstrap_standard(&targets, &ctx.env, &calib, &ctx.cfg.bootstrap_config(false))?,
    )];
    if ctx.cfg.bootstrap.augmented {
        runs.push((
            "augmented",
            bootstrap_augmented(&targets, &ctx.env, &calib, &ctx.cfg.bootstrap_config(true))?,
        ));
    }
    let mut summary = serde_json::Map::new();
    for (label, res) in &runs {
        let p = ctx.path(&format!("bootstrap_{label}_replications.csv"));
        res.write_replications_csv(&p)?;
        let p = ctx.path(&format!("bootstrap_{label}_summary.json"));
        res.write_summary_json(&p)?;
        if res.excluded > 0 {
            ctx.warnings.push(format!(
                "{label} bootstrap: {} of {} replications excluded",
                res.excluded, res.config.b
            ));
        }
        summary.insert(
            label.to_string(),
            json!({ "excluded": res.excluded, "intervals": res.intervals }),
        );
    }
    ctx.report
        .insert("bootstrap".into(), Value::Object(summary));
    Ok(())
}

fn stage_scenarios(ctx: &mut Ctx) -> Result<()> {
    let base = ctx.calibrated()?.theta_hat;
    let sc = ctx.cfg.scenarios.clone();
    let mut crossings = serde_json::Map::new();
    for (param, grid) in [
        (SweepParam::Xi, &sc.xi_grid),
        (SweepParam::Eta1, &sc.eta1_grid),
        (SweepParam::GiniK, &sc.gini_grid),
    ] {
        let table = run_sweep(&SweepSpec {
            param,
            grid: grid.clone(),
            base,
            env: ctx.env,
        })?;
        let p = ctx.path(&format!("sweep_{}.csv", param.as_str()));
        table.write_csv(&p)?;
        crossings.insert(param.as_str().to_string(), json!(table.crossings));
    }
    let rows = industry_table(&base, &ctx.env, &sc.industries)?;
    let p = ctx.path("industry.csv");
    write_industry_csv(&rows, &p)?;

    let c = &sc.contour;
    let grid = contour_grid(c.eta1_range, c.gini_range, c.resolution, &base, &ctx.env)?;
    let p = ctx.path("contour.csv");
    grid.write_csv(&p)?;
    let p = ctx.path("contour_boundary.csv");
    grid.write_boundary_csv(&p)?;
    ctx.report.insert(
        "scenarios".into(),
        json!({ "crossings": crossings, "industry": rows }),
    );
    Ok(())
}

fn stage_simulate(ctx: &mut Ctx) -> Result<()> {
    let theta = ctx.calibrated()?.theta_hat;
    let sim = ctx.cfg.simulate.clone();
    let env = ctx.env;
    let tech = TaskTech::additive(theta.r, env.cv_h);

    let mut records: Vec<OracleRecord> = Vec::new();
    let mut runs = Vec::new();
    for rep in 0..sim.replications {
        let seed = ctx.cfg.microsim_seed(rep);
        records.extend(oracle_checks(
            seed,
            sim.n_workers,
            theta.r,
            env.cv_h,
            env.sigma_eps,
        )?);
        let pop = simulate_population(sim.n_workers, sim.n_firms, env.cv_h, theta.gini_k, seed)?;

        let screening = sim
            .capability_grid
            .iter()
            .map(|&a| {
                screening_equilibrium(&pop, &tech, a, env.sigma_eps, sim.credential_cost)
                    .map(|s| json!({ "a": a, "result": s }))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut dynamics = Vec::new();
        for (label, eta) in [
            ("eta0", theta.eta0),
            ("eta1", theta.eta1),
            ("elasticity_0.95", 0.95 * (1.0 - env.gamma_l)),
            ("elasticity_1.05", 1.05 * (1.0 - env.gamma_l)),
        ] {
            let tr = firm_dynamics(&pop, &sim.dynamics, eta, env.gamma_l)?;
            dynamics.push(json!({ "label": label, "eta": eta, "trajectory": tr }));
        }
        let compression = wage_compression(theta.r, env.s_share);
        let decomposition = wage_decomposition(
            &pop,
            env.xi,
            1.0,
            compression,
            theta.eta0,
            theta.eta1,
            env.gamma_l,
            sim.matching,
        )?;
        let mut education = Vec::new();
        for t in [0.5, 1.0, 2.0] {
            for phi in [0.5, 1.0] {
                education.push(json!({ "theta": t, "phi_index": phi, "choice": education_choice(t, phi, &sim.education)? }));
            }
        }
        runs.push(json!({
            "seed": seed,
            "screening": screening,
            "dynamics": dynamics,
            "decomposition": decomposition,
            "education": education,
        }));
    }
    let p = ctx.path("oracle.csv");
    write_oracle_csv(&records, &p)?;
    ctx.write_json("simulate.json", &runs)?;
    let failed = records.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        ctx.warnings
            .push(format!("{failed} oracle checks outside tolerance"));
    }
    ctx.report.insert(
        "simulate".into(),
        json!({ "oracle_checks": records.len(), "oracle_failures": failed }),
    );
    Ok(())
}

fn stage_regress(ctx: &mut Ctx, direct: bool) -> Result<()> {
    let Some(paths) = ctx.cfg.regress.clone() else {
        if direct {
            return Err(Error::Config {
                path: "regress".into(),
                msg: "no data paths configured".into(),
            });
        }
        ctx.warnings
            .push("regress skipped: no data paths configured".into());
        return Ok(());
    };
    let missing: Vec<String> = [&paths.oews_2019, &paths.oews_2023, &paths.aioe]
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() && !direct {
        ctx.warnings
            .push(format!("regress skipped: missing {}", missing.join(", ")));
        return Ok(());
    }
    let panel = load_and_merge(&paths.oews_2019, &paths.oews_2023, &paths.aioe)?;
    let table = run_table4(&panel)?;
    let p = ctx.path("table4.csv");
    table.write_csv(&p)?;
    let manifest = json!({ "inputs": paths, "matched": panel.report.matched, "dropped": panel.report.dropped, "mean_change": table.mean_change, "columns": table.columns });
    ctx.write_json("regress.json", &manifest)?;
    let coefs: Vec<Value> = table
        .columns
        .iter()
        .map(|c| {
            let k = c.output.coef(crate::regress::table4::EXPOSURE);
            json!({ "column": c.label, "estimate": k.map(|k| k.estimate), "se": k.map(|k| k.se), "stars": k.map(|k| k.stars.clone()) })
        })
        .collect();
    ctx.report.insert(
        "regress".into(),
        json!({ "n": panel.report.matched, "exposure": coefs, "mean_change": table.mean_change }),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for c in Command::STAGES {
            assert_eq!(Command::from_stage(c.name()), Some(c));
        }
        assert_eq!(Command::from_stage("reproduce-all"), None);
    }

    #[test]
    fn stage_flag_requires_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let ov = Overrides {
            out: Some(dir.path().to_path_buf()),
            stage: Some("calibrate".into()),
            ..Overrides::default()
        };
        assert!(matches!(
            run(Command::Calibrate, &ov),
            Err(Error::Config { .. })
        ));
        let ov = Overrides {
            stage: Some("nope".into()),
            ..ov
        };
        assert!(matches!(
            run(Command::ReproduceAll, &ov),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn direct_regress_without_data_fails() {
        let dir = tempfile::tempdir().unwrap();
        let ov = Overrides {
            out: Some(dir.path().to_path_buf()),
            ..Overrides::default()
        };
        assert!(run(Command::Regress, &ov).is_err());
    }
}
