use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::microsim::{empirical_gini, mean_sd, simulate_population, task_output_cv};
use crate::model::gini::lognormal_gini;
use crate::model::params::TaskTech;
use crate::model::task::{cv_task, reliability};

/// One Monte Carlo check of a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub seed: u64,
    pub n: usize,
    pub check: String,
    pub parameters: String,
    pub empirical: f64,
    pub closed_form: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleRecord {
    fn new(
        seed: u64,
        n: usize,
        check: &str,
        parameters: String,
        empirical: f64,
        closed_form: f64,
        tol: f64,
    ) -> Self {
        let rel_error = (empirical - closed_form).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
        Self {
            seed,
            n,
            check: check.to_string(),
            parameters,
            empirical,
            closed_form,
            rel_error,
            tolerance: tol,
            pass: rel_error <= tol,
        }
    }
}

/// Runs the standard battery: task-output CV for several complementarity
/// levels, the lognormal Gini of ability, and plug-in signal reliability.
pub fn oracle_checks(
    seed: u64,
    n: usize,
    r: f64,
    cv_h: f64,
    sigma_eps: f64,
) -> Result<Vec<OracleRecord>> {
    let pop = simulate_population(n, 1, cv_h, 0.5, seed)?;
    let mut out = Vec::new();
    for (beta, tol) in [(0.0, 0.01), (0.25, 0.02), (0.5, 0.02)] {
        let tech = TaskTech::additive(r, cv_h).with_beta(beta);
        for a in [0.0, 1.0] {
            out.push(OracleRecord::new(
                seed,
                n,
                "task_output_cv",
                format!("r={r};beta={beta};a={a};cv_h={cv_h}"),
                task_output_cv(&pop, &tech, a)?,
                cv_task(&tech, a)?,
                tol,
            ));
        }
    }

    let h: Vec<f64> = pop.workers.iter().map(|w| w.h).collect();
    let s_h = (1.0 + cv_h * cv_h).ln().sqrt();
    out.push(OracleRecord::new(
        seed,
        n,
        "empirical_gini",
        format!("sigma_log={s_h:.6}"),
        empirical_gini(&h)?,
        lognormal_gini(s_h)?,
        0.0125,
    ));

    // rho moves at most twice as fast as the variance estimate, whose relative
    // standard error is sqrt((kurtosis - 1) / n); allow four of those.
    let (m_h, s_h_emp) = mean_sd(h.iter().copied());
    let kurt = h.iter().map(|x| ((x - m_h) / s_h_emp).powi(4)).sum::<f64>() / n as f64;
    let rho_tol = 4.0 * 2.0 * ((kurt - 1.0) / n as f64).sqrt();
    let tech = TaskTech::additive(r, cv_h);
    for a in [0.0, 1.0] {
        let (m, s) = mean_sd(h.iter().map(|x| x * tech.phi + tech.alpha * a));
        let plug_in = TaskTech {
            mu_h: (m - tech.alpha * a) / tech.phi,
            sigma_h: s / tech.phi,
            ..tech
        };
        out.push(OracleRecord::new(
            seed,
            n,
            "reliability",
            format!("r={r};a={a};sigma_eps={sigma_eps}"),
            reliability(&plug_in, a, sigma_eps)?,
            reliability(&tech, a, sigma_eps)?,
            rho_tol,
        ));
    }
    Ok(out)
}

pub fn write_oracle_csv(records: &[OracleRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_and_writes() {
        let recs = oracle_checks(5, 100_000, 0.526, 0.35, 0.35).unwrap();
        assert!(recs.iter().all(|r| r.pass), "{recs:#?}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oracle.csv");
        write_oracle_csv(&recs, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with(
            "seed,n,check,parameters,empirical,closed_form,rel_error,tolerance,pass\n"
        ));
        assert_eq!(text.lines().count(), recs.len() + 1);
    }
}
