use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::ingest::Panel;
use crate::regress::ols::{ols_hc1, RegressionOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Design {
    /// 2023 cross-section.
    Levels,
    /// 2023 minus 2019.
    FD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub label: String,
    pub design: Design,
    pub fe: bool,
    pub output: RegressionOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4 {
    pub columns: Vec<Column>,
    /// Mean change in log(p90/p10) across occupations.
    pub mean_change: f64,
}

/// Exposure coefficient name in every column.
pub const EXPOSURE: &str = "aioe";

/// Five specifications of log(p90/p10) on AI exposure: levels, levels with
/// wage control and major-group effects, and three first-difference variants.
pub fn run_table4(panel: &Panel) -> Result<Table4> {
    let pairs = &panel.pairs;
    if pairs.is_empty() {
        return Err(Error::Data("empty panel".into()));
    }
    let groups: Vec<u8> = pairs
        .iter()
        .map(|p| p.major_group)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .skip(1)
        .collect();

    let levels_y: Vec<f64> = pairs.iter().map(|p| p.y2023.log_ratio()).collect();
    let fd_y: Vec<f64> = pairs
        .iter()
        .map(|p| p.y2023.log_ratio() - p.y2019.log_ratio())
        .collect();
    let log_median: Vec<f64> = pairs.iter().map(|p| p.y2023.median.ln()).collect();
    let d_log_median: Vec<f64> = pairs
        .iter()
        .map(|p| (p.y2023.median / p.y2019.median).ln())
        .collect();
    let aioe: Vec<f64> = pairs.iter().map(|p| p.aioe).collect();

    let fit = |y: &[f64], control: Option<(&str, &[f64])>, fe: bool| {
        let mut cols: Vec<(String, Vec<f64>)> = vec![
            ("const".into(), vec![1.0; pairs.len()]),
            (EXPOSURE.into(), aioe.clone()),
        ];
        if let Some((name, v)) = control {
            cols.push((name.into(), v.to_vec()));
        }
        if fe {
            for g in &groups {
                cols.push((
                    format!("group_{g:02}"),
                    pairs
                        .iter()
                        .map(|p| f64::from(u8::from(p.major_group == *g)))
                        .collect(),
                ));
            }
        }
        let x = DMatrix::from_fn(pairs.len(), cols.len(), |i, j| cols[j].1[i]);
        let names: Vec<String> = cols.into_iter().map(|c| c.0).collect();
        ols_hc1(y, &x, &names)
    };

    // label, design, optional wage control, major-group fixed effects
    type Spec<'a> = (&'a str, Design, Option<(&'a str, &'a [f64])>, bool);
    let specs: [Spec; 5] = [
        ("(1)", Design::Levels, None, false),
        (
            "(2)",
            Design::Levels,
            Some(("log_median", &log_median)),
            true,
        ),
        ("(3)", Design::FD, None, false),
        (
            "(4)",
            Design::FD,
            Some(("d_log_median", &d_log_median)),
            false,
        ),
        (
            "(5)",
            Design::FD,
            Some(("d_log_median", &d_log_median)),
            true,
        ),
    ];
    let columns = specs
        .iter()
        .map(|(label, design, control, fe)| {
            let y = match design {
                Design::Levels => &levels_y,
                Design::FD => &fd_y,
            };
            Ok(Column {
                label: label.to_string(),
                design: *design,
                fe: *fe,
                output: fit(y, *control, *fe)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table4 {
        columns,
        mean_change: fd_y.iter().sum::<f64>() / fd_y.len() as f64,
    })
}

impl Table4 {
    /// Writes the table with one row per reported statistic and one column per
    /// specification.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["row".to_string()];
        header.extend(self.columns.iter().map(|c| c.label.clone()));
        w.write_record(&header)?;

        let coef_rows = [EXPOSURE, "log_median", "d_log_median"];
        for name in coef_rows {
            let mut est = vec![name.to_string()];
            let mut se = vec![format!("{name}_se")];
            for c in &self.columns {
                match c.output.coef(name) {
                    Some(k) => {
                        est.push(format!("{:.4}{}", k.estimate, k.stars));
                        se.push(format!("({:.4})", k.se));
                    }
                    None => {
                        est.push(String::new());
                        se.push(String::new());
                    }
                }
            }
            w.write_record(&est)?;
            w.write_record(&se)?;
        }
        let row = |label: &str, f: &dyn Fn(&Column) -> String| {
            let mut r = vec![label.to_string()];
            r.extend(self.columns.iter().map(f));
            r
        };
        w.write_record(row("design", &|c| format!("{:?}", c.design)))?;
        w.write_record(row("major_group_fe", &|c| {
            if c.fe { "Yes" } else { "No" }.to_string()
        }))?;
        w.write_record(row("r_squared", &|c| format!("{:.4}", c.output.r_squared)))?;
        w.write_record(row("n", &|c| c.output.n.to_string()))?;
        w.flush()?;
        Ok(())
    }
}
