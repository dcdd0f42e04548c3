//! Deterministic scenario sweeps: one-parameter sweeps of ΔGini, the
//! industry table, and the regime map over `(eta1, gini_k)`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gini::{knife_edge, Regime, RegimeOutcome};
use crate::model::params::{FixedEnv, StructuralParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Xi,
    Eta1,
    #[serde(rename = "giniK", alias = "gini_k")]
    GiniK,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Xi => "xi",
            SweepParam::Eta1 => "eta1",
            SweepParam::GiniK => "giniK",
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            SweepParam::Xi => (0.0, 1.0),
            SweepParam::Eta1 => StructuralParams::BOUNDS[3],
            SweepParam::GiniK => StructuralParams::BOUNDS[4],
        }
    }

    fn apply(
        &self,
        base: &StructuralParams,
        env: &FixedEnv,
        v: f64,
    ) -> (StructuralParams, FixedEnv) {
        let (mut p, mut e) = (*base, *env);
        match self {
            SweepParam::Xi => e.xi = v,
            SweepParam::Eta1 => p.eta1 = v,
            SweepParam::GiniK => p.gini_k = v,
        }
        (p, e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub base: StructuralParams,
    pub env: FixedEnv,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::domain("run_sweep", "empty grid"));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "run_sweep",
                "grid must be strictly increasing",
            ));
        }
        let (lo, hi) = self.param.range();
        if let Some(v) = self.grid.iter().find(|v| !(**v >= lo && **v <= hi)) {
            return Err(Error::domain(
                "run_sweep",
                format!("{} = {v} outside [{lo}, {hi}]", self.param.as_str()),
            ));
        }
        Ok(())
    }
}

/// Pass-through grid matching the published sensitivity table.
pub const DEFAULT_XI_GRID: [f64; 9] = [0.0, 0.05, 0.07, 0.10, 0.15, 0.18, 0.20, 0.25, 0.30];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub delta_gini: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    /// Linearly interpolated sign changes of ΔGini between adjacent points.
    pub crossings: Vec<f64>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let rows = spec
        .grid
        .par_iter()
        .map(|&v| {
            let (p, e) = spec.param.apply(&spec.base, &spec.env, v);
            let k = knife_edge(&p, &e)?;
            Ok(SweepRow {
                value: v,
                delta_gini: k.delta_gini,
                regime: k.regime,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossings = rows
        .windows(2)
        .filter(|w| (w[0].delta_gini < 0.0) != (w[1].delta_gini < 0.0))
        .map(|w| {
            let (a, b) = (w[0].delta_gini, w[1].delta_gini);
            w[0].value + (w[1].value - w[0].value) * a / (a - b)
        })
        .collect();
    Ok(SweepTable {
        param: spec.param,
        rows,
        crossings,
    })
}

impl SweepTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["param", "value", "delta_gini", "regime"])?;
        for r in &self.rows {
            w.write_record([
                self.param.as_str().to_string(),
                r.value.to_string(),
                r.delta_gini.to_string(),
                r.regime.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndustrySpec {
    pub label: String,
    #[serde(rename = "giniK")]
    pub gini_k: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryRow {
    pub label: String,
    #[serde(rename = "giniK")]
    pub gini_k: f64,
    pub xi: f64,
    pub delta_gini: f64,
    pub regime: Regime,
}

/// Industry archetypes: asset concentration and rent-sharing pass-through.
pub fn default_industries() -> Vec<IndustrySpec> {
    [
        ("Tech / AI platforms", 0.95, 0.25),
        ("Finance / Banking", 0.85, 0.20),
        ("Healthcare", 0.70, 0.15),
        ("Manufacturing", 0.65, 0.15),
        ("Retail / Hospitality", 0.50, 0.10),
        ("Education / Government", 0.40, 0.07),
        ("U.S. baseline", 0.91, 0.20),
        ("Scandinavia-like", 0.60, 0.25),
    ]
    .into_iter()
    .map(|(label, gini_k, xi)| IndustrySpec {
        label: label.to_string(),
        gini_k,
        xi,
    })
    .collect()
}

/// ΔGini and regime per industry, holding the other structural values at `base`.
pub fn industry_table(
    base: &StructuralParams,
    env: &FixedEnv,
    rows: &[IndustrySpec],
) -> Result<Vec<IndustryRow>> {
    rows.par_iter()
        .map(|row| {
            let (glo, ghi) = StructuralParams::BOUNDS[4];
            if !(row.gini_k > 0.0 && row.gini_k < 1.0) || !(row.xi >= 0.0) {
                return Err(Error::domain(
                    "industry_table",
                    format!("{}: need giniK in (0,1) and xi >= 0", row.label),
                ));
            }
            if !(glo..=ghi).contains(&row.gini_k) {
                return Err(Error::domain(
                    "industry_table",
                    format!("{}: giniK {} outside [{glo}, {ghi}]", row.label, row.gini_k),
                ));
            }
            let p = StructuralParams {
                gini_k: row.gini_k,
                ..*base
            };
            let k = knife_edge(&p, &env.with_xi(row.xi))?;
            Ok(IndustryRow {
                label: row.label.clone(),
                gini_k: row.gini_k,
                xi: row.xi,
                delta_gini: k.delta_gini,
                regime: k.regime,
            })
        })
        .collect()
}

pub fn write_industry_csv(rows: &[IndustryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["label", "giniK", "xi", "delta_gini", "regime"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.gini_k.to_string(),
            r.xi.to_string(),
            r.delta_gini.to_string(),
            r.regime.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourCell {
    pub eta1: f64,
    pub gini_k: f64,
    pub outcome: RegimeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourGrid {
    pub eta1: Vec<f64>,
    pub gini_k: Vec<f64>,
    /// Row-major: one row per `gini_k` value.
    pub cells: Vec<ContourCell>,
    /// `(gini_k, eta1)` points where the two channels balance, one per row
    /// that changes regime.
    pub boundary: Vec<(f64, f64)>,
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Regime map on an `n_eta1 x n_gini` grid with the balance line located by
/// bisection in `eta1` along each row.
pub fn contour_grid(
    eta1_range: (f64, f64),
    gini_range: (f64, f64),
    resolution: (usize, usize),
    base: &StructuralParams,
    env: &FixedEnv,
) -> Result<ContourGrid> {
    let (ne, ng) = resolution;
    if ne < 2 || ng < 2 {
        return Err(Error::domain(
            "contour_grid",
            "resolution must be at least 2 per axis",
        ));
    }
    if !(eta1_range.0 < eta1_range.1 && gini_range.0 < gini_range.1) {
        return Err(Error::domain("contour_grid", "ranges must be increasing"));
    }
    if !(gini_range.0 > 0.0 && gini_range.1 < 1.0) {
        return Err(Error::domain(
            "contour_grid",
            "giniK range must lie in (0,1)",
        ));
    }
    let eta1 = linspace(eta1_range, ne);
    let gini_k = linspace(gini_range, ng);

    type Row = (Vec<ContourCell>, Option<(f64, f64)>);
    let rows: Vec<Row> = gini_k
        .par_iter()
        .map(|&g| {
            let at = |e: f64| {
                knife_edge(
                    &StructuralParams {
                        eta1: e,
                        gini_k: g,
                        ..*base
                    },
                    env,
                )
            };
            let cells = eta1
                .iter()
                .map(|&e| {
                    Ok(ContourCell {
                        eta1: e,
                        gini_k: g,
                        outcome: at(e)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let gap = |c: &ContourCell| c.outcome.lhs - c.outcome.rhs;
            let boundary = match cells
                .windows(2)
                .find(|w| (gap(&w[0]) < 0.0) != (gap(&w[1]) < 0.0))
            {
                Some(w) => {
                    let (mut lo, mut hi) = (w[0].eta1, w[1].eta1);
                    let lo_neg = gap(&w[0]) < 0.0;
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        let o = at(mid)?;
                        if ((o.lhs - o.rhs) < 0.0) == lo_neg {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    Some((g, 0.5 * (lo + hi)))
                }
                None => None,
            };
            Ok((cells, boundary))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(ne * ng);
    let mut boundary = Vec::new();
    for (row, b) in rows {
        cells.extend(row);
        boundary.extend(b);
    }
    Ok(ContourGrid {
        eta1,
        gini_k,
        cells,
        boundary,
    })
}

impl ContourGrid {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["eta1", "giniK", "lhs", "rhs", "regime"])?;
        for c in &self.cells {
            w.write_record([
                c.eta1.to_string(),
                c.gini_k.to_string(),
                c.outcome.lhs.to_string(),
                c.outcome.rhs.to_string(),
                c.outcome.regime.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_boundary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["giniK", "eta1"])?;
        for (g, e) in &self.boundary {
            w.write_record([g.to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
