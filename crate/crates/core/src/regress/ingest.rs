use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wages {
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
}

impl Wages {
    pub fn log_ratio(&self) -> f64 {
        (self.p90 / self.p10).ln()
    }
}

/// One occupation-year observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccRecord {
    pub soc: String,
    pub year: u16,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub aioe: f64,
    pub major_group: u8,
}

/// An occupation observed in both years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccPair {
    pub soc: String,
    pub major_group: u8,
    pub aioe: f64,
    pub y2019: Wages,
    pub y2023: Wages,
}

impl OccPair {
    pub fn records(&self) -> [OccRecord; 2] {
        let rec = |year, w: Wages| OccRecord {
            soc: self.soc.clone(),
            year,
            p10: w.p10,
            median: w.median,
            p90: w.p90,
            aioe: self.aioe,
            major_group: self.major_group,
        };
        [rec(2019, self.y2019), rec(2023, self.y2023)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Code does not match `NN-NNNN`.
    BadCode,
    /// Total or major-group summary row.
    Aggregate,
    /// Wage reported at the top-code cap (`#`).
    TopCoded,
    /// Wage suppressed (`*`, `**`) or blank.
    Suppressed,
    Unparseable,
    /// Percentiles out of order or non-positive.
    Ordering,
    /// Code appears more than once in the same file.
    Duplicate,
    /// Not present in every input file.
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MergeReport {
    /// Dropped rows per input file and reason.
    pub dropped: BTreeMap<String, BTreeMap<DropReason, usize>>,
    pub matched: usize,
}

impl MergeReport {
    fn drop(&mut self, file: &str, reason: DropReason, count: usize) {
        if count > 0 {
            *self
                .dropped
                .entry(file.to_string())
                .or_default()
                .entry(reason)
                .or_default() += count;
        }
    }

    pub fn total(&self, reason: DropReason) -> usize {
        self.dropped.values().filter_map(|m| m.get(&reason)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    /// Sorted by occupation code.
    pub pairs: Vec<OccPair>,
    pub report: MergeReport,
}

const OEWS_COLUMNS: [&str; 4] = ["OCC_CODE", "A_PCT10", "A_MEDIAN", "A_PCT90"];

fn find_column(headers: &csv::StringRecord, file: &Path, names: &[&str]) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
        .ok_or_else(|| Error::MissingColumn {
            file: file.to_path_buf(),
            column: names[0].to_string(),
        })
}

fn valid_code(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 7
        && b[2] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 2 || c.is_ascii_digit())
}

fn parse_wage(raw: &str) -> std::result::Result<f64, DropReason> {
    let s = raw.trim();
    match s {
        "#" => Err(DropReason::TopCoded),
        "" | "*" | "**" => Err(DropReason::Suppressed),
        _ => s
            .replace(',', "")
            .parse::<f64>()
            .map_err(|_| DropReason::Unparseable),
    }
}

/// Keeps codes that occur exactly once; the rest are counted as duplicates.
fn dedupe<T>(file: &str, rows: Vec<(String, T)>, report: &mut MergeReport) -> HashMap<String, T> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for (k, _) in &rows {
        *counts.entry(k.clone()).or_default() += 1;
    }
    let mut out = HashMap::new();
    for (k, v) in rows {
        if counts[&k] == 1 {
            out.insert(k, v);
        } else {
            report.drop(file, DropReason::Duplicate, 1);
        }
    }
    out
}

fn read_oews(path: &Path, report: &mut MergeReport) -> Result<HashMap<String, Wages>> {
    let label = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = OEWS_COLUMNS
        .iter()
        .map(|c| find_column(&headers, path, &[c]))
        .collect::<Result<_>>()?;
    let group = find_column(&headers, path, &["O_GROUP"]).ok();

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let code = rec.get(idx[0]).unwrap_or("").trim().to_string();
        if !valid_code(&code) {
            report.drop(&label, DropReason::BadCode, 1);
            continue;
        }
        let aggregate = match group.and_then(|g| rec.get(g)) {
            Some(g) => !g.trim().eq_ignore_ascii_case("detailed"),
            None => code.ends_with("-0000"),
        };
        if aggregate {
            report.drop(&label, DropReason::Aggregate, 1);
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, DropReason> = idx[1..]
            .iter()
            .map(|&i| parse_wage(rec.get(i).unwrap_or("")))
            .collect();
        match parsed {
            Err(reason) => report.drop(&label, reason, 1),
            Ok(v) => {
                let w = Wages {
                    p10: v[0],
                    median: v[1],
                    p90: v[2],
                };
                if !(w.p10 > 0.0 && w.p10 <= w.median && w.median <= w.p90) {
                    report.drop(&label, DropReason::Ordering, 1);
                } else {
                    rows.push((code, w));
                }
            }
        }
    }
    Ok(dedupe(&label, rows, report))
}

fn read_aioe(path: &Path, report: &mut MergeReport) -> Result<HashMap<String, f64>> {
    let label = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let soc = find_column(&headers, path, &["SOC", "SOC Code"])?;
    let score = find_column(&headers, path, &["score", "AIOE"])?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let code = rec.get(soc).unwrap_or("").trim().to_string();
        if !valid_code(&code) {
            report.drop(&label, DropReason::BadCode, 1);
            continue;
        }
        match rec.get(score).unwrap_or("").trim().parse::<f64>() {
            Ok(v) if v.is_finite() => rows.push((code, v)),
            _ => report.drop(&label, DropReason::Unparseable, 1),
        }
    }
    Ok(dedupe(&label, rows, report))
}

/// Inner join of both wage years with the exposure index on occupation code.
pub fn load_and_merge(oews_2019: &Path, oews_2023: &Path, aioe: &Path) -> Result<Panel> {
    for p in [oews_2019, oews_2023, aioe] {
        if !p.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} not found", p.display()),
            )));
        }
    }
    let mut report = MergeReport::default();
    let w19 = read_oews(oews_2019, &mut report)?;
    let w23 = read_oews(oews_2023, &mut report)?;
    let exp = read_aioe(aioe, &mut report)?;

    let mut pairs: Vec<OccPair> = w19
        .iter()
        .filter_map(|(code, a)| {
            let b = w23.get(code)?;
            let x = exp.get(code)?;
            Some(OccPair {
                soc: code.clone(),
                major_group: code[..2].parse().ok()?,
                aioe: *x,
                y2019: *a,
                y2023: *b,
            })
        })
        .collect();
    pairs.sort_by(|a, b| a.soc.cmp(&b.soc));

    let unmatched =
        |file: &Path, keys: &mut dyn Iterator<Item = &String>, report: &mut MergeReport| {
            let n = keys
                .filter(|k| pairs.binary_search_by(|p| p.soc.as_str().cmp(k)).is_err())
                .count();
            report.drop(&file.display().to_string(), DropReason::Unmatched, n);
        };
    unmatched(oews_2019, &mut w19.keys(), &mut report);
    unmatched(oews_2023, &mut w23.keys(), &mut report);
    unmatched(aioe, &mut exp.keys(), &mut report);
    report.matched = pairs.len();

    if pairs.is_empty() {
        return Err(Error::EmptyMerge {
            diagnostics: format!(
                "kept {} codes in {}, {} in {}, {} in {}",
                w19.len(),
                oews_2019.display(),
                w23.len(),
                oews_2023.display(),
                exp.len(),
                aioe.display()
            ),
        });
    }
    Ok(Panel { pairs, report })
}

/// Paths of the three inputs, as stored in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub oews_2019: PathBuf,
    pub oews_2023: PathBuf,
    pub aioe: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name)
    }

    #[test]
    fn fixture_filters_ordering_violations() {
        let panel = load_and_merge(
            &fixture("oews_2019.csv"),
            &fixture("oews_2023.csv"),
            &fixture("aioe.csv"),
        )
        .unwrap();
        assert_eq!(panel.pairs.len(), 10);
        assert_eq!(panel.report.total(DropReason::Ordering), 2);
        assert!(panel.pairs.windows(2).all(|w| w[0].soc < w[1].soc));
    }

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn reason_codes() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let a = write(
            d,
            "a.csv",
            "OCC_CODE,O_GROUP,A_PCT10,A_MEDIAN,A_PCT90\n\
             00-0000,total,20000,40000,90000\n\
             11-1011,detailed,50000,150000,#\n\
             11-2021,detailed,*,90000,150000\n\
             13-2011,detailed,\"40,000\",\"70,000\",\"120,000\"\n\
             15-1252,detailed,60000,110000,170000\n\
             15-1252,detailed,60000,110000,170000\n\
             bad,detailed,1,2,3\n",
        );
        let b = write(
            d,
            "b.csv",
            "occ_code,a_pct10,a_median,a_pct90\n13-2011,42000,72000,125000\n17-2051,50000,80000,120000\n",
        );
        let x = write(d, "x.csv", "SOC,score\n13-2011,0.8\n17-2051,0.1\n");
        let p = load_and_merge(&a, &b, &x).unwrap();
        assert_eq!(p.pairs.len(), 1);
        assert_eq!(p.pairs[0].y2019.p10, 40000.0);
        let r = &p.report;
        for (reason, n) in [
            (DropReason::Aggregate, 1),
            (DropReason::TopCoded, 1),
            (DropReason::Suppressed, 1),
            (DropReason::Duplicate, 2),
            (DropReason::BadCode, 1),
            (DropReason::Unmatched, 2),
        ] {
            assert_eq!(r.total(reason), n, "{reason:?}");
        }
    }

    #[test]
    fn missing_column_named() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let a = write(d, "a.csv", "OCC_CODE,A_PCT10,A_PCT90\n11-1011,1,2\n");
        let x = write(d, "x.csv", "SOC,score\n");
        match load_and_merge(&a, &a, &x) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "A_MEDIAN"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_exposure_file_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let x = write(dir.path(), "x.csv", "SOC,score\n");
        let err =
            load_and_merge(&fixture("oews_2019.csv"), &fixture("oews_2023.csv"), &x).unwrap_err();
        assert!(matches!(err, Error::EmptyMerge { .. }));
    }

    #[test]
    fn row_order_does_not_matter() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let body = std::fs::read_to_string(fixture("oews_2019.csv")).unwrap();
        let mut lines: Vec<&str> = body.lines().collect();
        let header = lines.remove(0);
        lines.reverse();
        let flipped = write(d, "flip.csv", &format!("{header}\n{}\n", lines.join("\n")));
        let a = load_and_merge(
            &fixture("oews_2019.csv"),
            &fixture("oews_2023.csv"),
            &fixture("aioe.csv"),
        )
        .unwrap();
        let b = load_and_merge(&flipped, &fixture("oews_2023.csv"), &fixture("aioe.csv")).unwrap();
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(
            a.report.total(DropReason::Ordering),
            b.report.total(DropReason::Ordering)
        );
    }
}
