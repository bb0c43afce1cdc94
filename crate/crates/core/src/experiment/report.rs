//! Result tables.
//!
//! Frame error rates are reported in percent with two decimals. Relative
//! improvements are computed from the rounded rates, so a table can be
//! re-derived from its own printed numbers.
//!
//! `results.json` schema (version 1):
//!
//! ```text
//! {
//!   "format": "senmap-results",
//!   "version": 1,
//!   "seeds": [u64, ...],          // more than one for averaged tables
//!   "config_hash": "hex sha-256",
//!   "target": usize,
//!   "sources": [usize, ...],
//!   "rows": [
//!     { "method": "baseline", "dev_fer": f64, "test_fer": f64,
//!       "dev_improvement": null, "test_improvement": null },
//!     { "method": "senone-map", ..., "dev_improvement": f64, "test_improvement": f64 }
//!   ]
//! }
//! ```
//!
//! Wall-clock time is kept out of this file so repeated runs produce
//! identical bytes; see `timing.json` next to it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::nnet::{read_json, write_json};

pub const RESULTS_VERSION: u32 = 1;
const RESULTS_FORMAT: &str = "senmap-results";

/// Raw per-method frame error rates of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub dev_fer: f64,
    pub test_fer: f64,
}

/// 100 · (baseline − method) / baseline, or `None` when the baseline is 0.
pub fn relative_improvement(baseline: f64, method: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * (baseline - method) / baseline)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: Method,
    pub dev_fer: f64,
    pub test_fer: f64,
    pub dev_improvement: Option<f64>,
    pub test_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub target: usize,
    pub sources: Vec<usize>,
    pub rows: Vec<TableRow>,
}

/// On-disk form of a [`ResultsTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub format: String,
    pub version: u32,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub target: usize,
    pub sources: Vec<usize>,
    pub rows: Vec<TableRow>,
}

fn build_rows(rows: &[(Method, f64, f64)]) -> Result<Vec<TableRow>> {
    let &(_, base_dev, base_test) = rows
        .iter()
        .find(|r| r.0 == Method::Baseline)
        .ok_or(Error::MissingBaseline)?;
    let (base_dev, base_test) = (round2(base_dev), round2(base_test));
    let mut out: Vec<TableRow> = rows
        .iter()
        .map(|&(method, dev, test)| {
            let (dev, test) = (round2(dev), round2(test));
            let improve = |base, value| {
                if method == Method::Baseline {
                    None
                } else {
                    relative_improvement(base, value).map(round2)
                }
            };
            TableRow {
                method,
                dev_fer: dev,
                test_fer: test,
                dev_improvement: improve(base_dev, dev),
                test_improvement: improve(base_test, test),
            }
        })
        .collect();
    out.sort_by_key(|r| r.method);
    Ok(out)
}

/// Builds the table of one run. Fails without a baseline row.
pub fn emit_table(rows: &[ResultRow], cfg: &ExperimentConfig) -> Result<ResultsTable> {
    let raw: Vec<_> = rows.iter().map(|r| (r.method, r.dev_fer, r.test_fer)).collect();
    Ok(ResultsTable {
        seeds: vec![cfg.seed],
        config_hash: cfg.hash(),
        target: cfg.target,
        sources: cfg.sources.clone(),
        rows: build_rows(&raw)?,
    })
}

/// Averages the rates of several tables method by method and recomputes the
/// improvements from the means. Methods missing from some table are averaged
/// over the tables that have them.
pub fn mean_table(tables: &[ResultsTable]) -> Result<ResultsTable> {
    let first = tables.first().ok_or(Error::EmptyData("results tables"))?;
    let mut sums: Vec<(Method, f64, f64, usize)> = Vec::new();
    for t in tables {
        for r in &t.rows {
            match sums.iter_mut().find(|s| s.0 == r.method) {
                Some(s) => {
                    s.1 += r.dev_fer;
                    s.2 += r.test_fer;
                    s.3 += 1;
                }
                None => sums.push((r.method, r.dev_fer, r.test_fer, 1)),
            }
        }
    }
    let raw: Vec<_> = sums
        .iter()
        .map(|&(m, d, t, n)| (m, d / n as f64, t / n as f64))
        .collect();
    let mut hashes: Vec<&str> = tables.iter().map(|t| t.config_hash.as_str()).collect();
    hashes.sort_unstable();
    hashes.dedup();
    Ok(ResultsTable {
        seeds: tables.iter().flat_map(|t| t.seeds.iter().copied()).collect(),
        config_hash: if hashes.len() == 1 {
            first.config_hash.clone()
        } else {
            "mixed".to_string()
        },
        target: first.target,
        sources: first.sources.clone(),
        rows: build_rows(&raw)?,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"))
}

fn parse_opt(s: &str) -> Option<Option<f64>> {
    if s == "NA" {
        Some(None)
    } else {
        s.parse().ok().map(Some)
    }
}

impl ResultsTable {
    pub fn row(&self, method: Method) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_file(&self) -> ResultsFile {
        ResultsFile {
            format: RESULTS_FORMAT.to_string(),
            version: RESULTS_VERSION,
            seeds: self.seeds.clone(),
            config_hash: self.config_hash.clone(),
            target: self.target,
            sources: self.sources.clone(),
            rows: self.rows.clone(),
        }
    }

    pub fn from_file(file: ResultsFile) -> Result<ResultsTable> {
        if file.format != RESULTS_FORMAT {
            return Err(Error::format("results", format!("unexpected format tag {:?}", file.format)));
        }
        if file.version != RESULTS_VERSION {
            return Err(Error::format("results", format!("unsupported version {}", file.version)));
        }
        Ok(ResultsTable {
            seeds: file.seeds,
            config_hash: file.config_hash,
            target: file.target,
            sources: file.sources,
            rows: file.rows,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("results serialize") + "\n"
    }

    pub fn load(path: &Path) -> Result<ResultsTable> {
        Self::from_file(read_json(path)?)
    }

    /// Writes `results.json` and `results.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("results.json"), &self.to_file())?;
        let path = dir.join("results.txt");
        std::fs::write(&path, self.to_string()).map_err(|e| Error::io(&path, e))
    }

    /// Parses the rows back out of the text table.
    pub fn parse_text_rows(text: &str) -> Result<Vec<TableRow>> {
        let origin = Path::new("<results table>");
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if line.starts_with('#') || fields.is_empty() || fields[0] == "method" {
                continue;
            }
            let bad = |msg: &str| Error::parse(origin, idx + 1, msg.to_string());
            let [m, dev, dev_imp, test, test_imp] = fields[..] else {
                return Err(bad("expected five columns"));
            };
            rows.push(TableRow {
                method: m.parse()?,
                dev_fer: dev.parse().map_err(|_| bad("bad dev rate"))?,
                dev_improvement: parse_opt(dev_imp).ok_or_else(|| bad("bad dev improvement"))?,
                test_fer: test.parse().map_err(|_| bad("bad test rate"))?,
                test_improvement: parse_opt(test_imp).ok_or_else(|| bad("bad test improvement"))?,
            });
        }
        Ok(rows)
    }
}

impl fmt::Display for ResultsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let sources: Vec<String> = self.sources.iter().map(usize::to_string).collect();
        writeln!(f, "# frame error rates in %, relative improvement over baseline in %")?;
        writeln!(f, "# target {} sources {}", self.target, sources.join(","))?;
        writeln!(f, "# seeds {}", seeds.join(","))?;
        writeln!(f, "# config {}", self.config_hash)?;
        writeln!(f, "{:<14} {:>9} {:>9} {:>9} {:>9}", "method", "dev", "dev_rel", "test", "test_rel")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<14} {:>9.2} {:>9} {:>9.2} {:>9}",
                r.method.name(),
                r.dev_fer,
                fmt_opt(r.dev_improvement),
                r.test_fer,
                fmt_opt(r.test_improvement)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, dev: f64, test: f64) -> ResultRow {
        ResultRow {
            method,
            dev_fer: dev,
            test_fer: test,
        }
    }

    #[test]
    fn improvements_from_rounded_rates() {
        let cfg = ExperimentConfig::default();
        let t = emit_table(
            &[row(Method::SenoneMap, 29.94, 10.68), row(Method::Baseline, 33.14, 13.56)],
            &cfg,
        )
        .unwrap();
        assert_eq!(t.rows[0].method, Method::Baseline);
        assert_eq!(t.rows[0].dev_improvement, None);
        assert_eq!(t.rows[1].dev_improvement, Some(9.66));
        assert_eq!(t.rows[1].test_improvement, Some(21.24));
    }

    #[test]
    fn equal_to_baseline_is_zero() {
        let cfg = ExperimentConfig::default();
        let t = emit_table(&[row(Method::Baseline, 20.0, 20.0), row(Method::PhoneMap, 20.0, 20.0)], &cfg).unwrap();
        assert_eq!(t.row(Method::PhoneMap).unwrap().test_improvement, Some(0.0));
    }

    #[test]
    fn missing_baseline() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            emit_table(&[row(Method::PhoneMap, 1.0, 1.0)], &cfg),
            Err(Error::MissingBaseline)
        ));
    }

    #[test]
    fn zero_baseline_gives_na() {
        assert_eq!(relative_improvement(0.0, 3.0), None);
    }

    #[test]
    fn text_and_json_agree() {
        let cfg = ExperimentConfig::default();
        let t = emit_table(
            &[row(Method::Baseline, 33.1449, 13.5612), row(Method::MtdnnMapped, 29.9371, 11.6666)],
            &cfg,
        )
        .unwrap();
        let from_text = ResultsTable::parse_text_rows(&t.to_string()).unwrap();
        let from_json = ResultsTable::from_file(serde_json::from_str(&t.to_json()).unwrap()).unwrap();
        assert_eq!(from_text, t.rows);
        assert_eq!(from_json, t);
    }

    #[test]
    fn mean_of_tables() {
        let cfg = ExperimentConfig::default();
        let a = emit_table(&[row(Method::Baseline, 10.0, 20.0), row(Method::SenoneMap, 8.0, 10.0)], &cfg).unwrap();
        let b = emit_table(&[row(Method::Baseline, 30.0, 20.0), row(Method::SenoneMap, 12.0, 10.0)], &cfg).unwrap();
        let m = mean_table(&[a, b]).unwrap();
        assert_eq!(m.row(Method::Baseline).unwrap().dev_fer, 20.0);
        assert_eq!(m.row(Method::SenoneMap).unwrap().dev_improvement, Some(50.0));
        assert_eq!(m.seeds, vec![0, 0]);
    }
}
