//! Report data model and the three on-disk artifacts.
//!
//! Every experiment produces an [`ExperimentReport`]: a flat list of cells
//! (one summarized statistic per grid point), fitted exponents with bootstrap
//! standard errors, and named pass/fail records. The report serializes to
//! `report.json`; the cells alone flatten to `cells.csv`; `manifest.json`
//! records the config digest, master seed, and versions.
//!
//! Determinism contract: for a fixed (config, master seed) the cells, the
//! exponents, and the checks are bit-identical across reruns and across
//! thread counts. Wall-clock time is recorded but excluded from that
//! contract.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ExperimentError;
use rmt_core::numerics::stats::{mean, quantile_sorted, std_error};

/// Header line of `cells.csv`.
pub const CELLS_CSV_HEADER: &str = "experiment,cell,statistic,mean,median,q25,q75,samples,skipped";

/// Summary of one scalar statistic at one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    /// Grid-point identifier, e.g. `E=+0.0000e0,eta=1.0000e-2`.
    pub cell: String,
    /// Statistic name, e.g. `lambda_d`.
    pub statistic: String,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Number of Monte-Carlo samples behind the summary.
    pub samples: usize,
    /// Cells outside the admissible region are kept in place, zero-filled,
    /// and flagged; they never enter aggregates or fits.
    pub skipped: bool,
}

impl CellReport {
    /// Summarize a sample vector (mean, median, quartiles).
    pub fn from_samples(cell: &str, statistic: &str, values: &[f64]) -> Self {
        assert!(!values.is_empty(), "cannot summarize an empty sample");
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        CellReport {
            cell: cell.to_string(),
            statistic: statistic.to_string(),
            mean: mean(values),
            median: quantile_sorted(&sorted, 0.5),
            q25: quantile_sorted(&sorted, 0.25),
            q75: quantile_sorted(&sorted, 0.75),
            samples: values.len(),
            skipped: false,
        }
    }

    /// A single deterministic value (all four summaries coincide).
    pub fn scalar(cell: &str, statistic: &str, value: f64, samples: usize) -> Self {
        CellReport {
            cell: cell.to_string(),
            statistic: statistic.to_string(),
            mean: value,
            median: value,
            q25: value,
            q75: value,
            samples,
            skipped: false,
        }
    }

    /// Placeholder for an inadmissible grid point.
    pub fn skipped(cell: &str, statistic: &str) -> Self {
        CellReport {
            cell: cell.to_string(),
            statistic: statistic.to_string(),
            mean: 0.0,
            median: 0.0,
            q25: 0.0,
            q75: 0.0,
            samples: 0,
            skipped: true,
        }
    }

    fn csv_row(&self, experiment: &str) -> String {
        format!(
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
            csv_field(experiment),
            csv_field(&self.cell),
            csv_field(&self.statistic),
            self.mean,
            self.median,
            self.q25,
            self.q75,
            self.samples,
            self.skipped
        )
    }
}

/// Minimal RFC-4180 quoting: cell identifiers such as `E=...,eta=...`
/// contain commas and must be wrapped for the file to parse as CSV.
fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// A fitted decay exponent together with its bootstrap standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedExponent {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

/// One named acceptance rule with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub rule: String,
    pub passed: bool,
    /// Human-readable evidence (the numbers the rule compared).
    pub detail: String,
}

impl PassRecord {
    pub fn new(rule: &str, passed: bool, detail: String) -> Self {
        PassRecord { rule: rule.to_string(), passed, detail }
    }
}

/// Full output of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Echo of the resolved configuration.
    pub parameters: serde_json::Value,
    pub master_seed: u64,
    pub cells: Vec<CellReport>,
    pub exponents: Vec<FittedExponent>,
    pub checks: Vec<PassRecord>,
    /// Informational; excluded from the determinism contract.
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    /// True iff every acceptance rule passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Flatten the cells to CSV (17 significant digits, round-trippable).
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(CELLS_CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&cell.csv_row(&self.experiment));
        }
        out
    }

    /// Look up a cell by (cell id, statistic); panics if absent — reports are
    /// constructed in full before anyone queries them.
    pub fn cell(&self, cell: &str, statistic: &str) -> &CellReport {
        self.cells
            .iter()
            .find(|c| c.cell == cell && c.statistic == statistic)
            .unwrap_or_else(|| panic!("no cell ({cell}, {statistic})"))
    }

    /// Look up a check by rule name; panics if absent.
    pub fn check(&self, rule: &str) -> &PassRecord {
        self.checks
            .iter()
            .find(|c| c.rule == rule)
            .unwrap_or_else(|| panic!("no check `{rule}`"))
    }
}

/// Summarize a bootstrap sample of a fitted quantity: the point estimate is
/// the full-sample fit, the error is the standard deviation of the resampled
/// fits. Degenerate resamples (fit failures) are the caller's concern; this
/// helper only aggregates.
pub fn exponent_from_bootstrap(name: &str, value: f64, resampled: &[f64]) -> FittedExponent {
    // Sample standard deviation of the bootstrap replicates.
    let se = if resampled.len() > 1 {
        std_error(resampled) * (resampled.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    FittedExponent { name: name.to_string(), value, std_error: se }
}

/// Write `report.json`, `cells.csv`, and `manifest.json` under `out_dir`,
/// creating the directory if needed. `config_json` is the exact configuration
/// text the run was launched with; its SHA-256 goes into the manifest.
pub fn write_outputs(
    report: &ExperimentReport,
    config_json: &str,
    out_dir: &Path,
) -> Result<(), ExperimentError> {
    fs::create_dir_all(out_dir)?;
    let report_json = serde_json::to_string_pretty(report)
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    fs::write(out_dir.join("report.json"), report_json + "\n")?;
    fs::write(out_dir.join("cells.csv"), report.cells_csv())?;
    let manifest = serde_json::json!({
        "experiment": report.experiment,
        "master_seed": report.master_seed,
        "config_sha256": hex::encode(Sha256::digest(config_json.as_bytes())),
        "wall_clock_seconds": report.wall_clock_seconds,
        "versions": {
            "rmt-experiments": env!("CARGO_PKG_VERSION"),
        },
    });
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    fs::write(out_dir.join("manifest.json"), manifest_json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_report() -> ExperimentReport {
        ExperimentReport {
            experiment: "demo".to_string(),
            parameters: serde_json::json!({"n": 8}),
            master_seed: 7,
            cells: vec![
                CellReport::from_samples("a", "x", &[1.0, 2.0, 3.0, 4.0]),
                CellReport::skipped("b", "x"),
            ],
            exponents: vec![],
            checks: vec![PassRecord::new("always", true, "ok".to_string())],
            wall_clock_seconds: 0.25,
        }
    }

    #[test]
    fn summaries_match_hand_computed_quartiles() {
        let c = CellReport::from_samples("a", "x", &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.mean, 2.5);
        assert_eq!(c.median, 2.5);
        assert_eq!(c.q25, 1.75);
        assert_eq!(c.q75, 3.25);
        assert_eq!(c.samples, 4);
        assert!(!c.skipped);
    }

    #[test]
    fn csv_round_trips_through_parse() {
        let report = tiny_report();
        let csv = report.cells_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CELLS_CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "demo");
        assert_eq!(first[1], "a");
        assert_eq!(first[2], "x");
        assert_eq!(first[3].parse::<f64>().unwrap(), 2.5);
        assert_eq!(first[8], "false");
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(second[8], "true");
        assert_eq!(second[7], "0");
    }

    #[test]
    fn comma_bearing_cell_ids_are_quoted() {
        let cell = CellReport::scalar("E=+0.0e0,eta=1.0e-2", "lambda_d", 1.0, 3);
        let row = cell.csv_row("demo");
        assert!(row.starts_with("demo,\"E=+0.0e0,eta=1.0e-2\",lambda_d,"));
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("has\"quote"), "\"has\"\"quote\"");
    }

    #[test]
    fn report_json_round_trips() {
        let report = tiny_report();
        let json = serde_json::to_string(&report).unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn outputs_land_on_disk_with_the_config_digest() {
        let report = tiny_report();
        let dir = std::env::temp_dir().join(format!("rmt-report-test-{}", std::process::id()));
        write_outputs(&report, "{\"seed\":7}", &dir).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["master_seed"], 7);
        // Digest of the literal config text, independently computed.
        let expected = hex::encode(Sha256::digest(b"{\"seed\":7}"));
        assert_eq!(manifest["config_sha256"], serde_json::Value::String(expected));
        assert!(fs::read_to_string(dir.join("cells.csv")).unwrap().starts_with(CELLS_CSV_HEADER));
        assert!(fs::read_to_string(dir.join("report.json")).unwrap().contains("\"demo\""));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bootstrap_exponent_reports_the_replicate_spread() {
        // Replicates 1, 2, 3: Bessel-corrected sample SD = 1.
        let e = exponent_from_bootstrap("slope", 2.0, &[1.0, 2.0, 3.0]);
        assert_eq!(e.value, 2.0);
        assert!((e.std_error - 1.0).abs() < 1e-12);
    }

    #[test]
    fn passed_requires_every_check() {
        let mut report = tiny_report();
        assert!(report.passed());
        report.checks.push(PassRecord::new("broken", false, "nope".to_string()));
        assert!(!report.passed());
    }
}
