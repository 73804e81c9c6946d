//! Verification reports and their JSON / CSV serializations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentKind, ReportFormat, RunConfig};
use crate::error::CliError;

/// Current report layout. Bumped on every incompatible change.
pub const FORMAT_VERSION: u32 = 1;

/// JSON schema for [`FORMAT_VERSION`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report-v1.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// One labelled pass/fail decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    /// The module invariant or acceptance criterion this gate instantiates.
    pub instantiates: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Gate {
    pub fn at_most(name: &str, instantiates: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            instantiates: instantiates.into(),
            value,
            threshold,
            comparison: Comparison::AtMost,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: &str, instantiates: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            instantiates: instantiates.into(),
            value,
            threshold,
            comparison: Comparison::AtLeast,
            passed: value >= threshold,
        }
    }
}

/// Column-oriented numeric table; empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match table {}", self.name);
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().copied().map(Some).collect());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub label: String,
    pub scalars: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
}

impl ExperimentResult {
    pub fn new(experiment: ExperimentKind, label: impl Into<String>) -> Self {
        Self {
            experiment,
            label: label.into(),
            scalars: BTreeMap::new(),
            tables: Vec::new(),
            gates: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

/// Facts about the run that may differ between identical configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeMetadata {
    pub tool_version: String,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format_version: u32,
    pub command: String,
    /// Effective config, defaults included.
    pub config: RunConfig,
    pub experiments: Vec<ExperimentResult>,
    pub passed: bool,
    pub runtime: RuntimeMetadata,
}

impl VerificationReport {
    pub fn new(command: &str, config: RunConfig, experiments: Vec<ExperimentResult>, runtime: RuntimeMetadata) -> Self {
        let passed = experiments.iter().all(|e| e.passed());
        Self {
            format_version: FORMAT_VERSION,
            command: command.into(),
            config,
            experiments,
            passed,
            runtime,
        }
    }

    pub fn gates(&self) -> impl Iterator<Item = (&ExperimentResult, &Gate)> {
        self.experiments.iter().flat_map(|e| e.gates.iter().map(move |g| (e, g)))
    }

    /// Everything except [`RuntimeMetadata`], as canonical JSON.
    pub fn numeric_payload(&self) -> String {
        serde_json::to_string(&(&self.format_version, &self.command, &self.config, &self.experiments, &self.passed))
            .expect("report serializes")
    }
}

/// CSV file name for one table.
pub fn table_file_name(stem: &str, experiment: &ExperimentResult, table: &Table) -> String {
    format!("{stem}_{}_{}.csv", experiment.label, table.name)
}

fn format_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| format_cell(*c))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads a CSV written by [`emit_report`] back into a table named `name`.
pub fn read_table(path: &Path, name: &str) -> Result<Table, CliError> {
    let err = |message: String| CliError::Io {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let columns: Vec<String> = r.headers().map_err(|e| err(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row = rec
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|e| err(format!("bad cell `{cell}`: {e}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table {
        name: name.into(),
        columns,
        rows,
    })
}

/// Writes the report in each requested format under `dir` and returns the files written.
///
/// Refuses reports with no experiments. On failure the report is untouched and
/// the caller still owns it.
pub fn emit_report(report: &VerificationReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, CliError> {
    if report.experiments.is_empty() {
        return Err(CliError::EmptyReport);
    }
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let stem = &report.config.output.stem;
    let mut written = Vec::new();
    for format in formats {
        match format {
            ReportFormat::Json => {
                let path = dir.join(format!("{stem}.json"));
                let text = serde_json::to_string_pretty(report).expect("report serializes");
                fs::write(&path, text + "\n").map_err(|e| CliError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                written.push(path);
            }
            ReportFormat::CsvBundle => {
                for e in &report.experiments {
                    for t in &e.tables {
                        let path = dir.join(table_file_name(stem, e, t));
                        write_table(&path, t)?;
                        written.push(path);
                    }
                }
            }
        }
    }
    Ok(written)
}
