use std::fs;
use std::path::{Path, PathBuf};

use pdx_cli::config::parse_config_with;
use pdx_cli::report::{read_table, table_file_name, RuntimeMetadata};
use pdx_cli::{emit_report, run_command, CliError, Command, ExperimentKind, ReportFormat, VerificationReport, REPORT_SCHEMA};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str, overrides: &[&str]) -> pdx_cli::RunConfig {
    let text = fs::read_to_string(configs_dir().join(name)).unwrap();
    let sets: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_config_with(&text, None, &sets).unwrap()
}

fn report_for(command: Command, cfg: pdx_cli::RunConfig) -> VerificationReport {
    let experiments = run_command(command, &cfg).unwrap();
    let runtime = RuntimeMetadata {
        tool_version: "test".into(),
        threads: 1,
        elapsed_seconds: 0.0,
    };
    VerificationReport::new(command.name(), cfg, experiments, runtime)
}

fn validate(path: &Path) {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let instance: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    if let Err(errors) = compiled.validate(&instance) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations:\n{}", msgs.join("\n"));
    };
}

#[test]
fn bundled_configs_parse() {
    let mut seen = Vec::new();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = parse_config_with(&text, None, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen.push(cfg.experiment);
    }
    for kind in ExperimentKind::ALL {
        assert!(seen.contains(&kind), "no bundled config for {kind}");
    }
}

#[test]
fn resolution_identity_report_passes_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = report_for(Command::Verify, load("resolution-identity.toml", &[]));
    assert!(report.passed);
    let gate = &report.experiments[0].gates[0];
    assert_eq!(gate.name, "identity_residual");
    assert!(gate.value <= 1e-11, "{gate:?}");
    let written = emit_report(&report, dir.path(), &[ReportFormat::Json, ReportFormat::CsvBundle]).unwrap();
    assert_eq!(written.len(), 2);
    validate(&written[0]);
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&written[0]).unwrap()).unwrap();
    assert_eq!(echoed["config"]["model"]["grid"]["n_points"], 64);
    assert_eq!(echoed["config"]["numeric"]["tolerances"]["identity"], 1e-11);
}

#[test]
fn every_command_emits_schema_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        (Command::Oracle, load("oracle-suite.toml", &["output.stem=oracle"])),
        (
            Command::Crossing,
            load(
                "crossing-distribution.toml",
                &["output.stem=crossing", "model.grid.n_points=256", "numeric.crossing.horizons=[1.0, 2.0]"],
            ),
        ),
        (
            Command::Sweep,
            load(
                "pdx-momentum.toml",
                &["output.stem=momentum", "numeric.sweep.n_points=[256, 512]", "numeric.sweep.quad_nodes=[65, 129]"],
            ),
        ),
    ];
    for (command, cfg) in runs {
        let report = report_for(command, cfg);
        let written = emit_report(&report, dir.path(), &[ReportFormat::Json]).unwrap();
        validate(&written[0]);
    }
}

#[test]
fn convergence_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let report = report_for(Command::Sweep, load("zeno-convergence.toml", &["model.grid.n_points=96"]));
    emit_report(&report, dir.path(), &[ReportFormat::CsvBundle]).unwrap();
    let exp = &report.experiments[0];
    let table = &exp.tables[0];
    assert_eq!(table.columns, ["K", "delta_t", "error", "order"]);
    assert_eq!(table.rows[0][3], None);
    let path = dir.path().join(table_file_name("report", exp, table));
    assert_eq!(&read_table(&path, &table.name).unwrap(), table);
}

#[test]
fn crossing_csv_has_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("crossing-distribution.toml", &["model.grid.n_points=256", "numeric.quadrature.n_nodes=65"]);
    let report = report_for(Command::Crossing, cfg);
    emit_report(&report, dir.path(), &[ReportFormat::CsvBundle]).unwrap();
    let exp = &report.experiments[0];
    let table = &exp.tables[0];
    assert_eq!(table.columns, ["t1", "t2", "p_cross", "p_never", "deviation"]);
    assert_eq!(table.rows.len(), 6);
    let back = read_table(&dir.path().join(table_file_name("report", exp, table)), "distribution").unwrap();
    assert_eq!(&back, table);
}

#[test]
fn identical_configs_give_identical_payloads() {
    let cfg = load("pdx-position.toml", &["model.grid.n_points=192", "numeric.quadrature.n_nodes=33"]);
    let a = report_for(Command::Verify, cfg.clone());
    let b = report_for(Command::Verify, cfg);
    assert_eq!(a.numeric_payload(), b.numeric_payload());
}

#[test]
fn empty_reports_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = report_for(Command::Oracle, load("oracle-suite.toml", &[]));
    report.experiments.clear();
    let err = emit_report(&report, dir.path(), &[ReportFormat::Json]).unwrap_err();
    assert!(matches!(err, CliError::EmptyReport));
    assert!(err.to_string().contains("no experiments"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let report = report_for(Command::Oracle, load("oracle-suite.toml", &[]));
    let err = emit_report(&report, &blocker.join("sub"), &[ReportFormat::Json]).unwrap_err();
    assert!(matches!(err, CliError::Io { .. }), "{err}");
    assert!(report.passed);
}
