use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pdx_cli::config::env_output_override;
use pdx_cli::report::RuntimeMetadata;
use pdx_cli::{emit_report, exit_code, parse_config_with, run_command, CliError, Command, VerificationReport};

/// Path decomposition expansion: verification runs, sweeps, and reports.
///
/// Exit status is 0 when every gate passes, 2 when a gate fails, 1 on error.
#[derive(Parser)]
#[command(name = "pdx", version)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the experiment named in the config once.
    Verify(RunArgs),
    /// Run a pdx-* experiment at several resolutions, or a Zeno convergence study.
    Sweep(RunArgs),
    /// Tabulate first-crossing and never-crossing probabilities over horizons.
    Crossing(RunArgs),
    /// Check the closed-form kernels against each other.
    Oracle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set model.grid.n_points=1024`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(cli: Cli) -> Result<VerificationReport, CliError> {
    let (command, args) = match cli.command {
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Crossing(a) => (Command::Crossing, a),
        Sub::Oracle(a) => (Command::Oracle, a),
    };
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?,
        None => String::new(),
    };
    let overrides: Vec<String> = env_output_override().into_iter().chain(args.set).collect();
    let cfg = parse_config_with(&text, command.default_experiment(), &overrides)?;

    let start = Instant::now();
    let experiments = run_command(command, &cfg)?;
    let runtime = RuntimeMetadata {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(VerificationReport::new(command.name(), cfg, experiments, runtime))
}

fn summarize(report: &VerificationReport) {
    for e in &report.experiments {
        for w in &e.warnings {
            eprintln!("warning: {}: {w}", e.label);
        }
    }
    for (e, g) in report.gates() {
        let op = match g.comparison {
            pdx_cli::report::Comparison::AtMost => "<=",
            pdx_cli::report::Comparison::AtLeast => ">=",
        };
        println!(
            "[{}] {} {}: {:.3e} {op} {:.3e}  ({})",
            if g.passed { "PASS" } else { "FAIL" },
            e.label,
            g.name,
            g.value,
            g.threshold,
            g.instantiates
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    summarize(&report);
    let out = &report.config.output;
    match emit_report(&report, &out.dir, &out.formats) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::from(exit_code(&report))
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("report follows on stdout so the run is not lost");
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::from(1)
        }
    }
}
