use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use billiard_cli::artifacts::{output_dir, OUT_ENV};
use billiard_cli::figure::Figure;
use billiard_cli::{acceptance, run_to_dir, scenarios, CliError, Scenario};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

/// Batch runner for billiard experiments.
#[derive(Parser)]
#[command(name = "billiard-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or bundled scenario, or the whole acceptance suite.
    Run {
        /// Path to a TOML scenario, or the name of a bundled scenario.
        #[arg(required_unless_present = "all_acceptance", conflicts_with = "all_acceptance")]
        config: Option<String>,
        /// Run every bundled acceptance scenario concurrently.
        #[arg(long)]
        all_acceptance: bool,
        /// Output directory (the root directory with --all-acceptance).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a figure artifact (`*figure.json`) to SVG.
    Render {
        artifact: PathBuf,
        /// Defaults to the artifact path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate { config: String },
    /// List the bundled scenarios.
    ListScenarios,
}

fn load(config: &str) -> Result<Scenario, CliError> {
    let path = Path::new(config);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        return Scenario::from_toml(&text);
    }
    match scenarios::find(config) {
        Some(b) => b.scenario(),
        None => Err(CliError::Config {
            field: None,
            message: format!("no scenario file or bundled scenario named `{config}`"),
        }),
    }
}

fn run_one(config: &str, out: Option<PathBuf>) -> Result<bool, CliError> {
    let scenario = load(config)?;
    let dir = out.unwrap_or_else(|| output_dir(&scenario.name, scenario.output.as_deref()));
    let report = run_to_dir(&scenario, &dir)?;
    println!(
        "{}: {} artifacts in {} (manifest {})",
        scenario.name,
        report.manifest.artifacts.len(),
        dir.display(),
        report.manifest.digest()
    );
    match acceptance::evaluate(&report.outcome.summary, &report.outcome.timings) {
        Some(check) => {
            println!("{check}");
            Ok(check.passed)
        }
        None => Ok(true),
    }
}

fn run_all(out: Option<PathBuf>) -> Result<bool, CliError> {
    let root = out.unwrap_or_else(|| match std::env::var_os(OUT_ENV) {
        Some(r) if !r.is_empty() => PathBuf::from(r),
        _ => PathBuf::from("out"),
    });
    let bundled: Vec<_> = scenarios::acceptance().collect();
    let results: Vec<_> = bundled
        .par_iter()
        .map(|b| {
            let scenario = b.scenario()?;
            run_to_dir(&scenario, &root.join(&scenario.name))
        })
        .collect();
    let mut all = true;
    for (b, r) in bundled.iter().zip(results) {
        let report = r?;
        let check = acceptance::evaluate(&report.outcome.summary, &report.outcome.timings)
            .expect("acceptance scenarios have verdicts");
        all &= check.passed;
        println!("{check}");
        println!("  manifest {} {}", b.name, report.manifest.digest());
    }
    Ok(all)
}

fn render(artifact: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let text = fs::read_to_string(artifact).map_err(|source| CliError::Io { path: artifact.into(), source })?;
    let unsupported = |reason: String| CliError::Unsupported { path: artifact.into(), reason };
    let figure: Figure = serde_json::from_str(&text).map_err(|e| unsupported(format!("not a figure artifact ({e})")))?;
    if !figure.is_figure() {
        return Err(unsupported(format!("artifact kind `{}` is not drawable", figure.kind)));
    }
    let out = out.unwrap_or_else(|| artifact.with_extension("svg"));
    fs::write(&out, figure.to_svg()).map_err(|source| CliError::Io { path: out.clone(), source })?;
    println!("{}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config: Some(config), all_acceptance: false, out } => run_one(&config, out),
        Command::Run { out, .. } => run_all(out),
        Command::Render { artifact, out } => render(&artifact, out).map(|_| true),
        Command::Validate { config } => load(&config).map(|s| {
            println!("{}: valid ({} experiments)", s.name, s.experiment.len());
            true
        }),
        Command::ListScenarios => {
            for b in scenarios::BUNDLED {
                let description = b.scenario().ok().and_then(|s| s.description).unwrap_or_default();
                println!("{:<24} {:<11} {description}", b.name, if b.acceptance { "acceptance" } else { "exploratory" });
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
