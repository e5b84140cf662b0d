use chaoswave_core::experiment::{run, validate, ExperimentConfig, RunError, Study};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Reproducible Wiener-chaos experiments on random waves.
#[derive(Debug, Parser)]
#[command(name = "chaoswave", version, about)]
struct Cli {
    /// One of: cancellation-scan, covariance-check, coefficient-oracle,
    /// asymptotics, tensor-verify, louis2-check.
    #[arg(value_parser = parse_study)]
    study: Study,
    /// TOML config, or JSON when the file ends in `.json`.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count; overrides the config.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print validation findings and exit without running.
    #[arg(long)]
    check: bool,
}

fn parse_study(s: &str) -> Result<Study, String> {
    Study::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Study::ALL.iter().map(|s| s.name()).collect();
        format!("unknown study `{s}`; expected one of {}", names.join(", "))
    })
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut config = ExperimentConfig::from_path(&cli.config)?;
    match config.study {
        Some(s) if s != cli.study => {
            return Err(RunError::Config(vec![format!("config is for `{s}` but `{}` was requested", cli.study)]));
        }
        _ => config.study = Some(cli.study),
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn fail(e: &RunError) -> ExitCode {
    match e {
        RunError::Config(findings) => {
            eprintln!("error: invalid config");
            for f in findings {
                eprintln!("  {f}");
            }
        }
        other => eprintln!("error: {other}"),
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if cli.check {
        let findings = validate(&config);
        if findings.is_empty() {
            println!("config ok");
            return ExitCode::SUCCESS;
        }
        return fail(&RunError::Config(findings.iter().map(|f| f.to_string()).collect()));
    }
    let result = run(&config);
    let checks = match &result {
        Ok(report) => report.checks.clone(),
        Err(_) => Vec::new(),
    };
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status}  {}  (value {:.4e}, limit {:.4e})", c.name, c.value, c.limit);
    }
    match result {
        Ok(report) => {
            println!(
                "wrote {} files to {} in {:.2} s",
                report.files.len(),
                report.output_dir.display(),
                report.wall_time
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
