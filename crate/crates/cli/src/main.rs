use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use haarint_cli::config::Format;
use haarint_cli::report::{self, Body};
use haarint_cli::{Cli, CliError, CliResult, Output, RunConfig};

const THREADS_VAR: &str = "HAARINT_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    if threads == 0 {
        return Err(CliError::Usage(format!("{THREADS_VAR} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn render(output: &Output, format: Format) -> CliResult<Vec<u8>> {
    match (format, &output.body) {
        (Format::Csv, Body::Sweep(rows)) => {
            let mut buf = vec![];
            report::write_csv(rows, &mut buf)?;
            Ok(buf)
        }
        (Format::Csv, _) => Err(CliError::Usage("CSV output is only available for sweep-h".into())),
        (Format::Json, _) => Ok(report::to_json(output)?.into_bytes()),
    }
}

fn execute() -> CliResult<i32> {
    configure_threads()?;
    let (kind, args) = Cli::parse().command.parts();
    let cfg = RunConfig::from_args(kind, args)?;
    if cfg.seed_generated {
        eprintln!("seed: {}", cfg.seed.unwrap_or_default());
    }
    let output = haarint_cli::run(&cfg)?;
    let bytes = render(&output, cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    if let Body::Suite(s) = &output.body {
        for (quantity, gate) in s.failed_gates() {
            eprintln!("FAIL {quantity}: {} (observed {:?})", gate.name, gate.observed);
        }
    }
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    match execute() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
