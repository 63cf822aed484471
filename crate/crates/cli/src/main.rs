use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use solvgeo_cli::{error_report, report, run_text, CliError, Command, Defaults, DEFAULT_TOL, EXIT_PARSE};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

/// Canonical forms, curvature and soliton checks for left-invariant metrics
/// on the solvable group of complex hyperbolic space.
#[derive(Debug, Parser)]
#[command(name = "solvgeo", version)]
struct Args {
    /// canonicalize, curvature, ricci, einstein, isometric, soliton-check,
    /// extend-nilsoliton, random-metric or self-test
    #[arg(long)]
    command: Option<String>,

    #[arg(long)]
    n: Option<usize>,

    #[arg(long, env = "SOLVGEO_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,

    #[arg(long)]
    seed: Option<u64>,

    /// Job document, `-` for stdin. Omit for commands that need no input.
    #[arg(long)]
    input: Option<String>,

    /// Report destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    output: String,

    /// Worker threads for batch documents.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn read_input(spec: &Option<String>) -> Result<Option<String>, CliError> {
    match spec.as_deref() {
        None => Ok(None),
        Some("-") => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Parse(format!("stdin: {e}")))?;
            Ok(Some(buf))
        }
        Some(path) => fs::read_to_string(PathBuf::from(path))
            .map(Some)
            .map_err(|e| CliError::Parse(format!("{path}: {e}"))),
    }
}

fn write_output(dest: &str, text: &str) -> io::Result<()> {
    if dest == "-" {
        io::stdout().lock().write_all(text.as_bytes())
    } else {
        fs::write(dest, text)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Format::Json = args.format;

    let command = match args.command.as_deref().map(str::parse::<Command>).transpose() {
        Ok(c) => c,
        Err(e) => return finish(&args.output, e.exit_code(), &error_report(None, &e)),
    };
    let defaults = Defaults {
        command,
        n: args.n,
        tol: args.tol,
        seed: args.seed,
        jobs: args.jobs.max(1),
    };
    let outcome = match read_input(&args.input) {
        Ok(text) => run_text(text.as_deref(), &defaults),
        Err(e) => return finish(&args.output, EXIT_PARSE, &error_report(command, &e)),
    };
    finish(&args.output, outcome.status, &outcome.report)
}

fn finish(dest: &str, status: i32, value: &serde_json::Value) -> ExitCode {
    if let Err(e) = write_output(dest, &report::to_string(value)) {
        eprintln!("solvgeo: cannot write {dest}: {e}");
        return ExitCode::from(1);
    }
    if status != 0 {
        if let Some(msg) = value.pointer("/error/message").and_then(|m| m.as_str()) {
            eprintln!("solvgeo: {msg}");
        }
    }
    ExitCode::from(status as u8)
}
