//! Batch front end for `solvgeo`: reads JSON job documents, runs the requested
//! computation and writes self-certifying JSON reports.
//!
//! A document is either one job object or an array of them. Job keys:
//!
//! * `command` (overrides `--command`), `n`, `tol`, `seed`
//! * `S`: metric as a row-major nested array, or a canonical tuple under
//!   `n`, `p`, `x`, `sigma`, `beta`
//! * `S1`, `S2` for `isometric`; `beta` for `extend-nilsoliton`

mod commands;
pub mod input;
pub mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use solvgeo::GeoError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

/// Default tolerance when neither `--tol` nor `SOLVGEO_TOL` is given.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("conditioning error: {0}")]
    Conditioning(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Conditioning(_) => EXIT_CONDITIONING,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Conditioning(_) => "conditioning",
        }
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        if e.is_conditioning() {
            CliError::Conditioning(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Canonicalize,
    Curvature,
    Ricci,
    Einstein,
    Isometric,
    SolitonCheck,
    ExtendNilsoliton,
    RandomMetric,
    SelfTest,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Canonicalize,
        Command::Curvature,
        Command::Ricci,
        Command::Einstein,
        Command::Isometric,
        Command::SolitonCheck,
        Command::ExtendNilsoliton,
        Command::RandomMetric,
        Command::SelfTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Canonicalize => "canonicalize",
            Command::Curvature => "curvature",
            Command::Ricci => "ricci",
            Command::Einstein => "einstein",
            Command::Isometric => "isometric",
            Command::SolitonCheck => "soliton-check",
            Command::ExtendNilsoliton => "extend-nilsoliton",
            Command::RandomMetric => "random-metric",
            Command::SelfTest => "self-test",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Parse(format!("unknown command `{s}`")))
    }
}

/// One unit of work.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub n: Option<usize>,
    pub tol: f64,
    pub seed: Option<u64>,
    /// Job document (metric, canonical tuple, command-specific fields).
    pub doc: Map<String, Value>,
}

impl JobSpec {
    pub fn new(command: Command, tol: f64) -> Self {
        Self {
            command,
            n: None,
            tol,
            seed: None,
            doc: Map::new(),
        }
    }

    /// Merges document keys over command-line defaults.
    pub fn from_document(
        doc: Map<String, Value>,
        command: Option<Command>,
        n: Option<usize>,
        tol: f64,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let command = match input::get_str(&doc, "command")? {
            Some(s) => s.parse()?,
            None => command.ok_or_else(|| {
                CliError::Parse("field `command`: missing (pass --command or set it per job)".into())
            })?,
        };
        let spec = Self {
            command,
            n: input::get_usize(&doc, "n")?.or(n),
            tol: input::get_f64(&doc, "tol")?.unwrap_or(tol),
            seed: input::get_u64(&doc, "seed")?.or(seed),
            doc,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Validation(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(CliError::Validation(format!("n must be at least 2, got {n}")));
            }
        }
        Ok(())
    }
}

/// Result of one job: exit status and report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: Value,
}

/// Runs one job. Failures become a report with an `error` object.
pub fn run(spec: &JobSpec) -> Outcome {
    let result = spec.validate().and_then(|_| commands::dispatch(spec));
    match result {
        Ok(mut body) => {
            if let Value::Object(map) = &mut body {
                map.insert("command".into(), Value::from(spec.command.name()));
                map.insert("ok".into(), Value::Bool(true));
                map.insert("tol".into(), Value::from(spec.tol));
            }
            Outcome {
                status: EXIT_OK,
                report: body,
            }
        }
        Err(e) => Outcome {
            status: e.exit_code(),
            report: error_report(Some(spec.command), &e),
        },
    }
}

pub fn error_report(command: Option<Command>, e: &CliError) -> Value {
    json!({
        "command": command.map(|c| c.name()),
        "ok": false,
        "error": { "kind": e.kind(), "message": e.to_string() },
    })
}

/// Runs jobs on up to `threads` workers, keeping input order. The batch status
/// is the first nonzero job status.
pub fn run_batch(jobs: Vec<Result<JobSpec, CliError>>, threads: usize) -> Outcome {
    let work = |job: &Result<JobSpec, CliError>| match job {
        Ok(spec) => run(spec),
        Err(e) => Outcome {
            status: e.exit_code(),
            report: error_report(None, e),
        },
    };
    let outcomes: Vec<Outcome> = if threads <= 1 {
        jobs.iter().map(work).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| jobs.par_iter().map(work).collect()),
            Err(_) => jobs.iter().map(work).collect(),
        }
    };
    let status = outcomes
        .iter()
        .map(|o| o.status)
        .find(|s| *s != EXIT_OK)
        .unwrap_or(EXIT_OK);
    Outcome {
        status,
        report: Value::Array(outcomes.into_iter().map(|o| o.report).collect()),
    }
}

/// Command-line level settings shared by every job in a document.
#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub tol: f64,
    pub seed: Option<u64>,
    pub jobs: usize,
}

/// Runs a document (or, with `text = None`, a single job built from `defaults`).
pub fn run_text(text: Option<&str>, defaults: &Defaults) -> Outcome {
    let parsed = match text {
        None => Ok((vec![Map::new()], false)),
        Some(t) => input::parse_document(t),
    };
    let (docs, batch) = match parsed {
        Ok(v) => v,
        Err(e) => {
            return Outcome {
                status: e.exit_code(),
                report: error_report(defaults.command, &e),
            }
        }
    };
    let specs: Vec<Result<JobSpec, CliError>> = docs
        .into_iter()
        .map(|doc| JobSpec::from_document(doc, defaults.command, defaults.n, defaults.tol, defaults.seed))
        .collect();
    if batch {
        run_batch(specs, defaults.jobs)
    } else {
        let mut out = run_batch(specs, 1);
        out.report = match out.report {
            Value::Array(mut items) => items.remove(0),
            other => other,
        };
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults(command: Command) -> Defaults {
        Defaults {
            command: Some(command),
            n: None,
            tol: DEFAULT_TOL,
            seed: None,
            jobs: 1,
        }
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }

    #[test]
    fn exit_codes() {
        let d = defaults(Command::Canonicalize);
        assert_eq!(run_text(Some("{"), &d).status, EXIT_PARSE);
        let bad = r#"{"S": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]}"#;
        assert_eq!(run_text(Some(bad), &d).status, EXIT_VALIDATION);
        let ill = r#"{"S": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1e-15, 0], [0, 0, 0, 1]]}"#;
        assert_eq!(run_text(Some(ill), &d).status, EXIT_CONDITIONING);
        let ok = r#"{"S": [[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0.5]]}"#;
        assert_eq!(run_text(Some(ok), &d).status, EXIT_OK);
    }

    #[test]
    fn nonpositive_tol_is_rejected() {
        let mut d = defaults(Command::SelfTest);
        d.tol = 0.0;
        assert_eq!(run_text(None, &d).status, EXIT_VALIDATION);
    }

    #[test]
    fn batch_keeps_order_and_isolates_failures() {
        let mut d = defaults(Command::Einstein);
        d.jobs = 4;
        let text = r#"[
            {"n": 2, "p": 1, "beta": 1},
            {"n": 2, "p": -1, "beta": 1},
            {"command": "ricci", "n": 3, "p": 2, "beta": 0.5}
        ]"#;
        let out = run_text(Some(text), &d);
        assert_eq!(out.status, EXIT_VALIDATION);
        let items = out.report.as_array().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0]["ok"], true);
        assert_eq!(items[1]["ok"], false);
        assert_eq!(items[2]["command"], "ricci");
        assert_eq!(items[2]["ok"], true);
    }
}
