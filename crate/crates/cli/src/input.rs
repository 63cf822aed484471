//! Reading metrics and canonical tuples out of job documents.

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use solvgeo::{CanonicalMetric, MetricMatrix};

use crate::CliError;

/// Parses a document into a list of job objects; a top-level array is a batch.
pub fn parse_document(text: &str) -> Result<(Vec<Map<String, Value>>, bool), CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    match value {
        Value::Object(map) => Ok((vec![map], false)),
        Value::Array(items) => {
            let jobs = items
                .into_iter()
                .enumerate()
                .map(|(i, item)| match item {
                    Value::Object(map) => Ok(map),
                    other => Err(CliError::Parse(format!(
                        "batch entry {i}: expected an object, found {}",
                        kind(&other)
                    ))),
                })
                .collect::<Result<_, _>>()?;
            Ok((jobs, true))
        }
        other => Err(CliError::Parse(format!(
            "top level: expected an object or an array of objects, found {}",
            kind(&other)
        ))),
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("field `{field}`: {msg}"))
}

pub fn get_f64(doc: &Map<String, Value>, field: &str) -> Result<Option<f64>, CliError> {
    match doc.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| field_err(field, format!("expected a number, found {}", kind(v)))),
    }
}

pub fn get_usize(doc: &Map<String, Value>, field: &str) -> Result<Option<usize>, CliError> {
    match doc.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| field_err(field, "expected a nonnegative integer")),
    }
}

pub fn get_u64(doc: &Map<String, Value>, field: &str) -> Result<Option<u64>, CliError> {
    match doc.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| field_err(field, "expected a nonnegative integer")),
    }
}

pub fn get_str<'a>(doc: &'a Map<String, Value>, field: &str) -> Result<Option<&'a str>, CliError> {
    match doc.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(field_err(field, format!("expected a string, found {}", kind(v)))),
    }
}

fn numbers(field: &str, v: &Value) -> Result<Vec<f64>, CliError> {
    let items = v
        .as_array()
        .ok_or_else(|| field_err(field, format!("expected an array, found {}", kind(v))))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| field_err(&format!("{field}[{i}]"), format!("expected a number, found {}", kind(x))))
        })
        .collect()
}

/// Row-major nested array to a square matrix.
pub fn matrix(field: &str, v: &Value) -> Result<DMatrix<f64>, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| field_err(field, format!("expected an array of rows, found {}", kind(v))))?;
    let k = rows.len();
    let mut out = DMatrix::zeros(k, k);
    for (r, row) in rows.iter().enumerate() {
        let vals = numbers(&format!("{field}[{r}]"), row)?;
        if vals.len() != k {
            return Err(field_err(
                &format!("{field}[{r}]"),
                format!("row has {} entries, expected {k} (matrix must be square)", vals.len()),
            ));
        }
        for (c, x) in vals.into_iter().enumerate() {
            out[(r, c)] = x;
        }
    }
    Ok(out)
}

/// `S` if present, otherwise the canonical tuple expanded.
pub fn metric(doc: &Map<String, Value>, field: &str) -> Result<MetricMatrix, CliError> {
    match doc.get(field) {
        Some(v) => Ok(MetricMatrix::new(matrix(field, v)?)?),
        None => Ok(canonical(doc)?.expand()),
    }
}

pub fn has_canonical(doc: &Map<String, Value>) -> bool {
    doc.contains_key("p") && doc.contains_key("beta")
}

/// Canonical tuple under keys `n`, `p`, `x`, `sigma`, `beta`. `x` defaults to
/// zeros and `sigma` to ones when `n` is given.
pub fn canonical(doc: &Map<String, Value>) -> Result<CanonicalMetric, CliError> {
    let p = get_f64(doc, "p")?.ok_or_else(|| field_err("p", "missing (need either `S` or a canonical tuple)"))?;
    let beta = get_f64(doc, "beta")?.ok_or_else(|| field_err("beta", "missing"))?;
    let x = doc.get("x").map(|v| numbers("x", v)).transpose()?;
    let sigma = doc.get("sigma").map(|v| numbers("sigma", v)).transpose()?;
    let n = match (get_usize(doc, "n")?, &x) {
        (Some(n), _) => n,
        (None, Some(x)) => x.len() + 1,
        (None, None) => return Err(field_err("n", "missing and cannot be inferred from `x`")),
    };
    if n < 2 {
        return Err(CliError::Validation(format!("n must be at least 2, got {n}")));
    }
    let x = x.unwrap_or_else(|| vec![0.0; n - 1]);
    let sigma = sigma.unwrap_or_else(|| vec![1.0; n - 2]);
    Ok(CanonicalMetric::new(n, p, x, sigma, beta)?)
}
