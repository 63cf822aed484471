//! JSON output with floats fixed at 17 significant digits.

use std::io;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use solvgeo::{Automorphism, CanonicalMetric};

/// Pretty printer that writes every `f64` as `d.ddddddddddddddddde±x`.
struct FixedFloat<'a> {
    inner: PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.inner.$name(w)
            }
        )*
    };
}

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // Avoid "-0" so reports do not depend on the sign of zero.
            return w.write_all(b"0.0000000000000000e0");
        }
        write!(w, "{value:.16e}")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

/// Serialises `value` deterministically, terminated by a newline.
pub fn to_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = FixedFloat {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .expect("serialising a JSON value into memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::from(m.row(r).iter().copied().collect::<Vec<f64>>()))
            .collect(),
    )
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::from(v.iter().copied().collect::<Vec<f64>>())
}

pub fn canonical(c: &CanonicalMetric) -> Value {
    json!({
        "n": c.n(),
        "p": c.p(),
        "x": c.x(),
        "sigma": c.sigma(),
        "beta": c.beta(),
    })
}

pub fn automorphism(f: &Automorphism) -> Value {
    json!({
        "lambda": f.lambda(),
        "M": matrix(f.m()),
        "v": vector(f.v()),
        "a": f.a(),
        "u": vector(f.u()),
        "F": matrix(&f.matrix()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = to_string(&json!({"a": 0.1, "b": -1.5, "c": 0.0, "d": -0.0, "e": 1e-300}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-1.5000000000000000e0"));
        assert_eq!(s.matches("0.0000000000000000e0").count(), 2);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["e"].as_f64(), Some(1e-300));
    }

    #[test]
    fn integers_stay_integers() {
        let s = to_string(&json!({"n": 3}));
        assert!(s.contains("\"n\": 3"));
    }
}
