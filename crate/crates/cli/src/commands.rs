use serde_json::{json, Map, Value};

use solvgeo::autgrp::{bracket_defect, random_automorphism};
use solvgeo::canon::{canonicalize, random_canonical, ISOMETRY_TOL};
use solvgeo::curvature::{
    closed_form_connection, curvature_closed_form, curvature_oracle, curvature_wedge, einstein_constant_fit,
    koszul_connection, relative_diff, relative_matrix_diff, ricci_closed_form, scalar_closed_form,
};
use solvgeo::liealg::build_chn;
use solvgeo::soliton::{
    extend_nilsoliton, heisenberg_nilsoliton, heisenberg_ricci_oracle, ricci_soliton_fit, trace_ad_e_squared,
};
use solvgeo::{CanonicalMetric, Canonicalization};

use crate::input;
use crate::report::{self, matrix, vector};
use crate::{CliError, Command, JobSpec};

pub(crate) fn dispatch(spec: &JobSpec) -> Result<Value, CliError> {
    match spec.command {
        Command::Canonicalize => canonicalize_cmd(spec),
        Command::Curvature => curvature_cmd(spec),
        Command::Ricci => ricci_cmd(spec),
        Command::Einstein => einstein_cmd(spec),
        Command::Isometric => isometric_cmd(spec),
        Command::SolitonCheck => soliton_cmd(spec),
        Command::ExtendNilsoliton => extend_cmd(spec),
        Command::RandomMetric => random_cmd(spec),
        Command::SelfTest => self_test_cmd(spec),
    }
}

fn require_n(spec: &JobSpec) -> Result<usize, CliError> {
    spec.n
        .ok_or_else(|| CliError::Parse(format!("field `n`: required by `{}`", spec.command)))
}

fn check_n(spec: &JobSpec, found: usize) -> Result<(), CliError> {
    match spec.n {
        Some(n) if n != found => Err(CliError::Validation(format!(
            "n = {n} does not match the metric dimension 2n = {}",
            2 * found
        ))),
        _ => Ok(()),
    }
}

/// Canonical form of the job's metric; the reduction is kept when the input was a matrix.
fn canonical_input(spec: &JobSpec) -> Result<(CanonicalMetric, Option<Canonicalization>), CliError> {
    let out = if spec.doc.contains_key("S") || !input::has_canonical(&spec.doc) {
        let s = input::metric(&spec.doc, "S")?;
        let red = canonicalize(&s)?;
        (red.canonical.clone(), Some(red))
    } else {
        let mut doc = spec.doc.clone();
        if let Some(n) = spec.n {
            doc.entry("n").or_insert(Value::from(n));
        }
        (input::canonical(&doc)?, None)
    };
    check_n(spec, out.0.n())?;
    Ok(out)
}

fn with_canonical(mut body: Map<String, Value>, c: &CanonicalMetric, red: &Option<Canonicalization>) -> Value {
    if let Value::Object(fields) = report::canonical(c) {
        body.extend(fields);
    }
    if let Some(red) = red {
        body.insert(
            "reduction".into(),
            json!({ "automorphism": report::automorphism(&red.automorphism), "residual": red.residual }),
        );
    }
    Value::Object(body)
}

fn echo(spec: &JobSpec) -> Value {
    let doc = ["S", "S1", "S2", "n", "p", "x", "sigma", "beta", "seed"]
        .into_iter()
        .filter_map(|k| spec.doc.get(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    Value::Object(doc)
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report bodies are objects"),
    }
}

fn canonicalize_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let s = input::metric(&spec.doc, "S")?;
    check_n(spec, s.n())?;
    let red = canonicalize(&s)?;
    let mut body = obj(report::canonical(&red.canonical));
    body.insert("input".into(), echo(spec));
    body.insert("automorphism".into(), report::automorphism(&red.automorphism));
    body.insert("residual".into(), Value::from(red.residual));
    let alg = build_chn(s.n())?;
    body.insert(
        "automorphism_bracket_defect".into(),
        Value::from(bracket_defect(&red.automorphism.matrix(), alg.structure())?),
    );
    Ok(Value::Object(body))
}

fn curvature_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let (c, red) = canonical_input(spec)?;
    let data = curvature_closed_form(&c)?;
    let wedge = curvature_wedge(&c)?;
    let alg = build_chn(c.n())?;
    let oracle = curvature_oracle(alg.structure(), c.expand().matrix())?;
    let d = data.dim();
    let mut ops = Vec::new();
    let mut wedge_err: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            wedge_err = wedge_err.max(relative_matrix_diff(&wedge.reconstruct(i, j), data.operator(i, j)));
            ops.push(json!({
                "i": i,
                "j": j,
                "R": matrix(data.operator(i, j)),
                "wedge": matrix(wedge.coefficients(i, j)),
            }));
        }
    }
    let conn = closed_form_connection(&c)?;
    let conn_oracle = koszul_connection(alg.structure(), c.expand().matrix())?;
    let worst = data.compare(&oracle);
    let body = obj(json!({
        "labels": alg.basis_labels(),
        "operators": ops,
        "ricci": matrix(&data.ricci),
        "scalar": data.scalar,
        "residuals": {
            "connection_vs_oracle": conn.relative_diff(&conn_oracle),
            "curvature_vs_oracle": worst.relative,
            "wedge_reconstruction": wedge_err,
            "symmetry": data.symmetry_defect(),
        },
    }));
    Ok(with_canonical(body, &c, &red))
}

fn ricci_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let (c, red) = canonical_input(spec)?;
    let ric = ricci_closed_form(&c)?;
    let tau = scalar_closed_form(&c)?;
    let alg = build_chn(c.n())?;
    let oracle = curvature_oracle(alg.structure(), c.expand().matrix())?;
    let body = obj(json!({
        "ricci": matrix(&ric),
        "scalar": tau,
        "residuals": {
            "ricci_vs_oracle": relative_matrix_diff(&ric, &oracle.ricci),
            "scalar_vs_oracle": relative_diff(tau, oracle.scalar),
        },
    }));
    Ok(with_canonical(body, &c, &red))
}

fn einstein_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let (c, red) = canonical_input(spec)?;
    let (ce, residual) = einstein_constant_fit(&c)?;
    let matrix_test = residual <= spec.tol;
    let parameter_test = c.satisfies_einstein_conditions(spec.tol);
    let body = obj(json!({
        "einstein": matrix_test,
        "constant": if matrix_test { Value::from(ce) } else { Value::Null },
        "fitted_constant": ce,
        "residual": residual,
        "parameter_test": parameter_test,
        "tests_agree": matrix_test == parameter_test,
        "scalar": scalar_closed_form(&c)?,
    }));
    Ok(with_canonical(body, &c, &red))
}

fn isometric_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let s1 = input::metric(&spec.doc, "S1")?;
    let s2 = input::metric(&spec.doc, "S2")?;
    if s1.n() != s2.n() {
        return Err(CliError::Validation(format!(
            "S1 and S2 have different sizes ({} and {})",
            2 * s1.n(),
            2 * s2.n()
        )));
    }
    check_n(spec, s1.n())?;
    let param_tol = input::get_f64(&spec.doc, "param_tol")?.unwrap_or(ISOMETRY_TOL);
    let r1 = canonicalize(&s1)?;
    let r2 = canonicalize(&s2)?;
    let distance = r1.canonical.max_param_diff(&r2.canonical)?;
    Ok(json!({
        "isometric": distance <= param_tol,
        "param_tol": param_tol,
        "distance": distance,
        "canonical1": report::canonical(&r1.canonical),
        "canonical2": report::canonical(&r2.canonical),
        "residuals": { "reduction1": r1.residual, "reduction2": r2.residual },
    }))
}

fn soliton_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let (c, red) = canonical_input(spec)?;
    let fit = ricci_soliton_fit(&c)?;
    let soliton = fit.residual <= spec.tol;
    let body = obj(json!({
        "soliton": soliton,
        "c": fit.c,
        "D": matrix(&fit.d),
        "residual": fit.residual,
        "derivation_defect": fit.derivation_defect,
    }));
    Ok(with_canonical(body, &c, &red))
}

fn extend_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let n = require_n(spec)?;
    let beta = input::get_f64(&spec.doc, "beta")?
        .ok_or_else(|| CliError::Parse("field `beta`: required by `extend-nilsoliton`".into()))?;
    let nil = heisenberg_nilsoliton(n, beta)?;
    let oracle = heisenberg_ricci_oracle(n, beta)?;
    let nil_residual = relative_matrix_diff(&oracle, &nalgebra::DMatrix::from_diagonal(&nil.ricci_nil));
    let c = extend_nilsoliton(&nil)?;
    let (ce, residual) = einstein_constant_fit(&c)?;
    let tr = trace_ad_e_squared(&c)?;
    let expected_tr = (n as f64 + 1.0) / (2.0 * c.z());
    let body = obj(json!({
        "nilsoliton": {
            "c": nil.c,
            "D1": vector(&nil.d1),
            "ricci_nil": vector(&nil.ricci_nil),
            "oracle_residual": nil_residual,
        },
        "einstein": residual <= spec.tol,
        "einstein_constant": ce,
        "einstein_residual": residual,
        "p_beta_residual": (c.p() * c.beta() - 1.0).abs(),
        "trace_ad_e_squared": tr,
        "trace_ad_e_squared_residual": relative_diff(tr, expected_tr),
        "S": matrix(c.expand().matrix()),
    }));
    Ok(with_canonical(body, &c, &None))
}

fn random_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    let n = require_n(spec)?;
    let seed = spec.seed.unwrap_or(0);
    let c = random_canonical(n, seed)?;
    let f = random_automorphism(n, seed.wrapping_add(1))?;
    let moved = solvgeo::autgrp::act_on_metric(&f, &c.expand())?;
    let alg = build_chn(n)?;
    Ok(json!({
        "seed": seed,
        "canonical": report::canonical(&c),
        "automorphism": report::automorphism(&f),
        "automorphism_bracket_defect": bracket_defect(&f.matrix(), alg.structure())?,
        "S": matrix(moved.matrix()),
    }))
}

/// Closed form against oracle at n ∈ {2, 3}.
fn self_test_cmd(spec: &JobSpec) -> Result<Value, CliError> {
    const SAMPLES: u64 = 10;
    let base = spec.seed.unwrap_or(0);
    let mut rows = Vec::new();
    let mut overall: f64 = 0.0;
    for n in [2usize, 3] {
        let alg = build_chn(n)?;
        let mut worst = [0.0f64; 5];
        for k in 0..SAMPLES {
            let c = random_canonical(n, base.wrapping_add(k))?;
            let s = c.expand().into_matrix();
            let oracle = curvature_oracle(alg.structure(), &s)?;
            let closed = curvature_closed_form(&c)?;
            let wedge = curvature_wedge(&c)?;
            let d = 2 * n;
            let mut wedge_err: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    wedge_err = wedge_err.max(relative_matrix_diff(&wedge.reconstruct(i, j), oracle.operator(i, j)));
                }
            }
            let errs = [
                closed_form_connection(&c)?.relative_diff(&koszul_connection(alg.structure(), &s)?),
                closed.compare_operators(&oracle).relative,
                wedge_err,
                relative_matrix_diff(&ricci_closed_form(&c)?, &oracle.ricci),
                relative_diff(scalar_closed_form(&c)?, oracle.scalar),
            ];
            for (w, e) in worst.iter_mut().zip(errs) {
                *w = w.max(e);
            }
        }
        let max = worst.iter().copied().fold(0.0, f64::max);
        overall = overall.max(max);
        rows.push(json!({
            "n": n,
            "samples": SAMPLES,
            "connection": worst[0],
            "curvature": worst[1],
            "wedge": worst[2],
            "ricci": worst[3],
            "scalar": worst[4],
            "max": max,
        }));
    }
    if overall > spec.tol {
        return Err(CliError::Validation(format!(
            "self-test failed: max residual {overall:.3e} exceeds tol {:.3e}",
            spec.tol
        )));
    }
    Ok(json!({ "passed": true, "max_residual": overall, "results": rows }))
}
