//! Acceptance suite. Runs without the libtest harness so every check prints a
//! PASS/FAIL line even when it succeeds; exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solvgeo::autgrp::{act_on_metric, bracket_defect, random_automorphism_with};
use solvgeo::canon::{canonicalize, random_canonical_with};
use solvgeo::curvature::{
    closed_form_connection, curvature_closed_form, curvature_oracle, curvature_wedge, is_einstein,
    koszul_connection, relative_diff, relative_matrix_diff, ricci_closed_form, scalar_closed_form,
    sectional_range,
};
use solvgeo::liealg::build_chn;
use solvgeo::soliton::{extend_nilsoliton, heisenberg_nilsoliton, heisenberg_ricci_oracle, trace_ad_e_squared};
use solvgeo::sympl::{phase_rotation, symplectic_form, williamson, EigenOrder};
use solvgeo::CanonicalMetric;

type Check = Result<String, String>;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn within(label: &str, value: f64, bound: f64) -> Check {
    if value <= bound {
        Ok(format!("{label} {value:.2e} <= {bound:.0e}"))
    } else {
        Err(format!("{label} {value:.2e} > {bound:.0e}"))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    for p in parts {
        ok.push(p?);
    }
    Ok(ok.join(", "))
}

fn in_time(start: Instant, budget: Duration) -> Check {
    let t = start.elapsed();
    if t <= budget {
        Ok(format!("{:.2}s", t.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, budget {}s", t.as_secs_f64(), budget.as_secs()))
    }
}

fn closed_form_vs_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut conn, mut ops, mut wedge, mut ric, mut scal) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in 2..=5 {
        let alg = build_chn(n).unwrap();
        for _ in 0..100 {
            let c = random_canonical_with(n, &mut rng).unwrap();
            let s = c.expand().into_matrix();
            let oracle = curvature_oracle(alg.structure(), &s).unwrap();
            let closed = curvature_closed_form(&c).unwrap();
            let k = koszul_connection(alg.structure(), &s).unwrap();
            conn = conn.max(closed_form_connection(&c).unwrap().relative_diff(&k));
            ops = ops.max(closed.compare_operators(&oracle).relative);

            let w = curvature_wedge(&c).unwrap();
            let d = s.nrows();
            let (mut diff, mut scale) = (0.0f64, 0.0f64);
            for i in 0..d {
                for j in 0..d {
                    diff = diff.max(max_abs(&(w.reconstruct(i, j) - oracle.operator(i, j))));
                    scale = scale.max(max_abs(oracle.operator(i, j)));
                }
            }
            wedge = wedge.max(diff / scale);
            ric = ric.max(relative_matrix_diff(&ricci_closed_form(&c).unwrap(), &oracle.ricci));
            scal = scal.max(relative_diff(scalar_closed_form(&c).unwrap(), oracle.scalar));
        }
    }
    all(vec![
        within("connection", conn, 1e-9),
        within("operators", ops, 1e-9),
        within("wedge", wedge, 1e-9),
        within("ricci", ric, 1e-9),
        within("scalar", scal, 1e-9),
        in_time(start, Duration::from_secs(60)),
    ])
}

fn canonicalization_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut param, mut bracket) = (0.0f64, 0.0f64);
    for n in 2..=5 {
        let alg = build_chn(n).unwrap();
        for _ in 0..500 {
            let c = random_canonical_with(n, &mut rng).unwrap();
            let f = random_automorphism_with(n, &mut rng, 1.0).unwrap();
            let s = act_on_metric(&f, &c.expand()).unwrap();
            let red = canonicalize(&s).unwrap();
            param = param.max(red.canonical.max_param_diff(&c).unwrap());
            bracket = bracket.max(bracket_defect(&red.automorphism.matrix(), alg.structure()).unwrap());
        }
    }
    all(vec![
        within("tuple", param, 1e-8),
        within("bracket", bracket, 1e-9),
        in_time(start, Duration::from_secs(120)),
    ])
}

fn random_symplectic(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let k = 2 * m;
    let theta: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let t: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
    let squeeze = DMatrix::from_fn(k, k, |r, c| match (r == c, r < m) {
        (false, _) => 0.0,
        (true, true) => t[r].exp(),
        (true, false) => (-t[r - m]).exp(),
    });
    let b = DMatrix::from_fn(m, m, |_, _| rng.random_range(-0.5..0.5));
    let b = &b + b.transpose();
    let mut shear = DMatrix::identity(k, k);
    shear.view_mut((0, m), (m, m)).copy_from(&b);
    phase_rotation(&theta) * shear * squeeze
}

fn williamson_contract() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut sympl, mut normal, mut invariance, mut det) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for m in 1..=4 {
        let k = 2 * m;
        let j = symplectic_form(m);
        for _ in 0..200 {
            let a = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
            let s = a.transpose() * &a + DMatrix::identity(k, k) * 0.2;
            let w = williamson(&s, EigenOrder::Descending).unwrap();
            sympl = sympl.max(max_abs(&(w.m.transpose() * &j * &w.m - &j)));
            normal = normal.max(max_abs(&(w.m.transpose() * &s * &w.m - w.normal_form())) / max_abs(&s));

            let p = random_symplectic(m, &mut rng);
            let conj = williamson(&(p.transpose() * &s * &p), EigenOrder::Descending).unwrap();
            for (a, b) in w.d.iter().zip(&conj.d) {
                invariance = invariance.max(relative_diff(*a, *b));
            }
            if m == 1 {
                det = det.max(relative_diff(w.d[0], s.determinant().sqrt()));
            }
        }
    }
    all(vec![
        within("MᵀJM−J", sympl, 1e-9),
        within("MᵀSM−diag", normal, 1e-9),
        within("conjugation", invariance, 1e-9),
        within("√det", det, 1e-12),
    ])
}

/// Valid canonical tuple over a wide range, with `z/p` anywhere in `(10⁻³, 1]`.
fn wide_canonical(n: usize, rng: &mut ChaCha8Rng) -> CanonicalMetric {
    let m = n - 1;
    let p = 10f64.powf(rng.random_range(-1.0..1.0));
    let mut sigma: Vec<f64> = (0..m - 1).map(|_| 10f64.powf(rng.random_range(0.0..1.0))).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let full: Vec<f64> = sigma.iter().copied().chain([1.0]).collect();
    let dir: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let q: f64 = dir.iter().zip(&full).map(|(d, s)| d * d / s).sum();
    let frac = 1.0 - 10f64.powf(rng.random_range(-3.0..0.0));
    let scale = if q > 0.0 { (frac * p / q).sqrt() } else { 0.0 };
    let x = dir.iter().map(|d| d * scale).collect();
    let beta = 10f64.powf(rng.random_range(-1.0..1.0));
    CanonicalMetric::new(n, p, x, sigma, beta).unwrap()
}

fn scalar_negativity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_tau = f64::NEG_INFINITY;
    let mut core_shortfall = 0.0f64;
    for n in 2..=5 {
        let core = (2 * n * n + n + 1) as f64;
        for _ in 0..1000 {
            let c = wide_canonical(n, &mut rng);
            let tau = scalar_closed_form(&c).unwrap();
            worst_tau = worst_tau.max(tau);
            core_shortfall = core_shortfall.max((core - tau * (-2.0 * c.z())) / core);
        }
    }
    let sign = if worst_tau < 0.0 {
        Ok(format!("max τ {worst_tau:.3e} < 0"))
    } else {
        Err(format!("max τ {worst_tau:.3e} is not negative"))
    };
    all(vec![sign, within("core shortfall", core_shortfall, 1e-9)])
}

fn einstein_grid() -> Check {
    let betas = [0.2, 0.3, 0.5, 0.7, 1.0, 1.3, 2.0, 2.5, 3.0, 4.0, 5.0];
    let mut ps: Vec<f64> = betas.iter().map(|b| 1.0 / b).collect();
    ps.extend([0.45, 0.9, 1.1, 1.7, 2.2, 3.5, 6.0, 7.5, 9.0, 12.0, 0.15]);
    let xs = [0.0, 1e-6, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.35, 0.4, 0.5];
    let sigmas = [1.0, 1.0 + 1e-6, 1.001, 1.5, 2.0];

    let (mut points, mut mismatches, mut einstein) = (0usize, Vec::new(), 0usize);
    let mut test = |c: CanonicalMetric| {
        points += 1;
        let expected = c.satisfies_einstein_conditions(1e-12);
        einstein += expected as usize;
        if is_einstein(&c, 1e-9).is_some() != expected && mismatches.len() < 5 {
            mismatches.push(format!("{c:?}"));
        }
    };
    for &p in &ps {
        for &beta in &betas {
            for &x in &xs {
                if let Ok(c) = CanonicalMetric::new(2, p, vec![x], vec![], beta) {
                    test(c);
                }
                for &x2 in &xs[..4] {
                    for &s in &sigmas {
                        if let Ok(c) = CanonicalMetric::new(3, p, vec![x, x2], vec![s], beta) {
                            test(c);
                        }
                    }
                }
            }
        }
    }

    let unit = CanonicalMetric::new(2, 1.0, vec![0.0], vec![], 1.0).unwrap();
    let ce = is_einstein(&unit, 1e-12).unwrap_or(f64::NAN);
    let tau = scalar_closed_form(&unit).unwrap();
    let size = if points >= 10_000 && einstein > 0 {
        Ok(format!("{points} points, {einstein} Einstein"))
    } else {
        Err(format!("grid too small: {points} points, {einstein} Einstein"))
    };
    let agree = if mismatches.is_empty() {
        Ok("matrix test agrees with parameter test".to_string())
    } else {
        Err(format!("disagreement at {}", mismatches.join("; ")))
    };
    all(vec![
        size,
        agree,
        within("|c_E + 3/2|", (ce + 1.5).abs(), 1e-10),
        within("|τ + 6|", (tau + 6.0).abs(), 1e-10),
    ])
}

fn symmetry_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut defect = [0.0f64; 4];
    for n in 2..=5 {
        let alg = build_chn(n).unwrap();
        for _ in 0..50 {
            let c = wide_canonical(n, &mut rng);
            let closed = curvature_closed_form(&c).unwrap();
            let oracle = curvature_oracle(alg.structure(), c.expand().matrix()).unwrap();
            for data in [&closed, &oracle] {
                let d = [
                    data.antisymmetry_defect(),
                    data.skew_adjoint_defect(),
                    data.pair_symmetry_defect(),
                    data.bianchi_defect(),
                ];
                for (acc, v) in defect.iter_mut().zip(d) {
                    *acc = acc.max(v);
                }
            }
        }
    }
    all(vec![
        within("antisymmetry", defect[0], 1e-9),
        within("skew-adjoint", defect[1], 1e-9),
        within("pair symmetry", defect[2], 1e-9),
        within("Bianchi", defect[3], 1e-9),
    ])
}

fn soliton_pipeline() -> Check {
    let (mut nil, mut pb, mut shape, mut adsq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut einstein_fail = Vec::new();
    for n in 2..=5 {
        for beta in [0.25, 0.5, 1.0, 1.7, 3.0] {
            let data = heisenberg_nilsoliton(n, beta).unwrap();
            let oracle = heisenberg_ricci_oracle(n, beta).unwrap();
            let diag = DMatrix::from_diagonal(&data.ricci_nil);
            nil = nil.max(relative_matrix_diff(&diag, &oracle));

            let c = extend_nilsoliton(&data).unwrap();
            pb = pb.max((c.p() * c.beta() - 1.0).abs());
            let mut target = DVector::from_element(2 * n, 1.0);
            target[0] = 1.0 / beta;
            target[2 * n - 1] = beta;
            shape = shape.max(relative_matrix_diff(c.expand().matrix(), &DMatrix::from_diagonal(&target)));
            if is_einstein(&c, 1e-9).is_none() {
                einstein_fail.push(format!("n={n} β={beta}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=5 {
        for _ in 0..100 {
            let c = wide_canonical(n, &mut rng);
            let expected = (n as f64 + 1.0) / (2.0 * c.z());
            adsq = adsq.max(relative_diff(trace_ad_e_squared(&c).unwrap(), expected));
        }
    }
    let einstein = if einstein_fail.is_empty() {
        Ok("extensions Einstein".to_string())
    } else {
        Err(format!("not Einstein: {}", einstein_fail.join(", ")))
    };
    all(vec![
        within("nilsoliton vs oracle", nil, 1e-10),
        within("|pβ − 1|", pb, 1e-12),
        within("diag(1/β, 1, …, β)", shape, 1e-12),
        einstein,
        within("tr(ad e)²", adsq, 1e-12),
    ])
}

fn quarter_pinching() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ratio_err = 0.0f64;
    let mut outside = 0usize;
    let mut planes = 0usize;
    for n in 2..=5 {
        let c = CanonicalMetric::new(n, 1.0, vec![0.0; n - 1], vec![1.0; n - 2], 1.0).unwrap();
        let data = curvature_closed_form(&c).unwrap();
        let d = data.dim();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..10_000 {
            let u = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let r = sectional_range(&data, &u).unwrap();
            lo = lo.min(r.min);
            hi = hi.max(r.max);
            let w = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            if let Ok(k) = data.sectional(&u, &w) {
                planes += 1;
                if k < r.min - 1e-12 || k > r.max + 1e-12 {
                    outside += 1;
                }
            }
        }
        ratio_err = ratio_err.max((lo / hi - 4.0).abs());
    }
    let bounded = if outside == 0 {
        Ok(format!("{planes} random planes inside range"))
    } else {
        Err(format!("{outside} of {planes} random planes outside range"))
    };
    all(vec![within("|K_min/K_max − 4|", ratio_err, 1e-6), bounded])
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 8] = [
        ("closed form vs Koszul oracle", closed_form_vs_oracle),
        ("canonicalization round trip", canonicalization_round_trip),
        ("Williamson normal form", williamson_contract),
        ("negative scalar curvature", scalar_negativity),
        ("Einstein characterization", einstein_grid),
        ("curvature symmetries", symmetry_suite),
        ("soliton pipeline", soliton_pipeline),
        ("quarter pinching", quarter_pinching),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
