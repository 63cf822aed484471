//! Orthonormal frame, mean curvature vector, Ricci solitons and the
//! Heisenberg nilsoliton.
//!
//! A metric is a Ricci soliton (here: solsoliton) when its Ricci operator is
//! `cI + D` for a real `c` and a derivation `D` of the Lie algebra. The
//! derivation algebra is computed numerically as the null space of the
//! linear equations `D[e_i, e_j] = [D e_i, e_j] + [e_i, D e_j]`.

use nalgebra::{DMatrix, DVector};

use crate::canon::CanonicalMetric;
use crate::curvature::{curvature_oracle, ricci_closed_form, solve_metric};
use crate::error::{GeoError, Result};
use crate::liealg::{build_chn, heisenberg, StructureConstants};

/// Singular values below `NULLSPACE_TOL · σ_max` span the derivation algebra.
pub const NULLSPACE_TOL: f64 = 1e-10;

/// `S`-orthonormal frame `(e, f_i, g_i, w)` as the columns of a matrix, with
/// `e = V/|V|`, `V = X − Σ (x_i/σ_i) Y_i`, `f_i = Y_i/√σ_i`, `g_i = Z_i/√σ_i`,
/// `w = W/√β`.
pub fn orthonormal_frame(c: &CanonicalMetric) -> Result<DMatrix<f64>> {
    let b = c.basis();
    let z = c.z();
    if !(z > 0.0) {
        return Err(GeoError::Domain(format!("degenerate z = {z:.3e}")));
    }
    let sigma = c.sigma_full();
    let v = c.v();
    let mut frame = DMatrix::zeros(b.dim(), b.dim());
    let rz = z.sqrt();
    frame[(b.x(), b.x())] = 1.0 / rz;
    for i in 0..b.m() {
        frame[(b.y(i), b.x())] = -v[i] / rz;
        frame[(b.y(i), b.y(i))] = 1.0 / sigma[i].sqrt();
        frame[(b.z(i), b.z(i))] = 1.0 / sigma[i].sqrt();
    }
    frame[(b.w(), b.w())] = 1.0 / c.beta().sqrt();
    Ok(frame)
}

/// Unit vector `e` spanning the `g`-orthogonal complement of the nilradical.
pub fn unit_e(c: &CanonicalMetric) -> Result<DVector<f64>> {
    Ok(orthonormal_frame(c)?.column(c.basis().x()).into_owned())
}

/// Matrix of `ad e` in the orthonormal frame.
pub fn ad_e(c: &CanonicalMetric) -> Result<DMatrix<f64>> {
    let alg = build_chn(c.n())?;
    let frame = orthonormal_frame(c)?;
    let e = frame.column(c.basis().x()).into_owned();
    let ad = alg.structure().ad(&e)?;
    let inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| GeoError::Conditioning("singular frame".into()))?;
    Ok(inv * ad * frame)
}

/// `tr ad e`.
pub fn trace_ad_e(c: &CanonicalMetric) -> Result<f64> {
    Ok(ad_e(c)?.trace())
}

/// `tr (ad e)²`.
pub fn trace_ad_e_squared(c: &CanonicalMetric) -> Result<f64> {
    let a = ad_e(c)?;
    Ok((&a * &a).trace())
}

/// The unique `H` in the abelian factor with `⟨H, A⟩ = tr ad A`; in basis
/// coordinates this is `(tr ad e) e`.
pub fn mean_curvature_vector(c: &CanonicalMetric) -> Result<DVector<f64>> {
    let e = unit_e(c)?;
    Ok(&e * trace_ad_e(c)?)
}

/// A basis of `Der(g)`, each derivation as a matrix acting on coordinate columns.
pub fn derivation_basis(structure: &StructureConstants) -> Vec<DMatrix<f64>> {
    let d = structure.dim();
    let unknown = |a: usize, b: usize| a * d + b;
    let mut eqs = DMatrix::zeros(d * d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let row = (i * d + j) * d + k;
                for l in 0..d {
                    eqs[(row, unknown(k, l))] += structure.constant(i, j, l);
                }
                for a in 0..d {
                    eqs[(row, unknown(a, i))] -= structure.constant(a, j, k);
                    eqs[(row, unknown(a, j))] -= structure.constant(i, a, k);
                }
            }
        }
    }
    let svd = eqs.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.max();
    let mut out = Vec::new();
    for (idx, sv) in svd.singular_values.iter().enumerate() {
        if *sv <= NULLSPACE_TOL * top {
            let row = v_t.row(idx);
            out.push(DMatrix::from_fn(d, d, |a, b| row[unknown(a, b)]));
        }
    }
    out
}

/// Largest component of `D[e_i,e_j] − [De_i,e_j] − [e_i,De_j]` over basis pairs.
pub fn derivation_defect(structure: &StructureConstants, dm: &DMatrix<f64>) -> Result<f64> {
    let d = structure.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let lhs = dm * structure.basis_bracket(i, j);
            let rhs = structure.bracket(&dm.column(i).into_owned(), &unit(d, j))?
                + structure.bracket(&unit(d, i), &dm.column(j).into_owned())?;
            worst = worst.max((lhs - rhs).amax());
        }
    }
    Ok(worst)
}

fn unit(d: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(d, |r, _| if r == k { 1.0 } else { 0.0 })
}

/// Best fit `Ric = cI + D` with `D ∈ Der(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonCertificate {
    pub c: f64,
    pub d: DMatrix<f64>,
    /// `‖S⁻¹Ric − cI − D‖_F / ‖S⁻¹Ric‖_F`.
    pub residual: f64,
    /// [`derivation_defect`] of `d`.
    pub derivation_defect: f64,
}

/// Least-squares fit of the Ricci operator over `span({I} ∪ Der(g))`.
pub fn ricci_soliton_fit(c: &CanonicalMetric) -> Result<SolitonCertificate> {
    let alg = build_chn(c.n())?;
    let s = c.expand().into_matrix();
    let ric = ricci_closed_form(c)?;
    let op = solve_metric(&s, &ric)?;
    soliton_fit_operator(alg.structure(), &op)
}

fn soliton_fit_operator(structure: &StructureConstants, op: &DMatrix<f64>) -> Result<SolitonCertificate> {
    let d = structure.dim();
    let ders = derivation_basis(structure);
    let mut design = DMatrix::zeros(d * d, ders.len() + 1);
    design
        .column_mut(0)
        .copy_from_slice(DMatrix::<f64>::identity(d, d).as_slice());
    for (k, dm) in ders.iter().enumerate() {
        design.column_mut(k + 1).copy_from_slice(dm.as_slice());
    }
    let target = DVector::from_column_slice(op.as_slice());
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&target, 1e-12)
        .map_err(|e| GeoError::Conditioning(e.to_string()))?;
    let mut dm = DMatrix::zeros(d, d);
    for (k, der) in ders.iter().enumerate() {
        dm += der * coef[k + 1];
    }
    let fitted = &design * &coef;
    let residual = (fitted - &target).norm() / target.norm().max(f64::MIN_POSITIVE);
    let defect = derivation_defect(structure, &dm)?;
    Ok(SolitonCertificate {
        c: coef[0],
        d: dm,
        residual,
        derivation_defect: defect,
    })
}

/// `Some(certificate)` when the fit residual is at most `tol`.
pub fn ricci_soliton_check(c: &CanonicalMetric, tol: f64) -> Option<SolitonCertificate> {
    ricci_soliton_fit(c).ok().filter(|cert| cert.residual <= tol)
}

/// The nilsoliton metric `diag(1, …, 1, β)` on the Heisenberg algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct NilsolitonData {
    pub n: usize,
    pub beta: f64,
    /// Diagonal of the Ricci operator, `c + D₁`.
    pub ricci_nil: DVector<f64>,
    pub c: f64,
    /// Diagonal of `D₁ = nβ·diag(½, …, ½, 1)`.
    pub d1: DVector<f64>,
}

impl NilsolitonData {
    /// Metric `diag(1, …, 1, β)` on the `2n − 1` dimensional Heisenberg algebra.
    pub fn metric(&self) -> DMatrix<f64> {
        let k = 2 * self.n - 1;
        let mut diag = DVector::from_element(k, 1.0);
        diag[k - 1] = self.beta;
        DMatrix::from_diagonal(&diag)
    }
}

pub fn heisenberg_nilsoliton(n: usize, beta: f64) -> Result<NilsolitonData> {
    if n < 2 {
        return Err(GeoError::InvalidDimension(n));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(GeoError::Domain(format!("beta must be positive, got {beta}")));
    }
    let k = 2 * n - 1;
    let nf = n as f64;
    let c = -(beta / 2.0) * (nf + 1.0);
    let mut d1 = DVector::from_element(k, nf * beta / 2.0);
    d1[k - 1] = nf * beta;
    let ricci_nil = d1.add_scalar(c);
    Ok(NilsolitonData {
        n,
        beta,
        ricci_nil,
        c,
        d1,
    })
}

/// Ricci operator of `diag(1, …, 1, β)` on the Heisenberg algebra from the
/// Koszul formula.
pub fn heisenberg_ricci_oracle(n: usize, beta: f64) -> Result<DMatrix<f64>> {
    let data = heisenberg_nilsoliton(n, beta)?;
    let s = data.metric();
    let curv = curvature_oracle(&heisenberg(n)?, &s)?;
    solve_metric(&s, &curv.ricci)
}

/// Extends the Heisenberg nilsoliton by `A` with `ad A|n = D₁` and
/// `⟨A, A⟩ = −(1/c) tr D₁²`, returning the canonical form of the result.
pub fn extend_nilsoliton(data: &NilsolitonData) -> Result<CanonicalMetric> {
    if !(data.c < 0.0) {
        return Err(GeoError::Domain(format!(
            "nilsoliton constant must be negative, got {}",
            data.c
        )));
    }
    let n = data.n;
    let k = 2 * n - 1;
    if data.d1.len() != k || data.ricci_nil.len() != k {
        return Err(GeoError::DimensionMismatch {
            expected: k,
            found: data.d1.len(),
        });
    }
    // ad X restricted to the nilradical is diag(½, …, ½, 1); A = scale · X.
    let scale = data.d1[k - 1];
    let proportional = data
        .d1
        .iter()
        .take(k - 1)
        .all(|v| (v - scale / 2.0).abs() <= 1e-12 * scale.abs());
    if !proportional {
        return Err(GeoError::ConstraintViolation(
            "D₁ is not a multiple of ad X on the nilradical".into(),
        ));
    }
    let tr_sq = data.d1.norm_squared();
    let aa = -tr_sq / data.c;
    let p = aa / (scale * scale);
    CanonicalMetric::new(n, p, vec![0.0; n - 1], vec![1.0; n - 2], data.beta)
}
