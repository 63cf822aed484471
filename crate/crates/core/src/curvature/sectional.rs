use nalgebra::{DMatrix, DVector};

use super::{curvature_closed_form, CurvatureData};
use crate::canon::CanonicalMetric;
use crate::error::{check_len, GeoError, Result};

/// Planes with `|u ∧ w|² ≤ DEGENERACY · |u|²|w|²` are rejected.
pub const DEGENERACY: f64 = 1e-12;

impl CurvatureData {
    /// `K(u, w) = g(R(u,w)w, u) / (g(u,u) g(w,w) − g(u,w)²)`.
    pub fn sectional(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let s = self.metric();
        check_len(s.nrows(), u.len())?;
        check_len(s.nrows(), w.len())?;
        let (uu, ww, uw) = (
            u.dot(&(s * u)),
            w.dot(&(s * w)),
            u.dot(&(s * w)),
        );
        let gram = uu * ww - uw * uw;
        if !(gram > DEGENERACY * uu * ww) {
            return Err(GeoError::Domain(format!(
                "vectors do not span a plane (Gram determinant {gram:.3e})"
            )));
        }
        let rw = self.operator_on(u, w)? * w;
        Ok(rw.dot(&(s * u)) / gram)
    }
}

/// Sectional curvature of the plane spanned by `u` and `w` for a canonical
/// metric. Use [`CurvatureData::sectional`] to evaluate many planes.
pub fn sectional_curvature(c: &CanonicalMetric, u: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    curvature_closed_form(c)?.sectional(u, w)
}

/// Jacobi operator `J_u : w ↦ R(w, u) u`.
pub fn jacobi_operator(data: &CurvatureData, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = data.dim();
    check_len(d, u.len())?;
    let mut j = DMatrix::zeros(d, d);
    for k in 0..d {
        let ek = DVector::from_fn(d, |r, _| if r == k { 1.0 } else { 0.0 });
        j.set_column(k, &(data.operator_on(&ek, u)? * u));
    }
    Ok(j)
}

/// Extremes of `K(u, w)` over all planes containing `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalRange {
    pub min: f64,
    pub max: f64,
}

/// Eigenvalues of the Jacobi operator of the unit vector along `u`, restricted
/// to the `g`-orthogonal complement of `u`, are the sectional curvatures of
/// the principal planes through `u`; their extremes bound every `K(u, ·)`.
pub fn sectional_range(data: &CurvatureData, u: &DVector<f64>) -> Result<SectionalRange> {
    let s = data.metric();
    let d = data.dim();
    check_len(d, u.len())?;
    let norm_sq = u.dot(&(s * u));
    if !(norm_sq > 0.0) {
        return Err(GeoError::Domain("zero vector has no sectional curvature".into()));
    }
    let unit = u / norm_sq.sqrt();
    let jac = jacobi_operator(data, &unit)?;

    // Orthonormal coordinates: S = L Lᵀ, y = Lᵀ x.
    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| GeoError::Conditioning("metric is not positive definite".into()))?;
    let l = chol.l();
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| GeoError::Conditioning("singular Cholesky factor".into()))?;
    let j_on = l.transpose() * &jac * &lt_inv;
    let j_on = (&j_on + j_on.transpose()) * 0.5;
    let u_on = l.transpose() * &unit;

    // Householder reflection taking u_on to e_1; its remaining columns span u^⊥.
    let mut v = u_on.clone();
    v[0] -= if u_on[0] >= 0.0 { -1.0 } else { 1.0 };
    let h = DMatrix::identity(d, d) - (&v * v.transpose()) * (2.0 / v.norm_squared());
    let q = h.columns(1, d - 1).into_owned();
    let restricted = q.transpose() * j_on * &q;
    let eig = restricted.symmetric_eigenvalues();
    Ok(SectionalRange {
        min: eig.min(),
        max: eig.max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::random_canonical;
    use approx::assert_relative_eq;

    fn einstein(n: usize) -> CurvatureData {
        let c = CanonicalMetric::new(n, 1.0, vec![0.0; n - 1], vec![1.0; n - 2], 1.0).unwrap();
        curvature_closed_form(&c).unwrap()
    }

    #[test]
    fn einstein_examples() {
        let data = einstein(2);
        let e = |k| DVector::from_fn(4, |r, _| if r == k { 1.0 } else { 0.0 });
        assert_relative_eq!(data.sectional(&e(0), &e(3)).unwrap(), -1.0, epsilon = 1e-14);
        assert_relative_eq!(data.sectional(&e(0), &e(1)).unwrap(), -0.25, epsilon = 1e-14);
        let c = CanonicalMetric::new(2, 1.0, vec![0.0], vec![], 1.0).unwrap();
        assert_relative_eq!(sectional_curvature(&c, &e(0), &e(3)).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn plane_invariance_and_degeneracy() {
        let c = random_canonical(3, 4).unwrap();
        let data = curvature_closed_form(&c).unwrap();
        let u = DVector::from_vec(vec![0.3, -1.0, 0.2, 0.5, 0.1, -0.7]);
        let w = DVector::from_vec(vec![1.1, 0.4, -0.3, 0.0, 0.9, 0.2]);
        let k = data.sectional(&u, &w).unwrap();
        assert_relative_eq!(data.sectional(&(&u + &w), &w).unwrap(), k, epsilon = 1e-12);
        assert_relative_eq!(data.sectional(&w, &(&u * 2.5)).unwrap(), k, epsilon = 1e-12);
        assert!(matches!(data.sectional(&u, &(&u * 3.0)), Err(GeoError::Domain(_))));
    }

    #[test]
    fn range_bounds_every_plane_through_u() {
        let c = random_canonical(3, 8).unwrap();
        let data = curvature_closed_form(&c).unwrap();
        let u = DVector::from_vec(vec![0.3, -1.0, 0.2, 0.5, 0.1, -0.7]);
        let r = sectional_range(&data, &u).unwrap();
        for k in 0..6 {
            let w = DVector::from_fn(6, |i, _| ((i * 7 + k * 3) % 5) as f64 - 2.0);
            if let Ok(kw) = data.sectional(&u, &w) {
                assert!(kw >= r.min - 1e-12 && kw <= r.max + 1e-12);
            }
        }
    }

    #[test]
    fn einstein_range_is_quarter_pinched() {
        let data = einstein(3);
        let u = DVector::from_vec(vec![0.3, -1.0, 0.2, 0.5, 0.1, -0.7]);
        let r = sectional_range(&data, &u).unwrap();
        assert_relative_eq!(r.min, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r.max, -0.25, epsilon = 1e-12);
    }
}
