//! Symplectic linear algebra on `R^{2m}`.
//!
//! Coordinates are split as `(x_1..x_m, y_1..y_m)` and the standard form is
//! `J_m = [[0, I_m], [-I_m, 0]]`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{GeoError, Result};

/// Condition number above which a positive-definite input is rejected.
pub const CONDITION_CAP: f64 = 1e12;

/// The standard symplectic form `J_m`.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = 1.0;
        j[(m + i, i)] = -1.0;
    }
    j
}

pub(crate) fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn half_dim(f: &DMatrix<f64>) -> Result<usize> {
    if !f.is_square() {
        return Err(GeoError::DimensionMismatch {
            expected: f.nrows(),
            found: f.ncols(),
        });
    }
    if f.nrows() % 2 != 0 {
        return Err(GeoError::Domain(format!(
            "symplectic matrices need even dimension, got {}",
            f.nrows()
        )));
    }
    Ok(f.nrows() / 2)
}

/// Largest entry of `Fᵀ J F − λ J`.
pub fn conformal_symplectic_defect(f: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    let m = half_dim(f)?;
    let j = symplectic_form(m);
    Ok(max_abs(&(f.transpose() * &j * f - j * lambda)))
}

/// `F ∈ Sp(2m)` iff `‖FᵀJF − J‖_max ≤ tol`.
pub fn is_symplectic(f: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(conformal_symplectic_defect(f, 1.0)? <= tol)
}

/// Ordering of symplectic eigenvalues in a Williamson decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenOrder {
    #[default]
    Descending,
    Ascending,
}

/// `Mᵀ S M = diag(d, d)` with `M` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub m: DMatrix<f64>,
    pub d: Vec<f64>,
}

impl WilliamsonDecomposition {
    /// `diag(d_1..d_m, d_1..d_m)`.
    pub fn normal_form(&self) -> DMatrix<f64> {
        let k = self.d.len();
        DMatrix::from_fn(2 * k, 2 * k, |r, c| if r == c { self.d[r % k] } else { 0.0 })
    }
}

/// Checks symmetry and positive definiteness, returning the eigenvalue range.
pub(crate) fn check_spd(s: &DMatrix<f64>, tol: f64) -> Result<(f64, f64)> {
    if !s.is_square() {
        return Err(GeoError::DimensionMismatch {
            expected: s.nrows(),
            found: s.ncols(),
        });
    }
    let scale = max_abs(s);
    let asym = max_abs(&(s - s.transpose()));
    if asym > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(GeoError::Domain(format!(
            "matrix is not symmetric (max |S - Sᵀ| = {asym:.3e})"
        )));
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let lo = eig.min();
    let hi = eig.max();
    if !(lo > 0.0) {
        return Err(GeoError::Domain(format!(
            "matrix is not positive definite (min eigenvalue {lo:.3e})"
        )));
    }
    if hi / lo > CONDITION_CAP {
        return Err(GeoError::Conditioning(format!(
            "condition number {:.3e} exceeds {CONDITION_CAP:.0e}",
            hi / lo
        )));
    }
    Ok((lo, hi))
}

/// Williamson normal form of a symmetric positive-definite `2m × 2m` matrix.
///
/// With `S = L Lᵀ` (Cholesky) the matrix `K = Lᵀ J L` is skew-symmetric and
/// `iK` is Hermitian with eigenvalues `±d_j`. An eigenvector `a + ib` for `+d_j`
/// satisfies `K a = d_j b`, `K b = -d_j a`, which yields an orthogonal `Q` with
/// `Qᵀ K Q = [[0, D], [-D, 0]]`. Then `N = L Q diag(d, d)^{-1/2}` is symplectic
/// with `Nᵀ S⁻¹ N = diag(d, d)⁻¹`, and `M = J N Jᵀ = N^{-T}` is the result.
///
/// Each symplectic pair is determined up to a rotation in its `(j, m+j)` plane;
/// that rotation is fixed by requiring `M[j, m+j] = 0` and `M[j, j] ≥ 0`, so
/// diagonal inputs produce diagonal `M`.
pub fn williamson(s: &DMatrix<f64>, order: EigenOrder) -> Result<WilliamsonDecomposition> {
    williamson_with_tol(s, order, crate::DEFAULT_TOL)
}

pub fn williamson_with_tol(
    s: &DMatrix<f64>,
    order: EigenOrder,
    tol: f64,
) -> Result<WilliamsonDecomposition> {
    let m = half_dim(s)?;
    check_spd(s, tol)?;
    let sym = (s + s.transpose()) * 0.5;
    let l = sym
        .cholesky()
        .ok_or_else(|| GeoError::Conditioning("Cholesky factorisation failed".into()))?
        .unpack();
    let j = symplectic_form(m);
    let k = l.transpose() * &j * &l;

    let herm: DMatrix<Complex<f64>> = k.map(|v| Complex::new(0.0, v));
    let eig = SymmetricEigen::new(herm);

    let mut pos: Vec<usize> = (0..2 * m).collect();
    pos.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    pos.truncate(m);
    if order == EigenOrder::Ascending {
        pos.reverse();
    }
    let d: Vec<f64> = pos.iter().map(|&i| eig.eigenvalues[i]).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(GeoError::Conditioning(
            "non-positive symplectic eigenvalue".into(),
        ));
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut q = DMatrix::zeros(2 * m, 2 * m);
    for (slot, &col) in pos.iter().enumerate() {
        let psi = eig.eigenvectors.column(col);
        for r in 0..2 * m {
            q[(r, slot)] = sqrt2 * psi[r].im;
            q[(r, m + slot)] = sqrt2 * psi[r].re;
        }
    }

    let mut n = l * q;
    for (slot, dj) in d.iter().enumerate() {
        let inv = 1.0 / dj.sqrt();
        n.column_mut(slot).scale_mut(inv);
        n.column_mut(m + slot).scale_mut(inv);
    }
    let mut frame = &j * n * j.transpose();

    for slot in 0..m {
        let theta = frame[(slot, m + slot)].atan2(frame[(slot, slot)]);
        rotate_pair(&mut frame, slot, m + slot, theta);
    }

    Ok(WilliamsonDecomposition { m: frame, d })
}

/// Right-multiplies by the rotation acting on columns `a`, `b`.
fn rotate_pair(f: &mut DMatrix<f64>, a: usize, b: usize, theta: f64) {
    let (sin, cos) = theta.sin_cos();
    for r in 0..f.nrows() {
        let ca = f[(r, a)];
        let cb = f[(r, b)];
        f[(r, a)] = cos * ca + sin * cb;
        f[(r, b)] = -sin * ca + cos * cb;
    }
}

/// `M(θ) = [[A(θ), -B(θ)], [B(θ), A(θ)]]` with `A = diag(cos θ_k)`,
/// `B = diag(sin θ_k)`: multiplication by `e^{iθ_k}` on each complex coordinate.
pub fn phase_rotation(theta: &[f64]) -> DMatrix<f64> {
    let m = theta.len();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for (k, t) in theta.iter().enumerate() {
        let (sin, cos) = t.sin_cos();
        r[(k, k)] = cos;
        r[(k, m + k)] = -sin;
        r[(m + k, k)] = sin;
        r[(m + k, m + k)] = cos;
    }
    r
}
