//! The automorphism group of `ch^n` and its action on inner products.
//!
//! Every automorphism has the block form
//!
//! ```text
//!     | 1  0   0 |
//! F = | u  M   0 |      Mᵀ J M = λ J,  λ ≠ 0,  u = (1 / 2λ) M J v
//!     | a  vᵀ  λ |
//! ```
//!
//! in the basis `(X, Y, Z, W)`. The identity component factors as
//! `D ⋉ (Sp ⋉ T)`: diagonal scalings `diag(1, αI, α²)`, symplectic `M` with
//! `λ = 1`, and generalized translations `(v, a)` with `M = I`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::MetricMatrix;
use crate::error::{check_len, GeoError, Result};
use crate::liealg::{Basis, LieAlgebraCHn, StructureConstants};
use crate::sympl::{conformal_symplectic_defect, max_abs, phase_rotation, symplectic_form};

#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    basis: Basis,
    lambda: f64,
    m: DMatrix<f64>,
    v: DVector<f64>,
    a: f64,
    u: DVector<f64>,
}

fn derived_u(lambda: f64, m: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let j = symplectic_form(m.nrows() / 2);
    m * (j * v) / (2.0 * lambda)
}

impl Automorphism {
    /// Validated constructor; see [`make_automorphism`].
    pub fn new(n: usize, lambda: f64, m: DMatrix<f64>, v: DVector<f64>, a: f64) -> Result<Self> {
        Self::with_tol(n, lambda, m, v, a, crate::DEFAULT_TOL)
    }

    pub fn with_tol(
        n: usize,
        lambda: f64,
        m: DMatrix<f64>,
        v: DVector<f64>,
        a: f64,
        tol: f64,
    ) -> Result<Self> {
        let basis = Basis::new(n)?;
        let k = 2 * basis.m();
        check_len(k, m.nrows())?;
        check_len(k, m.ncols())?;
        check_len(k, v.len())?;
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(GeoError::Singular);
        }
        let defect = conformal_symplectic_defect(&m, lambda)?;
        let scale = max_abs(&m).powi(2).max(lambda.abs());
        if defect > tol * scale {
            return Err(GeoError::ConstraintViolation(format!(
                "Mᵀ J M differs from λ J by {defect:.3e}"
            )));
        }
        let u = derived_u(lambda, &m, &v);
        Ok(Self {
            basis,
            lambda,
            m,
            v,
            a,
            u,
        })
    }

    fn from_parts_unchecked(
        basis: Basis,
        lambda: f64,
        m: DMatrix<f64>,
        v: DVector<f64>,
        a: f64,
    ) -> Self {
        let u = derived_u(lambda, &m, &v);
        Self {
            basis,
            lambda,
            m,
            v,
            a,
            u,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        let basis = Basis::new(n)?;
        let k = 2 * basis.m();
        Ok(Self::from_parts_unchecked(
            basis,
            1.0,
            DMatrix::identity(k, k),
            DVector::zeros(k),
            0.0,
        ))
    }

    /// `F_d(α) = diag(1, αI, α²)`.
    pub fn diagonal(n: usize, alpha: f64) -> Result<Self> {
        let basis = Basis::new(n)?;
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(GeoError::Singular);
        }
        let k = 2 * basis.m();
        Ok(Self::from_parts_unchecked(
            basis,
            alpha * alpha,
            DMatrix::identity(k, k) * alpha,
            DVector::zeros(k),
            0.0,
        ))
    }

    /// `F_Sp(M)` for a symplectic `M`.
    pub fn symplectic(n: usize, m: DMatrix<f64>) -> Result<Self> {
        let k = 2 * (n.max(1) - 1);
        Self::new(n, 1.0, m, DVector::zeros(k), 0.0)
    }

    /// Generalized translation `F_t(v, a)`.
    pub fn translation(n: usize, v: DVector<f64>, a: f64) -> Result<Self> {
        let basis = Basis::new(n)?;
        let k = 2 * basis.m();
        check_len(k, v.len())?;
        Ok(Self::from_parts_unchecked(
            basis,
            1.0,
            DMatrix::identity(k, k),
            v,
            a,
        ))
    }

    /// Re-decomposes a `2n × 2n` block matrix into automorphism fields,
    /// checking the zero pattern and the `u`/`v` relation to `tol` (relative).
    pub fn from_matrix(f: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if f.nrows() % 2 != 0 || !f.is_square() {
            return Err(GeoError::DimensionMismatch {
                expected: f.nrows() + f.nrows() % 2,
                found: f.ncols(),
            });
        }
        let basis = Basis::new(f.nrows() / 2)?;
        let k = 2 * basis.m();
        let w = basis.w();
        let scale = max_abs(f).max(1.0);
        let mut pattern: f64 = (f[(0, 0)] - 1.0).abs();
        for c in 1..f.ncols() {
            pattern = pattern.max(f[(0, c)].abs());
        }
        for r in 1..w {
            pattern = pattern.max(f[(r, w)].abs());
        }
        if pattern > tol * scale {
            return Err(GeoError::ConstraintViolation(format!(
                "matrix does not have automorphism block pattern (defect {pattern:.3e})"
            )));
        }
        let lambda = f[(w, w)];
        let m = f.view((1, 1), (k, k)).into_owned();
        let v = DVector::from_iterator(k, (1..=k).map(|c| f[(w, c)]));
        let a = f[(w, 0)];
        let aut = Self::with_tol(basis.n(), lambda, m, v, a, tol)?;
        let u_given = DVector::from_iterator(k, (1..=k).map(|r| f[(r, 0)]));
        let u_defect = (u_given - &aut.u).amax();
        if u_defect > tol * scale {
            return Err(GeoError::ConstraintViolation(format!(
                "u differs from (1/2λ) M J v by {u_defect:.3e}"
            )));
        }
        Ok(aut)
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    /// The assembled `2n × 2n` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let b = self.basis;
        let k = 2 * b.m();
        let w = b.w();
        let mut f = DMatrix::zeros(b.dim(), b.dim());
        f[(0, 0)] = 1.0;
        f.view_mut((1, 0), (k, 1)).copy_from(&self.u);
        f.view_mut((1, 1), (k, k)).copy_from(&self.m);
        f[(w, 0)] = self.a;
        f.view_mut((w, 1), (1, k)).copy_from(&self.v.transpose());
        f[(w, w)] = self.lambda;
        f
    }

    /// `self ∘ other`, i.e. the matrix product `F·G`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        check_len(self.n(), other.n())?;
        let lambda = self.lambda * other.lambda;
        let m = &self.m * &other.m;
        let v = other.m.transpose() * &self.v + &other.v * self.lambda;
        let a = self.a + self.v.dot(&other.u) + self.lambda * other.a;
        Ok(Self::from_parts_unchecked(self.basis, lambda, m, v, a))
    }

    pub fn inverse(&self) -> Automorphism {
        let j = symplectic_form(self.basis.m());
        let lambda = 1.0 / self.lambda;
        // Mᵀ J M = λ J  ⇒  M⁻¹ = -(1/λ) J Mᵀ J.
        let m_inv = -(&j * self.m.transpose() * &j) * lambda;
        let v = -(m_inv.transpose() * &self.v) * lambda;
        let a = -v.dot(&self.u) - self.a * lambda;
        Self::from_parts_unchecked(self.basis, lambda, m_inv, v, a)
    }
}

/// Constructs `F(λ, M, v, a)` with `u = (1/2λ) M J v`.
pub fn make_automorphism(
    n: usize,
    lambda: f64,
    m: DMatrix<f64>,
    v: DVector<f64>,
    a: f64,
) -> Result<Automorphism> {
    Automorphism::new(n, lambda, m, v, a)
}

/// Largest entry of `[F e_i, F e_j] − F [e_i, e_j]` over all basis pairs.
pub fn bracket_defect(f: &DMatrix<f64>, structure: &StructureConstants) -> Result<f64> {
    let d = structure.dim();
    check_len(d, f.nrows())?;
    check_len(d, f.ncols())?;
    let mut worst: f64 = 0.0;
    let cols: Vec<DVector<f64>> = (0..d).map(|i| f.column(i).into_owned()).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            let lhs = structure.bracket(&cols[i], &cols[j])?;
            let rhs = f * structure.basis_bracket(i, j);
            worst = worst.max((lhs - rhs).amax());
        }
    }
    Ok(worst)
}

pub fn is_automorphism(f: &DMatrix<f64>, alg: &LieAlgebraCHn, tol: f64) -> Result<bool> {
    Ok(bracket_defect(f, alg.structure())? <= tol)
}

/// `S ↦ Fᵀ S F`.
pub fn act_on_metric(f: &Automorphism, s: &MetricMatrix) -> Result<MetricMatrix> {
    check_len(s.n(), f.n())?;
    let fm = f.matrix();
    let out = fm.transpose() * s.matrix() * &fm;
    MetricMatrix::new((&out + out.transpose()) * 0.5)
}

/// Seeded sample from the identity component `D ⋉ (Sp ⋉ T)`.
pub fn random_automorphism(n: usize, seed: u64) -> Result<Automorphism> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_automorphism_with(n, &mut rng, 1.0)
}

/// Draws `F = F_d(α) · F_Sp(M) · F_t(v, a)`.
///
/// `M` is a product of phase rotations, diagonal squeezes `diag(e^t, e^{-t})`,
/// orthogonal blocks `diag(Q, Q)` and symmetric shears, so it explores the
/// whole of `Sp(2n-2)` rather than only its diagonal torus. Every random
/// quantity is multiplied by `scale`; `scale = 0` gives the identity.
pub fn random_automorphism_with<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    scale: f64,
) -> Result<Automorphism> {
    let basis = Basis::new(n)?;
    let m = basis.m();
    let k = 2 * m;
    let mut uni = |lo: f64, hi: f64| rng.random_range(lo..hi) * scale;

    let alpha = uni(-0.5, 0.5).exp();

    let theta1: Vec<f64> = (0..m).map(|_| uni(-3.0, 3.0)).collect();
    let theta2: Vec<f64> = (0..m).map(|_| uni(-3.0, 3.0)).collect();
    let log_sq: Vec<f64> = (0..m).map(|_| uni(-0.5, 0.5)).collect();
    let squeeze = DMatrix::from_fn(k, k, |r, c| {
        if r != c {
            0.0
        } else if r < m {
            log_sq[r].exp()
        } else {
            (-log_sq[r - m]).exp()
        }
    });
    let shear_sym = {
        let raw = DMatrix::from_fn(m, m, |_, _| uni(-0.5, 0.5));
        (&raw + raw.transpose()) * 0.5
    };
    let mut shear = DMatrix::identity(k, k);
    shear.view_mut((0, m), (m, m)).copy_from(&shear_sym);
    let ortho = {
        let raw = DMatrix::from_fn(m, m, |r, c| {
            let base = if r == c { 1.0 } else { 0.0 };
            base + uni(-1.0, 1.0)
        });
        let qr = raw.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for c in 0..m {
            if r[(c, c)] < 0.0 {
                q.column_mut(c).neg_mut();
            }
        }
        let mut block = DMatrix::zeros(k, k);
        block.view_mut((0, 0), (m, m)).copy_from(&q);
        block.view_mut((m, m), (m, m)).copy_from(&q);
        block
    };
    let sp = phase_rotation(&theta1) * squeeze * ortho * shear * phase_rotation(&theta2);

    let v = DVector::from_fn(k, |_, _| uni(-1.0, 1.0));
    let a = uni(-1.0, 1.0);

    let d = Automorphism::diagonal(n, alpha)?;
    let s = Automorphism::symplectic(n, sp)?;
    let t = Automorphism::translation(n, v, a)?;
    d.compose(&s)?.compose(&t)
}
