//! Orbit representatives of inner products under `Aut(ch^n)`.
//!
//! Every positive-definite inner product is equivalent to exactly one
//!
//! ```text
//!               | p  xᵀ 0  0 |
//! S(p,x,σ,β) =  | x  σ  0  0 |     σ = diag(σ_1, …, σ_{n-2}, 1),  σ_1 ≥ … ≥ σ_{n-2} ≥ 1
//!               | 0  0  σ  0 |     p, β > 0,  x_i ≥ 0
//!               | 0  0  0  β |
//! ```
//!
//! [`canonicalize`] reaches it by composing a generalized translation, a
//! Williamson symplectic diagonalisation, a second translation, a diagonal
//! scaling and a phase rotation. A final orthogonal rotation inside each run
//! of equal `σ` values moves the coupling of that run onto its first entry, so
//! representatives stay unique when symplectic eigenvalues coincide.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autgrp::Automorphism;
use crate::error::{check_len, GeoError, Result};
use crate::liealg::Basis;
use crate::sympl::{check_spd, max_abs, phase_rotation, williamson_with_tol, EigenOrder};

/// Symmetry tolerance (relative) for [`MetricMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A symmetric positive-definite `2n × 2n` inner product in the basis
/// `(X, Y, Z, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    basis: Basis,
    s: DMatrix<f64>,
}

impl MetricMatrix {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        if !s.is_square() {
            return Err(GeoError::DimensionMismatch {
                expected: s.nrows(),
                found: s.ncols(),
            });
        }
        if s.nrows() % 2 != 0 {
            return Err(GeoError::Domain(format!(
                "metric dimension must be even, got {}",
                s.nrows()
            )));
        }
        let basis = Basis::new(s.nrows() / 2)?;
        check_spd(&s, SYMMETRY_TOL)?;
        Ok(Self { basis, s })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s
    }

    /// `g(u, w) = uᵀ S w`.
    pub fn inner(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (u.transpose() * &self.s * w)[(0, 0)]
    }
}

/// The parameters `(p, x, σ, β)` of a canonical inner product.
///
/// `sigma` holds `σ_1 … σ_{n-2}`; the trailing `σ_{n-1} = 1` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMetric {
    basis: Basis,
    p: f64,
    x: Vec<f64>,
    sigma: Vec<f64>,
    beta: f64,
}

impl CanonicalMetric {
    pub fn new(n: usize, p: f64, x: Vec<f64>, sigma: Vec<f64>, beta: f64) -> Result<Self> {
        let basis = Basis::new(n)?;
        check_len(basis.m(), x.len())?;
        check_len(basis.m() - 1, sigma.len())?;
        let c = Self {
            basis,
            p,
            x,
            sigma,
            beta,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GeoError::Domain(msg));
        let finite = self.p.is_finite()
            && self.beta.is_finite()
            && self.x.iter().chain(&self.sigma).all(|v| v.is_finite());
        if !finite {
            return bad("canonical parameters must be finite".into());
        }
        if !(self.p > 0.0) {
            return bad(format!("p must be positive, got {}", self.p));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if let Some(xi) = self.x.iter().find(|v| **v < 0.0) {
            return bad(format!("x entries must be nonnegative, got {xi}"));
        }
        let full = self.sigma_full();
        if full.windows(2).any(|w| w[0] < w[1]) {
            return bad(format!("sigma must be non-increasing and >= 1, got {full:?}"));
        }
        let z = self.z();
        if !(z > Z_FLOOR * self.p) {
            return bad(format!("z = p - Σ x_i²/σ_i must be positive, got {z:.3e}"));
        }
        for run in equal_runs(&full) {
            if run.len() > 1 && run[1..].iter().any(|&i| self.x[i] != 0.0) {
                return bad(format!(
                    "within a run of equal sigma values only the first x entry may be \
                     nonzero (indices {run:?})"
                ));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `σ_1 … σ_{n-2}` (without the trailing 1).
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `σ_1 … σ_{n-1}` including the trailing `σ_{n-1} = 1`.
    pub fn sigma_full(&self) -> Vec<f64> {
        let mut s = self.sigma.clone();
        s.push(1.0);
        s
    }

    /// `z = p − Σ x_i² / σ_i`, the Schur complement of the `Y` block.
    pub fn z(&self) -> f64 {
        self.p
            - self
                .x
                .iter()
                .zip(self.sigma_full())
                .map(|(x, s)| x * x / s)
                .sum::<f64>()
    }

    /// `v = σ⁻¹ x`.
    pub fn v(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.sigma_full())
            .map(|(x, s)| x / s)
            .collect()
    }

    /// Parameter test of the Einstein condition: `pβ = 1`, `x = 0`, `σ = 1`.
    pub fn satisfies_einstein_conditions(&self, tol: f64) -> bool {
        (self.p * self.beta - 1.0).abs() <= tol
            && self.x.iter().all(|x| x.abs() <= tol)
            && self.sigma.iter().all(|s| (s - 1.0).abs() <= tol)
    }

    /// Largest absolute difference over `p`, `x`, `σ`, `β`.
    pub fn max_param_diff(&self, other: &CanonicalMetric) -> Result<f64> {
        check_len(self.n(), other.n())?;
        let scalars = [(self.p - other.p).abs(), (self.beta - other.beta).abs()];
        let vectors = self
            .x
            .iter()
            .zip(&other.x)
            .chain(self.sigma.iter().zip(&other.sigma))
            .map(|(a, b)| (a - b).abs());
        Ok(scalars.into_iter().chain(vectors).fold(0.0, f64::max))
    }

    pub fn expand(&self) -> MetricMatrix {
        let b = self.basis;
        let sigma = self.sigma_full();
        let mut s = DMatrix::zeros(b.dim(), b.dim());
        s[(b.x(), b.x())] = self.p;
        for i in 0..b.m() {
            s[(b.x(), b.y(i))] = self.x[i];
            s[(b.y(i), b.x())] = self.x[i];
            s[(b.y(i), b.y(i))] = sigma[i];
            s[(b.z(i), b.z(i))] = sigma[i];
        }
        s[(b.w(), b.w())] = self.beta;
        MetricMatrix { basis: b, s }
    }
}

/// Degenerate Schur complements `z ≤ Z_FLOOR · p` are rejected.
pub const Z_FLOOR: f64 = 1e-12;

/// Maximal runs of (exactly) equal consecutive values.
fn equal_runs(values: &[f64]) -> Vec<Vec<usize>> {
    runs_within(values, 0.0)
}

/// Maximal runs whose members lie within `rel_tol` (relative) of the run's
/// first value. `values` must be sorted non-increasing.
fn runs_within(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if (values[run[0]] - v).abs() <= rel_tol * values[run[0]].abs() => {
                run.push(i)
            }
            _ => runs.push(vec![i]),
        }
    }
    runs
}

/// Tunables for [`canonicalize_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonOptions {
    /// Relative tolerance for input symmetry and Williamson checks.
    pub tol: f64,
    /// Symplectic eigenvalue ratios closer than this (relative) are treated as equal.
    pub tie_tol: f64,
}

impl Default for CanonOptions {
    fn default() -> Self {
        Self {
            tol: crate::DEFAULT_TOL,
            tie_tol: 1e-9,
        }
    }
}

/// Result of [`canonicalize`]: `Fᵀ S F = expand(canonical)` up to `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonicalization {
    pub canonical: CanonicalMetric,
    pub automorphism: Automorphism,
    /// `‖Fᵀ S F − expand(c)‖_max / ‖S‖_max`.
    pub residual: f64,
}

fn congruence(f: &Automorphism, s: &DMatrix<f64>) -> DMatrix<f64> {
    let fm = f.matrix();
    let out = fm.transpose() * s * &fm;
    (&out + out.transpose()) * 0.5
}

/// Householder reflection `H` with `H x = ‖x‖ e_1`.
fn householder_to_first(x: &DVector<f64>) -> DMatrix<f64> {
    let k = x.len();
    let norm = x.norm();
    let mut u = x.clone();
    u[0] -= norm;
    let uu = u.norm_squared();
    if uu <= f64::EPSILON * f64::EPSILON * norm * norm || uu == 0.0 {
        return DMatrix::identity(k, k);
    }
    DMatrix::identity(k, k) - (&u * u.transpose()) * (2.0 / uu)
}

pub fn canonicalize(s: &MetricMatrix) -> Result<Canonicalization> {
    canonicalize_with(s, CanonOptions::default())
}

/// `Some(c)` when `s` is already exactly `expand(c)` for a valid canonical tuple
/// satisfying the tie rule, so canonical inputs are fixed points bit for bit.
fn recognize(metric: &MetricMatrix, tie_tol: f64) -> Option<CanonicalMetric> {
    let b = metric.basis();
    let s = metric.matrix();
    let m = b.m();
    let sigma: Vec<f64> = (0..m).map(|i| s[(b.y(i), b.y(i))]).collect();
    let x: Vec<f64> = (0..m).map(|i| s[(b.x(), b.y(i))]).collect();
    if sigma[m - 1] != 1.0 || (0..m).any(|i| s[(b.z(i), b.z(i))] != sigma[i]) {
        return None;
    }
    for run in runs_within(&sigma, tie_tol) {
        let first = sigma[run[0]];
        if run.iter().any(|&i| sigma[i] != first) || run[1..].iter().any(|&i| x[i] != 0.0) {
            return None;
        }
    }
    let c = CanonicalMetric::new(b.n(), s[(b.x(), b.x())], x, sigma[..m - 1].to_vec(), s[(b.w(), b.w())]).ok()?;
    (c.expand().matrix() == s).then_some(c)
}

pub fn canonicalize_with(metric: &MetricMatrix, opts: CanonOptions) -> Result<Canonicalization> {
    if let Some(canonical) = recognize(metric, opts.tie_tol) {
        return Ok(Canonicalization {
            canonical,
            automorphism: Automorphism::identity(metric.n())?,
            residual: 0.0,
        });
    }
    let b = metric.basis();
    let n = b.n();
    let m = b.m();
    let k = 2 * m;
    let w = b.w();
    let s0 = metric.matrix();

    // 1. translation F_t(-w/β₁, 0) clears the (Y,Z)–W coupling.
    let beta1 = s0[(w, w)];
    let coupling = DVector::from_iterator(k, (1..=k).map(|r| s0[(r, w)]));
    let f1 = Automorphism::translation(n, -coupling / beta1, 0.0)?;
    let s1 = congruence(&f1, s0);

    // 2. Williamson diagonalisation of the (Y,Z) block, descending.
    let inner = s1.view((1, 1), (k, k)).into_owned();
    let will = williamson_with_tol(&inner, EigenOrder::Descending, opts.tol)?;
    let f2 = Automorphism::symplectic(n, will.m.clone())?;
    let s2 = congruence(&f2, &s1);

    // 3. translation F_t(0, -q₁/β₁) clears the X–W coupling.
    let f3 = Automorphism::translation(n, DVector::zeros(k), -s2[(0, w)] / s2[(w, w)])?;
    let s3 = congruence(&f3, &s2);

    // 4. diagonal scaling normalising the smallest symplectic eigenvalue to 1.
    let d_min = will.d[m - 1];
    let f4 = Automorphism::diagonal(n, d_min.powf(-0.5))?;
    let s4 = congruence(&f4, &s3);

    // 5. phase rotation e^{iθ_k} z̄_k = |z̄_k| makes the X coupling real.
    let theta: Vec<f64> = (0..m)
        .map(|i| {
            let (re, im) = (s4[(0, 1 + i)], s4[(0, 1 + m + i)]);
            if re == 0.0 && im == 0.0 {
                0.0
            } else {
                im.atan2(re)
            }
        })
        .collect();
    let f5 = Automorphism::symplectic(n, phase_rotation(&theta))?;
    let s5 = congruence(&f5, &s4);

    // 6. within runs of equal σ, rotate the coupling onto the run's first entry.
    let mut sigma: Vec<f64> = will.d.iter().map(|d| d / d_min).collect();
    sigma[m - 1] = 1.0;
    let runs = runs_within(&sigma, opts.tie_tol);
    let mut block = DMatrix::identity(k, k);
    for run in runs.iter().filter(|r| r.len() > 1) {
        let xr = DVector::from_iterator(run.len(), run.iter().map(|&i| s5[(0, 1 + i)]));
        let h = householder_to_first(&xr);
        for (a, &ia) in run.iter().enumerate() {
            for (c, &ic) in run.iter().enumerate() {
                block[(ia, ic)] = h[(a, c)];
                block[(m + ia, m + ic)] = h[(a, c)];
            }
        }
        let level = if run.contains(&(m - 1)) {
            1.0
        } else {
            run.iter().map(|&i| sigma[i]).sum::<f64>() / run.len() as f64
        };
        for &i in run {
            sigma[i] = level;
        }
    }
    let f6 = Automorphism::symplectic(n, block)?;
    let s6 = congruence(&f6, &s5);

    let mut x: Vec<f64> = (0..m).map(|i| s6[(0, 1 + i)].max(0.0)).collect();
    for run in &runs {
        for &i in &run[1..] {
            x[i] = 0.0;
        }
    }
    let p = s6[(0, 0)];
    let beta = s6[(w, w)];
    sigma.pop();

    let z = p - x.iter().zip(&sigma).map(|(x, s)| x * x / s).sum::<f64>() - x[m - 1].powi(2);
    if !(z > Z_FLOOR * p) {
        return Err(GeoError::Conditioning(format!(
            "degenerate Schur complement z = {z:.3e}"
        )));
    }
    let canonical = CanonicalMetric::new(n, p, x, sigma, beta)?;

    let f = f1
        .compose(&f2)?
        .compose(&f3)?
        .compose(&f4)?
        .compose(&f5)?
        .compose(&f6)?;
    let residual =
        max_abs(&(congruence(&f, s0) - canonical.expand().matrix())) / max_abs(s0);

    Ok(Canonicalization {
        canonical,
        automorphism: f,
        residual,
    })
}

/// True iff both metrics reduce to the same canonical tuple within `tol`
/// (absolute, per parameter).
pub fn is_isometric(s1: &MetricMatrix, s2: &MetricMatrix, tol: f64) -> Result<bool> {
    check_len(s1.n(), s2.n())?;
    let c1 = canonicalize(s1)?.canonical;
    let c2 = canonicalize(s2)?.canonical;
    Ok(c1.max_param_diff(&c2)? <= tol)
}

/// Default parameter tolerance for [`is_isometric`].
pub const ISOMETRY_TOL: f64 = 1e-7;

/// Random canonical tuple with `p ∈ [0.5, 3)`, `σ_i ∈ [1, 3)`, `β ∈ [0.3, 3)`
/// and `x_i ∈ [0, 1)` shrunk until `z ≥ 0.1 p`.
pub fn random_canonical_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CanonicalMetric> {
    let basis = Basis::new(n)?;
    let m = basis.m();
    let p = rng.random_range(0.5..3.0);
    let mut sigma: Vec<f64> = (0..m - 1).map(|_| rng.random_range(1.0..3.0)).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let mut x: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let beta = rng.random_range(0.3..3.0);
    let full: Vec<f64> = sigma.iter().copied().chain([1.0]).collect();
    loop {
        let sum: f64 = x.iter().zip(&full).map(|(x, s)| x * x / s).sum();
        if p - sum >= 0.1 * p {
            break;
        }
        x.iter_mut().for_each(|v| *v *= 0.5);
    }
    CanonicalMetric::new(n, p, x, sigma, beta)
}

pub fn random_canonical(n: usize, seed: u64) -> Result<CanonicalMetric> {
    random_canonical_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}
