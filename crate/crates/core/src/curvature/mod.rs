//! Levi-Civita connection, Riemann curvature, Ricci and scalar curvature.
//!
//! Two engines produce the same [`CurvatureData`]:
//!
//! * the oracle ([`koszul_connection`], [`curvature_oracle`]) works for any
//!   structure constants and any positive-definite metric;
//! * the closed forms ([`closed_form_connection`], [`curvature_closed_form`],
//!   [`curvature_wedge`], [`ricci_closed_form`], [`scalar_closed_form`]) are
//!   explicit expressions in the canonical parameters `(p, x, σ, β)`.
//!
//! Sign conventions: `R(u, w) = ∇_u∇_w − ∇_w∇_u − ∇_{[u,w]}`,
//! `Ric(a, b) = tr(c ↦ R(c, a) b)`, `τ = tr(S⁻¹ Ric)`.

mod closed;
mod oracle;
mod sectional;
mod wedge;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Result};
use crate::liealg::{StructureConstants, Tensor3};
use crate::sympl::max_abs;

pub use closed::{
    closed_form_connection, curvature_closed_form, einstein_constant_fit, is_einstein,
    ricci_closed_form, scalar_closed_form,
};
pub use oracle::{curvature_from_connection, curvature_oracle, koszul_connection};
pub use sectional::{jacobi_operator, sectional_curvature, sectional_range, SectionalRange};
pub use wedge::{curvature_wedge, wedge_operator, WedgeExpansion};

/// `Γ[i][j][k]` with `∇_{e_i} e_j = Σ_k Γ[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    pub gamma: Tensor3,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// Matrix of `∇_{e_i}`: column `k` holds the coefficients of `∇_{e_i} e_k`.
    pub fn covariant_matrix(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |l, k| self.gamma.get(i, k, l))
    }

    /// `∇_u w` for constant-coefficient (left-invariant) fields.
    pub fn nabla(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.dim();
        check_len(d, u.len())?;
        check_len(d, w.len())?;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let c = u[i] * w[j];
                if c != 0.0 {
                    for (k, g) in self.gamma.fibre(i, j).iter().enumerate() {
                        out[k] += c * g;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest component of `∇_{e_i}e_j − ∇_{e_j}e_i − [e_i, e_j]`.
    pub fn torsion_defect(&self, structure: &StructureConstants) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let t = self.gamma.get(i, j, k)
                        - self.gamma.get(j, i, k)
                        - structure.constant(i, j, k);
                    worst = worst.max(t.abs());
                }
            }
        }
        worst
    }

    /// Largest entry of `g(∇_{e_i}e_j, e_k) + g(e_j, ∇_{e_i}e_k)`.
    pub fn metric_defect(&self, s: &DMatrix<f64>) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            // (Γ_iᵀ S)[j][k] = g(∇_i e_j, e_k)
            let lowered = self.covariant_matrix(i).transpose() * s;
            worst = worst.max(max_abs(&(&lowered + lowered.transpose())));
        }
        worst
    }

    /// Largest entrywise difference relative to the larger table.
    pub fn relative_diff(&self, other: &ConnectionTable) -> f64 {
        let scale = self.gamma.max_abs().max(other.gamma.max_abs());
        self.gamma.max_abs_diff(&other.gamma) / scale.max(f64::MIN_POSITIVE)
    }
}

/// Curvature operators for every ordered basis pair, the Ricci form and the
/// scalar curvature, together with the metric they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    metric: DMatrix<f64>,
    operators: Vec<DMatrix<f64>>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// Location and size of the largest disagreement between two curvature results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub relative: f64,
    /// Offending basis pair `(i, j)` for operator mismatches; `None` when the
    /// worst entry is in the Ricci form or the scalar.
    pub pair: Option<(usize, usize)>,
}

impl CurvatureData {
    /// Assembles the data; `operators[i * d + j]` is `R(e_i, e_j)`.
    pub(crate) fn new(
        metric: DMatrix<f64>,
        operators: Vec<DMatrix<f64>>,
        ricci: DMatrix<f64>,
        scalar: f64,
    ) -> Self {
        debug_assert_eq!(operators.len(), metric.nrows() * metric.nrows());
        Self {
            metric,
            operators,
            ricci,
            scalar,
        }
    }

    /// Ricci form and scalar computed from the operators by the trace definition.
    pub(crate) fn from_operators(metric: DMatrix<f64>, operators: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = metric.nrows();
        let ricci = DMatrix::from_fn(d, d, |a, b| {
            (0..d).map(|k| operators[k * d + a][(k, b)]).sum::<f64>()
        });
        let ricci = (&ricci + ricci.transpose()) * 0.5;
        let scalar = trace_against(&metric, &ricci)?;
        Ok(Self::new(metric, operators, ricci, scalar))
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// Matrix of `R(e_i, e_j)`; column `k` is `R(e_i, e_j) e_k`.
    pub fn operator(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.operators[i * self.dim() + j]
    }

    /// `R(u, w)` by bilinearity.
    pub fn operator_on(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.dim();
        check_len(d, u.len())?;
        check_len(d, w.len())?;
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let c = u[i] * w[j];
                if c != 0.0 {
                    out += self.operator(i, j) * c;
                }
            }
        }
        Ok(out)
    }

    /// `g(R(e_i, e_j) e_k, e_l)`.
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.operator(i, j).column(k).dot(&self.metric.column(l))
    }

    /// Ricci operator `S⁻¹ Ric`.
    pub fn ricci_operator(&self) -> Result<DMatrix<f64>> {
        solve_metric(&self.metric, &self.ricci)
    }

    /// Ricci form via the dual basis: `Ric(a, b) = Σ_{k,l} g^{kl} g(R(e_k, e_a) e_b, e_l)`.
    pub fn ricci_via_dual_basis(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let inv = solve_metric(&self.metric, &DMatrix::identity(d, d))?;
        Ok(DMatrix::from_fn(d, d, |a, b| {
            let mut s = 0.0;
            for k in 0..d {
                let lowered = self.metric.transpose() * self.operator(k, a).column(b);
                s += inv.row(k).transpose().dot(&lowered);
            }
            s
        }))
    }

    fn operator_scale(&self) -> f64 {
        self.operators
            .iter()
            .map(max_abs)
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }

    /// `max ‖R(e_i,e_j) + R(e_j,e_i)‖` relative to the largest operator entry.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max(max_abs(&(self.operator(i, j) + self.operator(j, i))));
            }
        }
        worst / self.operator_scale()
    }

    /// Skew-adjointness of each operator with respect to `g`.
    pub fn skew_adjoint_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for op in &self.operators {
            let lowered = self.metric.transpose() * op;
            worst = worst.max(max_abs(&(&lowered + lowered.transpose())));
        }
        worst / (self.operator_scale() * max_abs(&self.metric))
    }

    /// First Bianchi identity `R(e_i,e_j)e_k + R(e_j,e_k)e_i + R(e_k,e_i)e_j = 0`.
    pub fn bianchi_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let sum = self.operator(i, j).column(k)
                        + self.operator(j, k).column(i)
                        + self.operator(k, i).column(j);
                    worst = worst.max(sum.amax());
                }
            }
        }
        worst / self.operator_scale()
    }

    /// Pair symmetry `g(R(a,b)c, d) = g(R(c,d)a, b)`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let diff = self.lowered(a, b, c, e) - self.lowered(c, e, a, b);
                        worst = worst.max(diff.abs());
                    }
                }
            }
        }
        worst / (self.operator_scale() * max_abs(&self.metric))
    }

    pub fn ricci_symmetry_defect(&self) -> f64 {
        max_abs(&(&self.ricci - self.ricci.transpose())) / max_abs(&self.ricci).max(f64::MIN_POSITIVE)
    }

    /// Largest of the four curvature symmetry defects.
    pub fn symmetry_defect(&self) -> f64 {
        self.antisymmetry_defect()
            .max(self.skew_adjoint_defect())
            .max(self.bianchi_defect())
            .max(self.pair_symmetry_defect())
    }

    /// Worst relative disagreement in the operators only.
    pub fn compare_operators(&self, other: &CurvatureData) -> Discrepancy {
        let d = self.dim();
        let scale = self.operator_scale().max(other.operator_scale());
        let mut worst = Discrepancy {
            relative: 0.0,
            pair: None,
        };
        for i in 0..d {
            for j in 0..d {
                let r = max_abs(&(self.operator(i, j) - other.operator(i, j))) / scale;
                if r > worst.relative || worst.pair.is_none() {
                    worst = Discrepancy {
                        relative: r,
                        pair: Some((i, j)),
                    };
                }
            }
        }
        worst
    }

    /// Worst relative disagreement over operators, Ricci form and scalar.
    pub fn compare(&self, other: &CurvatureData) -> Discrepancy {
        let mut worst = self.compare_operators(other);
        let ric = relative_matrix_diff(&self.ricci, &other.ricci);
        let scal = relative_diff(self.scalar, other.scalar);
        if ric.max(scal) > worst.relative {
            worst = Discrepancy {
                relative: ric.max(scal),
                pair: None,
            };
        }
        worst
    }
}

/// `tr(S⁻¹ A)`.
pub(crate) fn trace_against(s: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    Ok(solve_metric(s, a)?.trace())
}

/// `S⁻¹ A` by Cholesky.
pub(crate) fn solve_metric(s: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = s.clone().cholesky().ok_or_else(|| {
        crate::GeoError::Conditioning("metric is not numerically positive definite".into())
    })?;
    Ok(chol.solve(a))
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn relative_matrix_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(f64::MIN_POSITIVE)
}
