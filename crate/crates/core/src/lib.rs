//! Left-invariant Riemannian geometry of the solvable Lie group underlying
//! complex hyperbolic space.
//!
//! The Lie algebra is `R ⋉ h^n`, spanned by `X, Y_1..Y_{n-1}, Z_1..Z_{n-1}, W`
//! with nonzero brackets
//!
//! ```text
//! [X, Y_i] = Y_i / 2,   [X, Z_i] = Z_i / 2,   [X, W] = W,   [Z_j, Y_i] = δ_ij W.
//! ```
//!
//! The crate covers:
//!
//! * [`liealg`]: structure constants, brackets and the Jacobi check.
//! * [`sympl`]: the standard symplectic form, Williamson normal form and
//!   phase rotations.
//! * [`autgrp`]: the automorphism group and its action on inner products.
//! * [`canon`]: reduction of any inner product to its orbit representative
//!   `S(p, x, σ, β)` and the resulting isometry test.
//! * [`curvature`]: a Koszul-formula oracle working from structure constants,
//!   closed-form connection/curvature/Ricci/scalar expressions for canonical
//!   metrics, the wedge (2-vector) form of the curvature operator, Einstein
//!   detection and sectional curvature.
//! * [`soliton`]: orthonormal frames, mean curvature vector, the Ricci soliton
//!   equation `Ric = cI + D`, the Heisenberg nilsoliton and its extension to
//!   the Einstein metric.

pub mod autgrp;
pub mod canon;
pub mod curvature;
pub mod error;
pub mod liealg;
pub mod soliton;
pub mod sympl;

pub use autgrp::Automorphism;
pub use canon::{CanonicalMetric, Canonicalization, MetricMatrix};
pub use curvature::{ConnectionTable, CurvatureData, WedgeExpansion};
pub use error::{GeoError, Result};
pub use liealg::{LieAlgebraCHn, StructureConstants, Tensor3};

/// Default relative tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-9;
