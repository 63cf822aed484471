use nalgebra::{DMatrix, DVector};

use super::{ConnectionTable, CurvatureData};
use crate::canon::{CanonicalMetric, Z_FLOOR};
use crate::error::{GeoError, Result};
use crate::liealg::{Basis, Tensor3};

/// Canonical parameters unpacked for the closed forms.
pub(crate) struct Params {
    pub b: Basis,
    pub d: usize,
    pub m: usize,
    pub p: f64,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub beta: f64,
    pub z: f64,
}

impl Params {
    pub fn new(c: &CanonicalMetric) -> Result<Self> {
        let z = c.z();
        if !(z > Z_FLOOR * c.p()) {
            return Err(GeoError::Domain(format!("degenerate z = {z:.3e}")));
        }
        let b = c.basis();
        Ok(Self {
            b,
            d: b.dim(),
            m: b.m(),
            p: c.p(),
            x: c.x().to_vec(),
            s: c.sigma_full(),
            v: c.v(),
            beta: c.beta(),
            z,
        })
    }

    pub fn e(&self, a: usize) -> DVector<f64> {
        self.b.unit(a)
    }

    pub fn ex(&self) -> DVector<f64> {
        self.e(self.b.x())
    }

    pub fn ey(&self, i: usize) -> DVector<f64> {
        self.e(self.b.y(i))
    }

    pub fn ez(&self, i: usize) -> DVector<f64> {
        self.e(self.b.z(i))
    }

    pub fn ew(&self) -> DVector<f64> {
        self.e(self.b.w())
    }

    /// `Σ v_l Y_l`.
    pub fn vy(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.d);
        for l in 0..self.m {
            out[self.b.y(l)] = self.v[l];
        }
        out
    }

    /// `Σ (x_l / σ_l²) Z_l`.
    pub fn zl(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.d);
        for l in 0..self.m {
            out[self.b.z(l)] = self.x[l] / (self.s[l] * self.s[l]);
        }
        out
    }

    /// `P = X − Σ v_l Y_l`, the `g`-orthogonal complement of the `Y` block in `span(X, Y)`.
    pub fn pvec(&self) -> DVector<f64> {
        self.ex() - self.vy()
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// The nonzero covariant derivatives of a canonical metric.
pub fn closed_form_connection(c: &CanonicalMetric) -> Result<ConnectionTable> {
    let q = Params::new(c)?;
    let b = q.b;
    let (z, p, beta) = (q.z, q.p, q.beta);
    let pv = q.pvec();
    let sum_xv: f64 = q.x.iter().zip(&q.v).map(|(x, v)| x * v).sum();
    let mut g = Tensor3::zeros(q.d);

    g.set_fibre(b.x(), b.x(), &((q.ex() * sum_xv - q.vy() * p) / (2.0 * z)));
    for i in 0..q.m {
        let (x, s) = (q.x[i], q.s[i]);
        let xp = &pv * (x / (2.0 * z));
        g.set_fibre(b.x(), b.y(i), &xp);
        g.set_fibre(b.y(i), b.x(), &(&xp - q.ey(i) * 0.5));
        g.set_fibre(b.y(i), b.y(i), &(&pv * (s / (2.0 * z))));
        g.set_fibre(b.y(i), b.z(i), &(q.ew() * -0.5));
        g.set_fibre(b.z(i), b.y(i), &(q.ew() * 0.5));
        let yw = q.ez(i) * (beta / (2.0 * s));
        g.set_fibre(b.y(i), b.w(), &yw);
        g.set_fibre(b.w(), b.y(i), &yw);
        g.set_fibre(b.z(i), b.x(), &(q.ez(i) * -0.5));
        g.set_fibre(b.z(i), b.z(i), &(&pv * (s / (2.0 * z))));
        let zw = (&pv * x - q.ey(i) * z) * (beta / (2.0 * z * s));
        g.set_fibre(b.w(), b.z(i), &zw);
        g.set_fibre(b.z(i), b.w(), &zw);
    }
    g.set_fibre(b.w(), b.w(), &(&pv * (beta / z)));
    g.set_fibre(b.w(), b.x(), &(-q.ew()));
    Ok(ConnectionTable { gamma: g })
}

/// Operator storage filled pair by pair; `set` writes `R(e_a,e_b)e_c` and the
/// antisymmetric partner.
struct OperatorTable {
    d: usize,
    ops: Vec<DMatrix<f64>>,
}

impl OperatorTable {
    fn new(d: usize) -> Self {
        Self {
            d,
            ops: vec![DMatrix::zeros(d, d); d * d],
        }
    }

    fn set(&mut self, a: usize, b: usize, c: usize, value: &DVector<f64>) {
        let d = self.d;
        self.ops[a * d + b].set_column(c, value);
        self.ops[b * d + a].set_column(c, &(-value));
    }
}

/// Every curvature operator `R(e_a, e_b)` from explicit expressions in
/// `(p, x, σ, β)`; Ricci and scalar from [`ricci_closed_form`] and
/// [`scalar_closed_form`].
pub fn curvature_closed_form(c: &CanonicalMetric) -> Result<CurvatureData> {
    let q = Params::new(c)?;
    let b = q.b;
    let (m, z, p, be) = (q.m, q.z, q.p, q.beta);
    let (x, s) = (&q.x, &q.s);
    let (ex, ew) = (q.ex(), q.ew());
    let vy = q.vy();
    let zl = q.zl();
    let pv = q.pvec();
    let mut t = OperatorTable::new(q.d);

    // R(X, Y_i)
    for i in 0..m {
        let y = b.y(i);
        t.set(b.x(), y, b.x(), &((&ex * -x[i] + q.ey(i) * p) / (4.0 * z)));
        for j in 0..m {
            let val = (q.ey(i) * x[j] - &ex * (delta(i, j) * s[i])) / (4.0 * z);
            t.set(b.x(), y, b.y(j), &val);
            t.set(b.x(), y, b.z(j), &(&ew * (delta(i, j) / 4.0)));
        }
        t.set(b.x(), y, b.w(), &(q.ez(i) * (-be / (4.0 * s[i]))));
    }

    // R(X, Z_i)
    for i in 0..m {
        let zi = b.z(i);
        let zxw = q.ez(i) + &ew * (x[i] / s[i]);
        t.set(b.x(), zi, b.x(), &(&zxw * (p / (4.0 * z))));
        for j in 0..m {
            let val = &zxw * (x[j] / (4.0 * z)) - &ew * (delta(i, j) / 4.0);
            t.set(b.x(), zi, b.y(j), &val);
            t.set(b.x(), zi, b.z(j), &(&ex * (-s[i] * delta(i, j) / (4.0 * z))));
        }
        let val = (&ex * (-2.0 * x[i]) + &vy * x[i] + q.ey(i) * z) * (be / (4.0 * z * s[i]));
        t.set(b.x(), zi, b.w(), &val);
    }

    // R(X, W)
    t.set(b.x(), b.w(), b.x(), &(&zl * (p * be / (4.0 * z)) + &ew * ((z + p) / (2.0 * z))));
    for i in 0..m {
        let val = &zl * (x[i] * be / (4.0 * z)) - q.ez(i) * (be / (2.0 * s[i])) + &ew * (x[i] / (2.0 * z));
        t.set(b.x(), b.w(), b.y(i), &val);
        let val = (&ex * (-3.0 * x[i]) + &vy * (2.0 * x[i]) + q.ey(i) * (2.0 * z)) * (be / (4.0 * z * s[i]));
        t.set(b.x(), b.w(), b.z(i), &val);
    }
    t.set(b.x(), b.w(), b.w(), &((-&ex + &vy * 0.5) * (be / z)));

    // R(Y_i, Y_j), R(Y_i, Z_j)
    for i in 0..m {
        for j in 0..m {
            let (yi, yj, zj) = (b.y(i), b.y(j), b.z(j));
            if i != j {
                t.set(yi, yj, b.x(), &((q.ey(j) * x[i] - q.ey(i) * x[j]) / (4.0 * z)));
                for k in 0..m {
                    let val = (q.ey(j) * (delta(i, k) * s[i]) - q.ey(i) * (delta(j, k) * s[j])) / (4.0 * z);
                    t.set(yi, yj, b.y(k), &val);
                    let val = (q.ez(j) * (delta(i, k) / s[j]) - q.ez(i) * (delta(j, k) / s[i])) * (be / 4.0);
                    t.set(yi, yj, b.z(k), &val);
                }
                // R(Y_i, Y_j) W = 0
            }

            let val = (q.ez(j) * x[i] + &ew * (x[i] * x[j] / s[j] - 2.0 * delta(i, j) * z)) / (4.0 * z);
            t.set(yi, zj, b.x(), &val);
            for k in 0..m {
                let val = (q.ez(i) * (delta(j, k) * be / s[i])
                    + q.ez(j) * (delta(i, k) * s[i] / z)
                    + q.ez(k) * (2.0 * delta(i, j) * be / s[k])
                    + &ew * (delta(i, k) * x[j] * s[i] / (z * s[j])))
                    * 0.25;
                t.set(yi, zj, b.y(k), &val);
                let val = ((&ex * x[k] - q.ey(k) * z - &vy * x[k]) * (2.0 * delta(i, j) * be / s[k])
                    + (&ex * x[j] - q.ey(j) * z - &vy * x[j]) * (delta(i, k) * be / s[j])
                    - q.ey(i) * (delta(j, k) * s[j]))
                    / (4.0 * z);
                t.set(yi, zj, b.z(k), &val);
            }
            let val = (q.ey(i) * (-x[j] / s[j]) + &pv * (2.0 * delta(i, j))) * (be / (4.0 * z));
            t.set(yi, zj, b.w(), &val);
        }
    }

    // R(Y_i, W)
    for i in 0..m {
        let yi = b.y(i);
        let val = (&zl * (be * x[i]) - q.ez(i) * (be * z / s[i]) + &ew * (2.0 * x[i])) / (4.0 * z);
        t.set(yi, b.w(), b.x(), &val);
        for j in 0..m {
            let val = (&zl * s[i] + &ew * (2.0 * s[i] / be - z / s[i])) * (be * delta(i, j) / (4.0 * z));
            t.set(yi, b.w(), b.y(j), &val);
            let val = (&pv * delta(i, j) - q.ey(i) * (x[j] / s[j])) * (be / (4.0 * z));
            t.set(yi, b.w(), b.z(j), &val);
        }
        let val = (&ex * -x[i] + &vy * x[i] + q.ey(i) * (z - 2.0 * s[i] * s[i] / be))
            * (be * be / (4.0 * z * s[i] * s[i]));
        t.set(yi, b.w(), b.w(), &val);
    }

    // R(Z_i, Z_j)
    let tilt = |l: usize| &ex * -x[l] + &vy * x[l] + q.ey(l) * z;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let (zi, zj) = (b.z(i), b.z(j));
            // R(Z_i, Z_j) X = 0
            for k in 0..m {
                let val = (tilt(j) * (delta(i, k) / s[j]) - tilt(i) * (delta(j, k) / s[i])) * (be / (4.0 * z));
                t.set(zi, zj, b.y(k), &val);
                let val = ((q.ez(j) + &ew * (x[j] / s[j])) * (delta(i, k) * s[i])
                    - (q.ez(i) + &ew * (x[i] / s[i])) * (delta(j, k) * s[j]))
                    / (4.0 * z);
                t.set(zi, zj, b.z(k), &val);
            }
            let val = (q.ez(j) * (x[i] / s[i]) - q.ez(i) * (x[j] / s[j])) * (be / (4.0 * z));
            t.set(zi, zj, b.w(), &val);
        }
    }

    // R(Z_i, W)
    for i in 0..m {
        let zi = b.z(i);
        t.set(zi, b.w(), b.x(), &(tilt(i) * (be / (4.0 * z * s[i]))));
        for j in 0..m {
            t.set(zi, b.w(), b.y(j), &((-&ex + &vy) * (be * delta(i, j) / (4.0 * z))));
            let val = (q.ez(i) * (-x[j] / s[j])
                + &zl * (delta(i, j) * s[i])
                + &ew * (delta(i, j) * (2.0 * s[i] / be - z / s[j]) - x[i] * x[j] / (s[i] * s[j])))
                * (be / (4.0 * z));
            t.set(zi, b.w(), b.z(j), &val);
        }
        let val = (q.ez(i) * (z / (s[i] * s[i]) - 2.0 / be) + &zl * (x[i] / s[i])) * (be * be / (4.0 * z));
        t.set(zi, b.w(), b.w(), &val);
    }

    let ricci = ricci_closed_form(c)?;
    let scalar = scalar_closed_form(c)?;
    Ok(CurvatureData::new(c.expand().into_matrix(), t.ops, ricci, scalar))
}

/// Ricci form of a canonical metric:
///
/// ```text
///            1   | np+z   n xᵀ            0                  0                 |
/// Ric = − ───── | n x    nσ+βzσ⁻¹        0                  0                 |
///          2z   | 0      0               nσ+βzσ⁻¹+βvvᵀ      (2n+1)(β/2)v      |
///               | 0      0               (2n+1)(β/2)vᵀ      2nβ − β²Σ(x_k²/σ_k+z)/σ_k² |
/// ```
pub fn ricci_closed_form(c: &CanonicalMetric) -> Result<DMatrix<f64>> {
    let q = Params::new(c)?;
    let b = q.b;
    let n = b.n() as f64;
    let (z, be) = (q.z, q.beta);
    let mut a = DMatrix::zeros(q.d, q.d);
    a[(b.x(), b.x())] = n * q.p + z;
    for i in 0..q.m {
        let diag = n * q.s[i] + be * z / q.s[i];
        a[(b.x(), b.y(i))] = n * q.x[i];
        a[(b.y(i), b.x())] = n * q.x[i];
        a[(b.y(i), b.y(i))] = diag;
        for j in 0..q.m {
            a[(b.z(i), b.z(j))] = be * q.v[i] * q.v[j];
        }
        a[(b.z(i), b.z(i))] += diag;
        let zw = (2.0 * n + 1.0) * be / 2.0 * q.v[i];
        a[(b.z(i), b.w())] = zw;
        a[(b.w(), b.z(i))] = zw;
    }
    let tail: f64 = (0..q.m)
        .map(|k| (q.x[k] * q.x[k] / q.s[k] + z) / (q.s[k] * q.s[k]))
        .sum();
    a[(b.w(), b.w())] = 2.0 * n * be - be * be * tail;
    Ok(a / (-2.0 * z))
}

/// `τ = −(1/2z)[2n² + n + 1 + β Σ (z + x_i²/σ_i)/σ_i²]`.
pub fn scalar_closed_form(c: &CanonicalMetric) -> Result<f64> {
    let q = Params::new(c)?;
    let n = q.b.n() as f64;
    let tail: f64 = (0..q.m)
        .map(|i| (q.z + q.x[i] * q.x[i] / q.s[i]) / (q.s[i] * q.s[i]))
        .sum();
    Ok(-(2.0 * n * n + n + 1.0 + q.beta * tail) / (2.0 * q.z))
}

/// Least-squares fit `c_E = ⟨Ric, S⟩ / ⟨S, S⟩` and the relative residual
/// `‖Ric − c_E S‖ / ‖Ric‖` (Frobenius).
pub fn einstein_constant_fit(c: &CanonicalMetric) -> Result<(f64, f64)> {
    let ric = ricci_closed_form(c)?;
    let s = c.expand().into_matrix();
    let ce = ric.dot(&s) / s.dot(&s);
    let residual = (&ric - &s * ce).norm() / ric.norm();
    Ok((ce, residual))
}

/// `Some(c_E)` when `Ric = c_E S` to relative tolerance `tol`.
pub fn is_einstein(c: &CanonicalMetric, tol: f64) -> Option<f64> {
    let (ce, residual) = einstein_constant_fit(c).ok()?;
    (residual <= tol).then_some(ce)
}
