use nalgebra::{DMatrix, DVector};

use super::closed::Params;
use crate::canon::CanonicalMetric;
use crate::error::Result;

/// Matrix of `u ∧ w`, the endomorphism `c ↦ g(w, c) u − g(u, c) w`.
pub fn wedge_operator(s: &DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    u * (s * w).transpose() - w * (s * u).transpose()
}

/// Curvature operators written over the 2-vectors `e_a ∧ e_b`.
///
/// For each ordered pair `(i, j)` the coefficients are kept as an
/// antisymmetric matrix `A` with `R(e_i, e_j) = Σ_{a<b} A[a][b] e_a ∧ e_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeExpansion {
    metric: DMatrix<f64>,
    coefficients: Vec<DMatrix<f64>>,
}

impl WedgeExpansion {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    /// Antisymmetric coefficient matrix of `R(e_i, e_j)`.
    pub fn coefficients(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.coefficients[i * self.dim() + j]
    }

    /// Coefficient of `e_a ∧ e_b` in `R(e_i, e_j)`.
    pub fn coefficient(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.coefficients(i, j)[(a, b)]
    }

    /// Rebuilds `R(e_i, e_j)` from the definition of `e_a ∧ e_b`.
    pub fn reconstruct(&self, i: usize, j: usize) -> DMatrix<f64> {
        let d = self.dim();
        let a = self.coefficients(i, j);
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in r + 1..d {
                if a[(r, c)] != 0.0 {
                    let er = DVector::from_fn(d, |k, _| if k == r { 1.0 } else { 0.0 });
                    let ec = DVector::from_fn(d, |k, _| if k == c { 1.0 } else { 0.0 });
                    out += wedge_operator(&self.metric, &er, &ec) * a[(r, c)];
                }
            }
        }
        out
    }
}

struct Builder {
    d: usize,
    coefficients: Vec<DMatrix<f64>>,
}

/// A sum of terms `coeff · u ∧ w` for one pair.
struct Terms {
    a: DMatrix<f64>,
}

impl Terms {
    fn new(d: usize) -> Self {
        Self {
            a: DMatrix::zeros(d, d),
        }
    }

    fn add(&mut self, coeff: f64, u: &DVector<f64>, w: &DVector<f64>) -> &mut Self {
        if coeff != 0.0 {
            self.a += (u * w.transpose() - w * u.transpose()) * coeff;
        }
        self
    }
}

impl Builder {
    fn terms(&self) -> Terms {
        Terms::new(self.d)
    }

    fn put(&mut self, i: usize, j: usize, t: Terms) {
        let d = self.d;
        self.coefficients[j * d + i] = -&t.a;
        self.coefficients[i * d + j] = t.a;
    }
}

/// The curvature operator of a canonical metric in wedge form.
pub fn curvature_wedge(c: &CanonicalMetric) -> Result<WedgeExpansion> {
    let q = Params::new(c)?;
    let b = q.b;
    let (m, z, be) = (q.m, q.z, q.beta);
    let (x, s) = (&q.x, &q.s);
    let (ex, ew) = (q.ex(), q.ew());
    let vy = q.vy();
    let zl = q.zl();
    let mut w = Builder {
        d: q.d,
        coefficients: vec![DMatrix::zeros(q.d, q.d); q.d * q.d],
    };

    for i in 0..m {
        let mut t = w.terms();
        t.add(-1.0 / (4.0 * z), &ex, &q.ey(i))
            .add(-1.0 / (4.0 * s[i]), &q.ez(i), &ew);
        w.put(b.x(), b.y(i), t);

        let k = 1.0 / (4.0 * z * s[i]);
        let mut t = w.terms();
        t.add(-s[i] * k, &ex, &q.ez(i))
            .add(-2.0 * x[i] * k, &ex, &ew)
            .add(x[i] * k, &vy, &ew)
            .add(z * k, &q.ey(i), &ew);
        w.put(b.x(), b.z(i), t);
    }

    let mut t = w.terms();
    let k = 1.0 / (2.0 * z);
    t.add(-2.0 * k, &ex, &ew).add(k, &vy, &ew);
    for l in 0..m {
        let kl = k * be / (s[l] * s[l]);
        t.add(-1.5 * x[l] * kl, &ex, &q.ez(l))
            .add(x[l] * kl, &vy, &q.ez(l))
            .add(z * kl, &q.ey(l), &q.ez(l));
    }
    w.put(b.x(), b.w(), t);

    for i in 0..m {
        for j in 0..m {
            if i < j {
                let mut t = w.terms();
                t.add(-1.0 / (4.0 * z), &q.ey(i), &q.ey(j))
                    .add(-be / (4.0 * s[i] * s[j]), &q.ez(i), &q.ez(j));
                w.put(b.y(i), b.y(j), t);

                let k = 1.0 / (4.0 * z * s[i] * s[j]);
                let mut t = w.terms();
                t.add(x[i] * s[j] * k, &q.ez(j), &ew)
                    .add(-x[j] * s[i] * k, &q.ez(i), &ew)
                    .add(-s[i] * s[j] * k, &q.ez(i), &q.ez(j))
                    .add(be * x[i] * k, &ex, &q.ey(j))
                    .add(-be * x[j] * k, &ex, &q.ey(i))
                    .add(-be * x[i] * k, &vy, &q.ey(j))
                    .add(be * x[j] * k, &vy, &q.ey(i))
                    .add(-be * z * k, &q.ey(i), &q.ey(j));
                w.put(b.z(i), b.z(j), t);
            }

            let k = 1.0 / (4.0 * z * s[i] * s[j]);
            let mut t = w.terms();
            t.add(-x[j] * s[i] * k, &q.ey(i), &ew)
                .add(-s[i] * s[j] * k, &q.ey(i), &q.ez(j))
                .add(be * x[j] * k, &ex, &q.ez(i))
                .add(-be * x[j] * k, &vy, &q.ez(i))
                .add(-be * z * k, &q.ey(j), &q.ez(i));
            if i == j {
                let kd = 2.0 * s[i] * s[j] * k;
                t.add(kd, &ex, &ew).add(-kd, &vy, &ew);
                for l in 0..m {
                    let kl = kd * be / (s[l] * s[l]);
                    t.add(x[l] * kl, &ex, &q.ez(l))
                        .add(-x[l] * kl, &vy, &q.ez(l))
                        .add(-z * kl, &q.ey(l), &q.ez(l));
                }
            }
            w.put(b.y(i), b.z(j), t);
        }

        let k = be / (4.0 * z * s[i]);
        let mut t = w.terms();
        t.add(-x[i] / s[i] * k, &ex, &ew)
            .add(x[i] / s[i] * k, &vy, &ew)
            .add((z / s[i] - 2.0 * s[i] / be) * k, &q.ey(i), &ew)
            .add(k, &ex, &q.ez(i))
            .add(-k, &vy, &q.ez(i))
            .add(-s[i] * k, &q.ey(i), &zl);
        w.put(b.y(i), b.w(), t);

        let k = be / (4.0 * z);
        let mut t = w.terms();
        t.add(-k / s[i], &ex, &q.ey(i))
            .add(k / s[i], &vy, &q.ey(i))
            .add(k, &zl, &q.ez(i))
            .add((z / (s[i] * s[i]) - 2.0 / be) * k, &q.ez(i), &ew)
            .add(x[i] / s[i] * k, &zl, &ew);
        w.put(b.z(i), b.w(), t);
    }

    Ok(WedgeExpansion {
        metric: c.expand().into_matrix(),
        coefficients: w.coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::random_canonical;
    use crate::curvature::{curvature_closed_form, relative_matrix_diff};
    use approx::assert_relative_eq;

    #[test]
    fn wedge_definition() {
        let c = CanonicalMetric::new(2, 1.5, vec![0.3], vec![], 0.7).unwrap();
        let s = c.expand().into_matrix();
        let b = c.basis();
        let (ex, ey) = (b.unit(b.x()), b.unit(b.y(0)));
        let op = wedge_operator(&s, &ex, &ey);
        // (X ∧ Y)(X) = g(Y, X) X − g(X, X) Y
        assert_relative_eq!(op.column(b.x()).into_owned(), &ex * 0.3 - &ey * 1.5);
    }

    #[test]
    fn lemma_examples() {
        let c = CanonicalMetric::new(3, 1.2, vec![0.3, 0.2], vec![1.7], 0.9).unwrap();
        let b = c.basis();
        let z = c.z();
        let w = curvature_wedge(&c).unwrap();
        let xy = w.coefficients(b.x(), b.y(0));
        assert_relative_eq!(xy[(b.x(), b.y(0))], -1.0 / (4.0 * z), epsilon = 1e-15);
        assert_relative_eq!(xy[(b.z(0), b.w())], -1.0 / (4.0 * 1.7), epsilon = 1e-15);
        let nonzero = xy.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 4);

        let yy = w.coefficients(b.y(0), b.y(1));
        assert_relative_eq!(yy[(b.y(0), b.y(1))], -1.0 / (4.0 * z), epsilon = 1e-15);
        assert_relative_eq!(yy[(b.z(0), b.z(1))], -0.9 / (4.0 * 1.7), epsilon = 1e-15);
    }

    #[test]
    fn reconstruction_matches_closed_form() {
        for n in 2..=5 {
            for seed in 0..20 {
                let c = random_canonical(n, 300 + seed).unwrap();
                let w = curvature_wedge(&c).unwrap();
                let data = curvature_closed_form(&c).unwrap();
                let d = 2 * n;
                for i in 0..d {
                    for j in 0..d {
                        let r = relative_matrix_diff(&w.reconstruct(i, j), data.operator(i, j));
                        assert!(r < 1e-12, "n={n} seed={seed} pair=({i},{j}) diff={r:e}");
                    }
                }
            }
        }
    }
}
