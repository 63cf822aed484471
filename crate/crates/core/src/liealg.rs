//! Structure constants and the Lie algebra `ch^n = R ⋉ h^n`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, GeoError, Result};

/// Dense rank-3 tensor of side `dim`, indexed `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dim && j < self.dim && k < self.dim);
        (i * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let o = self.offset(i, j, k);
        self.data[o] += value;
    }

    /// The fibre `[i][j][..]` as a slice of length `dim`.
    pub fn fibre(&self, i: usize, j: usize) -> &[f64] {
        let start = self.offset(i, j, 0);
        &self.data[start..start + self.dim]
    }

    pub fn fibre_vector(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_column_slice(self.fibre(i, j))
    }

    pub fn set_fibre(&mut self, i: usize, j: usize, values: &DVector<f64>) {
        let start = self.offset(i, j, 0);
        self.data[start..start + self.dim].copy_from_slice(values.as_slice());
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }
}

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    tensor: Tensor3,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Self {
        Self {
            tensor: Tensor3::zeros(dim),
        }
    }

    /// Wraps an arbitrary tensor without validation; see [`Self::validate_jacobi`].
    pub fn from_tensor(tensor: Tensor3) -> Self {
        Self { tensor }
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.tensor
    }

    pub fn tensor_mut(&mut self) -> &mut Tensor3 {
        &mut self.tensor
    }

    #[inline]
    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensor.get(i, j, k)
    }

    /// Sets `[e_i, e_j] += value·e_k` together with the antisymmetric partner.
    pub fn add_bracket(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.tensor.add(i, j, k, value);
        self.tensor.add(j, i, k, -value);
    }

    /// Bracket of two basis vectors.
    pub fn basis_bracket(&self, i: usize, j: usize) -> DVector<f64> {
        self.tensor.fibre_vector(i, j)
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.dim();
        check_len(d, u.len())?;
        check_len(d, w.len())?;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let coeff = u[i] * w[j];
                if coeff == 0.0 {
                    continue;
                }
                for (k, c) in self.tensor.fibre(i, j).iter().enumerate() {
                    out[k] += coeff * c;
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad u`, i.e. the map `w ↦ [u, w]` (column `j` is `[u, e_j]`).
    pub fn ad(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.dim();
        check_len(d, u.len())?;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                for (k, c) in self.tensor.fibre(i, j).iter().enumerate() {
                    m[(k, j)] += u[i] * c;
                }
            }
        }
        Ok(m)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| (0..d).all(|k| self.constant(i, j, k) == -self.constant(j, i, k)))
        })
    }

    /// Largest absolute component of `[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]`
    /// over all basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for out in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += self.constant(i, j, l) * self.constant(l, k, out)
                                + self.constant(j, k, l) * self.constant(l, i, out)
                                + self.constant(k, i, l) * self.constant(l, j, out);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// True iff the Jacobi sum vanishes exactly for every basis triple.
    pub fn validate_jacobi(&self) -> bool {
        self.jacobi_defect() == 0.0
    }

    /// Dimension of the span of all brackets `[e_i, e_j]`.
    pub fn derived_algebra_rank(&self, tol: f64) -> usize {
        let d = self.dim();
        let mut images = DMatrix::zeros(d, d * d);
        for i in 0..d {
            for j in 0..d {
                images
                    .column_mut(i * d + j)
                    .copy_from_slice(self.tensor.fibre(i, j));
            }
        }
        images.rank(tol)
    }

    /// Dimension of the center `{u : [u, e_j] = 0 for all j}`.
    pub fn center_dim(&self, tol: f64) -> usize {
        let d = self.dim();
        // Row (j, k) of the map u ↦ ([u, e_j])_k.
        let mut map = DMatrix::zeros(d * d, d);
        for i in 0..d {
            for j in 0..d {
                for (k, c) in self.tensor.fibre(i, j).iter().enumerate() {
                    map[(j * d + k, i)] = *c;
                }
            }
        }
        d - map.rank(tol)
    }
}

/// Index map for the frozen basis ordering `(X, Y_1..Y_{n-1}, Z_1..Z_{n-1}, W)`.
///
/// `y(i)` and `z(i)` take zero-based `i`, so `y(0)` is `Y_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    n: usize,
}

impl Basis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeoError::InvalidDimension(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `Y` (equivalently `Z`) vectors, `n - 1`.
    #[inline]
    pub fn m(&self) -> usize {
        self.n - 1
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    #[inline]
    pub fn x(&self) -> usize {
        0
    }

    #[inline]
    pub fn y(&self, i: usize) -> usize {
        debug_assert!(i < self.m());
        1 + i
    }

    #[inline]
    pub fn z(&self, i: usize) -> usize {
        debug_assert!(i < self.m());
        self.n + i
    }

    #[inline]
    pub fn w(&self) -> usize {
        2 * self.n - 1
    }

    pub fn unit(&self, index: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[index] = 1.0;
        v
    }

    pub fn labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.dim());
        labels.push("X".to_string());
        labels.extend((1..self.n).map(|i| format!("Y{i}")));
        labels.extend((1..self.n).map(|i| format!("Z{i}")));
        labels.push("W".to_string());
        labels
    }
}

/// The Lie algebra `ch^n` with its structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraCHn {
    basis: Basis,
    structure: StructureConstants,
}

impl LieAlgebraCHn {
    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn basis_labels(&self) -> Vec<String> {
        self.basis.labels()
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.structure
    }

    pub fn bracket(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.structure.bracket(u, w)
    }

    pub fn validate_jacobi(&self) -> bool {
        self.structure.validate_jacobi()
    }
}

/// Builds `ch^n` for `n >= 2`.
pub fn build_chn(n: usize) -> Result<LieAlgebraCHn> {
    let basis = Basis::new(n)?;
    let mut c = StructureConstants::zeros(basis.dim());
    let (x, w) = (basis.x(), basis.w());
    for i in 0..basis.m() {
        c.add_bracket(x, basis.y(i), basis.y(i), 0.5);
        c.add_bracket(x, basis.z(i), basis.z(i), 0.5);
        c.add_bracket(basis.z(i), basis.y(i), w, 1.0);
    }
    c.add_bracket(x, w, w, 1.0);
    Ok(LieAlgebraCHn {
        basis,
        structure: c,
    })
}

/// The Heisenberg algebra `h^n` of dimension `2n - 1`, basis
/// `(Y_1..Y_{n-1}, Z_1..Z_{n-1}, W)` with `[Z_j, Y_i] = δ_ij W`.
pub fn heisenberg(n: usize) -> Result<StructureConstants> {
    if n < 2 {
        return Err(GeoError::InvalidDimension(n));
    }
    let m = n - 1;
    let w = 2 * m;
    let mut c = StructureConstants::zeros(2 * m + 1);
    for i in 0..m {
        c.add_bracket(m + i, i, w, 1.0);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chn_brackets_match_commutator_table() {
        let alg = build_chn(2).unwrap();
        let b = alg.basis();
        let xw = alg.structure().basis_bracket(b.x(), b.w());
        assert_eq!(xw, b.unit(b.w()));
        let zy = alg.structure().basis_bracket(b.z(0), b.y(0));
        assert_eq!(zy, b.unit(b.w()));
        let xy = alg.bracket(&b.unit(b.x()), &b.unit(b.y(0))).unwrap();
        assert_eq!(xy, b.unit(b.y(0)) * 0.5);

        let alg3 = build_chn(3).unwrap();
        let b3 = alg3.basis();
        let z2y1 = alg3.bracket(&b3.unit(b3.z(1)), &b3.unit(b3.y(0))).unwrap();
        assert!(z2y1.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn bracket_is_bilinear() {
        let alg = build_chn(2).unwrap();
        let b = alg.basis();
        let u = b.unit(b.x()) + b.unit(b.z(0));
        let got = alg.bracket(&u, &b.unit(b.y(0))).unwrap();
        let want = b.unit(b.y(0)) * 0.5 + b.unit(b.w());
        assert_eq!(got, want);
    }

    #[test]
    fn bracket_rejects_wrong_length() {
        let alg = build_chn(2).unwrap();
        let err = alg
            .bracket(&DVector::zeros(3), &DVector::zeros(4))
            .unwrap_err();
        assert_eq!(
            err,
            GeoError::DimensionMismatch {
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn rejects_small_n() {
        assert_eq!(build_chn(1).unwrap_err(), GeoError::InvalidDimension(1));
        assert!(heisenberg(0).is_err());
    }

    #[test]
    fn jacobi_holds_for_chn() {
        for n in 2..=6 {
            let alg = build_chn(n).unwrap();
            assert!(alg.validate_jacobi(), "n = {n}");
            assert!(alg.structure().is_antisymmetric());
        }
    }

    #[test]
    fn broken_antisymmetry_fails_jacobi() {
        let alg = build_chn(2).unwrap();
        let b = alg.basis();
        let mut c = alg.structure().clone();
        c.tensor_mut().set(b.x(), b.y(0), b.y(0), -0.5);
        assert!(!c.is_antisymmetric());
        assert!(!c.validate_jacobi());
    }

    #[test]
    fn center_and_derived_algebra() {
        for n in 2..=6 {
            let alg = build_chn(n).unwrap();
            let b = alg.basis();
            let s = alg.structure();
            // W is central in the derived algebra; only X moves it.
            for i in (0..alg.dim()).filter(|&i| i != b.x()) {
                assert!(s.basis_bracket(i, b.w()).iter().all(|c| *c == 0.0));
            }
            assert_eq!(s.basis_bracket(b.x(), b.w()), b.unit(b.w()));
            assert_eq!(s.center_dim(1e-12), 0);
            assert_eq!(s.derived_algebra_rank(1e-12), 2 * n - 1);
        }
    }

    #[test]
    fn heisenberg_center_is_w() {
        for n in 2..=5 {
            let h = heisenberg(n).unwrap();
            assert!(h.validate_jacobi());
            assert_eq!(h.center_dim(1e-12), 1);
            assert_eq!(h.derived_algebra_rank(1e-12), 1);
        }
    }

    #[test]
    fn labels_follow_frozen_order() {
        let b = Basis::new(3).unwrap();
        assert_eq!(b.labels(), ["X", "Y1", "Y2", "Z1", "Z2", "W"]);
        assert_eq!((b.y(1), b.z(0), b.w()), (2, 3, 5));
    }
}
