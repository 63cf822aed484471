use nalgebra::{DMatrix, DVector};

use super::{ConnectionTable, CurvatureData};
use crate::error::{check_len, GeoError, Result};
use crate::liealg::{StructureConstants, Tensor3};
use crate::sympl::check_spd;

const SPD_TOL: f64 = 1e-12;

/// Levi-Civita connection of a left-invariant metric from the Koszul formula
/// `2 g(∇_{e_i} e_j, e_k) = g([e_i,e_j],e_k) − g([e_j,e_k],e_i) + g([e_k,e_i],e_j)`.
pub fn koszul_connection(structure: &StructureConstants, s: &DMatrix<f64>) -> Result<ConnectionTable> {
    let d = structure.dim();
    check_len(d, s.nrows())?;
    check_spd(s, SPD_TOL)?;
    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| GeoError::Conditioning("Cholesky factorisation failed".into()))?;

    // lowered[i][j][k] = g([e_i, e_j], e_k)
    let mut lowered = Tensor3::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let b = structure.basis_bracket(i, j);
            let g = s.transpose() * b;
            lowered.set_fibre(i, j, &g);
        }
    }

    let mut gamma = Tensor3::zeros(d);
    let mut rhs = DMatrix::zeros(d, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                rhs[(k, i * d + j)] =
                    0.5 * (lowered.get(i, j, k) - lowered.get(j, k, i) + lowered.get(k, i, j));
            }
        }
    }
    let sol = chol.solve(&rhs);
    for i in 0..d {
        for j in 0..d {
            let col: DVector<f64> = sol.column(i * d + j).into_owned();
            gamma.set_fibre(i, j, &col);
        }
    }
    Ok(ConnectionTable { gamma })
}

/// `R(e_i, e_j) = Γ_i Γ_j − Γ_j Γ_i − Σ_l c_ijl Γ_l`, Ricci by the trace
/// definition and `τ = tr(S⁻¹ Ric)`.
pub fn curvature_from_connection(
    structure: &StructureConstants,
    conn: &ConnectionTable,
    s: &DMatrix<f64>,
) -> Result<CurvatureData> {
    let d = structure.dim();
    check_len(d, conn.dim())?;
    check_len(d, s.nrows())?;
    let mats: Vec<DMatrix<f64>> = (0..d).map(|i| conn.covariant_matrix(i)).collect();
    let mut operators = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut r = &mats[i] * &mats[j] - &mats[j] * &mats[i];
            for (l, c) in structure.tensor().fibre(i, j).iter().enumerate() {
                if *c != 0.0 {
                    r -= &mats[l] * *c;
                }
            }
            operators.push(r);
        }
    }
    CurvatureData::from_operators(s.clone(), operators)
}

/// Full curvature from structure constants and an arbitrary positive-definite metric.
pub fn curvature_oracle(structure: &StructureConstants, s: &DMatrix<f64>) -> Result<CurvatureData> {
    let conn = koszul_connection(structure, s)?;
    curvature_from_connection(structure, &conn, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::random_canonical;
    use crate::liealg::{build_chn, heisenberg, Basis};
    use approx::assert_relative_eq;

    #[test]
    fn einstein_connection_entries() {
        let alg = build_chn(2).unwrap();
        let b = Basis::new(2).unwrap();
        let s = DMatrix::identity(4, 4);
        let conn = koszul_connection(alg.structure(), &s).unwrap();
        assert!(conn.gamma.fibre_vector(b.x(), b.x()).amax() < 1e-15);
        let yz = conn.gamma.fibre_vector(b.y(0), b.z(0));
        assert_relative_eq!(yz[b.w()], -0.5, epsilon = 1e-15);
        let wx = conn.gamma.fibre_vector(b.w(), b.x());
        assert_relative_eq!(wx[b.w()], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn einstein_ricci_and_scalar() {
        let alg = build_chn(2).unwrap();
        let data = curvature_oracle(alg.structure(), &DMatrix::identity(4, 4)).unwrap();
        assert_relative_eq!(data.ricci, DMatrix::identity(4, 4) * -1.5, epsilon = 1e-14);
        assert_relative_eq!(data.scalar, -6.0, epsilon = 1e-13);
    }

    #[test]
    fn connection_is_torsion_free_and_metric() {
        for n in 2..=5 {
            let alg = build_chn(n).unwrap();
            for seed in 0..10 {
                let s = random_canonical(n, seed).unwrap().expand().into_matrix();
                let conn = koszul_connection(alg.structure(), &s).unwrap();
                assert!(conn.torsion_defect(alg.structure()) < 1e-12);
                assert!(conn.metric_defect(&s) < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_satisfies_curvature_symmetries() {
        for n in 2..=4 {
            let alg = build_chn(n).unwrap();
            for seed in 0..5 {
                let s = random_canonical(n, seed).unwrap().expand().into_matrix();
                let data = curvature_oracle(alg.structure(), &s).unwrap();
                assert!(data.symmetry_defect() < 1e-12, "n={n} seed={seed}");
                assert!(data.ricci_symmetry_defect() < 1e-12);
                let dual = data.ricci_via_dual_basis().unwrap();
                assert!(super::super::relative_matrix_diff(&dual, &data.ricci) < 1e-12);
            }
        }
    }

    #[test]
    fn three_dimensional_heisenberg() {
        // Milnor's frame: Ric = diag(-½, -½, ½) for the unit metric.
        let h = heisenberg(2).unwrap();
        let data = curvature_oracle(&h, &DMatrix::identity(3, 3)).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::dvector![-0.5, -0.5, 0.5]);
        assert_relative_eq!(data.ricci, want, epsilon = 1e-15);
    }

    #[test]
    fn rejects_indefinite_metric() {
        let alg = build_chn(2).unwrap();
        let s = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, -1.0, 1.0]);
        assert!(koszul_connection(alg.structure(), &s).is_err());
    }
}
