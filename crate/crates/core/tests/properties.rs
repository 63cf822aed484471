use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use solvgeo::autgrp::{act_on_metric, random_automorphism_with};
use solvgeo::canon::{canonicalize, is_isometric, random_canonical, ISOMETRY_TOL};
use solvgeo::curvature::{
    curvature_closed_form, curvature_oracle, relative_diff, ricci_closed_form, scalar_closed_form,
    sectional_range,
};
use solvgeo::liealg::build_chn;
use solvgeo::soliton::ricci_soliton_fit;
use solvgeo::CanonicalMetric;

prop_compose! {
    fn canonical()(n in 2usize..=5, seed in any::<u64>()) -> CanonicalMetric {
        random_canonical(n, seed).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_an_orbit_invariant(c in canonical(), seed in any::<u64>(), scale in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_automorphism_with(c.n(), &mut rng, scale).unwrap();
        let s = act_on_metric(&f, &c.expand()).unwrap();
        let red = canonicalize(&s).unwrap();
        prop_assert!(red.canonical.max_param_diff(&c).unwrap() < 1e-8);
        prop_assert!(red.residual < 1e-9);
        prop_assert!(is_isometric(&s, &c.expand(), ISOMETRY_TOL).unwrap());
    }

    #[test]
    fn scalar_curvature_is_preserved_by_automorphisms(c in canonical(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_automorphism_with(c.n(), &mut rng, 1.0).unwrap();
        let s = act_on_metric(&f, &c.expand()).unwrap();
        let alg = build_chn(c.n()).unwrap();
        let moved = curvature_oracle(alg.structure(), s.matrix()).unwrap();
        prop_assert!(relative_diff(moved.scalar, scalar_closed_form(&c).unwrap()) < 1e-9);
    }

    #[test]
    fn ricci_is_symmetric_and_scalar_negative(c in canonical()) {
        let ric = ricci_closed_form(&c).unwrap();
        prop_assert!((&ric - ric.transpose()).abs().max() <= 1e-14 * ric.abs().max());
        prop_assert!(scalar_closed_form(&c).unwrap() < 0.0);
    }

    #[test]
    fn jacobi_range_bounds_planes_through_u(c in canonical(), seed in any::<u64>()) {
        let data = curvature_closed_form(&c).unwrap();
        let d = data.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || DVector::from_fn(d, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let (u, w) = (draw(), draw());
        let range = sectional_range(&data, &u).unwrap();
        if let Ok(k) = data.sectional(&u, &w) {
            let slack = 1e-12 * range.min.abs().max(range.max.abs());
            prop_assert!(k >= range.min - slack && k <= range.max + slack);
        }
    }

    #[test]
    fn soliton_fit_residual_vanishes_only_for_einstein(c in canonical()) {
        let cert = ricci_soliton_fit(&c).unwrap();
        prop_assert!(cert.derivation_defect < 1e-9);
        prop_assert_eq!(cert.residual < 1e-9, c.satisfies_einstein_conditions(1e-9));
    }
}

#[test]
fn rescaling_the_metric_rescales_the_scalar_curvature() {
    let c = random_canonical(4, 17).unwrap();
    let alg = build_chn(4).unwrap();
    let s: DMatrix<f64> = c.expand().into_matrix();
    let base = curvature_oracle(alg.structure(), &s).unwrap().scalar;
    let scaled = curvature_oracle(alg.structure(), &(&s * 3.0)).unwrap().scalar;
    assert!(relative_diff(scaled * 3.0, base) < 1e-12);
}
