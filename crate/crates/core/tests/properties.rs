mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use stringeq::bracket_jacobian::jacobian_identity_check;
use stringeq::cplx_fn::{AnalyticMap, PolynomialMap, RationalMap};
use stringeq::moments::{c_to_moments, moments_to_c, MomentVector};
use stringeq::scenarios::three_way_moments;
use stringeq::Tolerances;

fn complex_in(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// `a_0 = 1` and the remaining coefficients in a disk; univalence is not required.
fn small_polynomial(max_degree: usize, radius: f64) -> impl Strategy<Value = PolynomialMap> {
    prop::collection::vec(complex_in(radius), 1..=max_degree).prop_map(|tail| {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        c.extend(tail);
        PolynomialMap::new(c).unwrap()
    })
}

/// Degree up to 6, `a_0` in `(0, 1]`, other coefficients with real and
/// imaginary parts in `[-1, 1]`.
fn wide_polynomial() -> impl Strategy<Value = PolynomialMap> {
    (
        0.05..=1.0_f64,
        prop::collection::vec((-1.0..=1.0_f64, -1.0..=1.0_f64), 1..=6),
    )
        .prop_map(|(a0, tail)| {
            let mut c = vec![Complex64::new(a0, 0.0)];
            c.extend(tail.into_iter().map(|(re, im)| Complex64::new(re, im)));
            PolynomialMap::new(c).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_coefficients_round_trip(map in small_polynomial(4, 0.3), m0 in 0.1..3.0_f64, tail in prop::collection::vec(complex_in(2.0), 1..6)) {
        let analytic: AnalyticMap = map.into();
        let mut values = vec![Complex64::new(m0, 0.0)];
        values.extend(tail);
        let m = MomentVector::from_complex(&values);
        let c = moments_to_c(&m, &analytic).unwrap();
        let back = c_to_moments(&c, &analytic).unwrap();
        prop_assert!(back.max_gap(&m) < 1e-12, "gap {}", back.max_gap(&m));
    }

    #[test]
    fn reflection_is_an_involution(numer in prop::collection::vec(complex_in(1.0), 1..4), poles in prop::collection::vec(complex_in(0.8), 0..3), z in complex_in(0.9)) {
        let mut numer = numer;
        numer[0] = Complex64::new(1.0 + numer[0].norm(), 0.0);
        let Ok(map) = RationalMap::new(numer, poles) else { return Ok(()) };
        let f = map.to_rational();
        let ff = f.reflect().reflect();
        let z = z + Complex64::new(0.05, 0.0);
        let (a, b) = (f.eval_unchecked(z), ff.eval_unchecked(z));
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0), "{a} vs {b}");
        // on the circle the reflection is the complex conjugate
        let w = Complex64::from_polar(1.0, z.arg());
        let (fw, rw) = (f.eval_unchecked(w), f.reflect().eval_unchecked(w));
        prop_assert!((fw.conj() - rw).norm() <= 1e-10 * fw.norm().max(1.0));
    }

    #[test]
    fn jacobian_identity_up_to_parity(map in small_polynomial(4, 0.3)) {
        let report = jacobian_identity_check(&map).unwrap();
        prop_assert!(report.parity_rel_error < 1e-10, "n = {}: {}", report.n, report.parity_rel_error);
        prop_assert!(report.det_v_rel_error() < 1e-10);
        prop_assert!(report.det_u_parity_rel_error() < 1e-10);
        prop_assert!(report.det_u_sylvester_parity_rel_error() < 1e-10);
        prop_assert!((report.resultant - report.resultant_by_roots).norm() <= 1e-10 * report.resultant.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn three_routes_to_the_moments_agree(map in wide_polynomial()) {
        let analytic: AnalyticMap = map.clone().into();
        let order = analytic.default_moment_count();
        let (richardson, residue, area) = three_way_moments(&analytic, order, &Tolerances::default()).unwrap();
        prop_assert!(richardson.max_gap(&residue) < 1e-10, "exact routes differ by {}", richardson.max_gap(&residue));
        prop_assert!(residue.max_gap(&area) < 1e-6, "area oracle differs by {}", residue.max_gap(&area));
    }
}

#[test]
fn jacobian_corpus_is_reproducible() {
    let a = common::jacobian_corpus();
    let b = common::jacobian_corpus();
    assert_eq!(a.len(), 200);
    assert!(a.iter().zip(&b).all(|(x, y)| x.coeffs() == y.coeffs()));
    assert!(a.iter().all(|m| m.coeffs()[1..].iter().all(|c| c.norm() <= 0.3)));
}
