#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stringeq::cplx_fn::PolynomialMap;

/// `a_0 = 1`, `a_1 .. a_n` uniform in the disk of radius `radius`.
pub fn random_map(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> PolynomialMap {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        let r = radius * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        coeffs.push(Complex64::from_polar(r, th));
    }
    PolynomialMap::new(coeffs).expect("a_0 = 1 is a valid leading coefficient")
}

/// 200 maps, 50 of each degree 1..=4, from a fixed seed.
pub fn jacobian_corpus() -> Vec<PolynomialMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    (1..=4)
        .flat_map(|n| (0..50).map(move |_| n))
        .map(|n| random_map(&mut rng, n, 0.3))
        .collect()
}
