//! Polynomial roots via companion-matrix eigenvalues with one Newton polish.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots of `c[0] + c[1] z + ... + c[d] z^d` with multiplicity,
/// ordered by modulus then argument.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs
        .iter()
        .rposition(|c| *c != Complex64::new(0.0, 0.0))
        .ok_or(Error::DegreeZero)?;
    if degree == 0 {
        return Err(Error::DegreeZero);
    }
    let coeffs = &coeffs[..=degree];
    let lead = coeffs[degree];

    let mut roots = if degree == 1 {
        vec![-coeffs[0] / lead]
    } else {
        let mut companion = DMatrix::<Complex64>::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -coeffs[i] / lead;
        }
        companion
            .eigenvalues()
            .ok_or_else(|| Error::InvalidMap("companion eigenvalue iteration failed".into()))?
            .iter()
            .copied()
            .collect()
    };

    for r in roots.iter_mut() {
        *r = newton_polish(coeffs, *r);
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn newton_polish(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let (p, dp) = eval_with_derivative(coeffs, z);
    if dp.norm() == 0.0 {
        return z;
    }
    let candidate = z - p / dp;
    // keep the step only if it does not increase the residual
    let (q, _) = eval_with_derivative(coeffs, candidate);
    if q.norm() <= p.norm() && candidate.is_finite() {
        candidate
    } else {
        z
    }
}

fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn root_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm().total_cmp(&b.norm()).then_with(|| a.arg().total_cmp(&b.arg()))
}

pub fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(root_order);
}

/// Reorders `current` so that entry `j` is the root nearest `previous[j]`
/// (greedy, in order of `previous`). Used to keep root branches continuous
/// along a trajectory. Extra roots are appended in modulus order.
pub fn match_roots(previous: &[Complex64], current: Vec<Complex64>) -> Vec<Complex64> {
    let mut pool = current;
    let mut out = Vec::with_capacity(pool.len());
    for p in previous {
        if pool.is_empty() {
            break;
        }
        let (idx, _) = pool
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (**a - p).norm().total_cmp(&(**b - p).norm()))
            .expect("pool is non-empty");
        out.push(pool.swap_remove(idx));
    }
    sort_roots(&mut pool);
    out.extend(pool);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_derivative_zeros_of_example_map() {
        // z^2 - 2bz + ab, a = 0.4, b = 2
        let (a, b) = (0.4, 2.0);
        let roots = polynomial_roots(&[c(a * b, 0.0), c(-2.0 * b, 0.0), c(1.0, 0.0)]).unwrap();
        let s = (1.0 - a / b).sqrt();
        assert!((roots[0] - c(b * (1.0 - s), 0.0)).norm() < 1e-14);
        assert!((roots[1] - c(b * (1.0 + s), 0.0)).norm() < 1e-14);
        assert!((roots[0].re - 0.211_145_618).abs() < 1e-8);
        assert!((roots[1].re - 3.788_854_382).abs() < 1e-8);
    }

    #[test]
    fn linear_roots() {
        assert_eq!(
            polynomial_roots(&[c(-0.5, 0.0), c(1.0, 0.0)]).unwrap(),
            vec![c(0.5, 0.0)]
        );
        let r = polynomial_roots(&[c(1.0, 0.0), c(0.6, 0.0)]).unwrap();
        assert!((r[0] - c(-1.0 / 0.6, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degree_zero_rejected() {
        assert_eq!(polynomial_roots(&[c(3.0, 0.0)]), Err(Error::DegreeZero));
        assert_eq!(polynomial_roots(&[]), Err(Error::DegreeZero));
        assert_eq!(polynomial_roots(&[c(3.0, 0.0), c(0.0, 0.0)]), Err(Error::DegreeZero));
    }

    #[test]
    fn ordering_is_modulus_then_argument() {
        let roots = polynomial_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        // fourth roots of unity: equal modulus, sorted by arg in (-pi, pi]
        let args: Vec<f64> = roots.iter().map(|r| r.arg()).collect();
        assert!(args.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn continuation_matching() {
        let prev = [c(0.9, 0.0), c(0.1, 0.0)];
        let now = vec![c(0.11, 0.0), c(0.91, 0.0)];
        assert_eq!(match_roots(&prev, now), vec![c(0.91, 0.0), c(0.11, 0.0)]);
    }
}
