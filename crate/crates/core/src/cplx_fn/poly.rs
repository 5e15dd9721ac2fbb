//! Dense univariate polynomials with complex coefficients, lowest power first.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::roots;
use crate::error::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Builds a polynomial from coefficients `c[0] + c[1] z + ...`.
    /// Trailing exact zeros are dropped.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `c * z^k`
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `lead * prod (z - r)`
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Self {
        roots
            .iter()
            .fold(Self::constant(lead), |acc, &r| &acc * &Self::new(vec![-r, ONE]))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Number of exactly-zero low-order coefficients (the order of the zero at the origin).
    pub fn low_order_zeros(&self) -> usize {
        self.coeffs.iter().take_while(|c| **c == ZERO).count()
    }

    /// Divides by `z^k`; the dropped coefficients must be zero.
    pub fn shift_down(&self, k: usize) -> Self {
        debug_assert!(self.coeffs.iter().take(k).all(|c| *c == ZERO));
        Self::new(self.coeffs.iter().skip(k).copied().collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Reversed, conjugated coefficient list: `z^d conj(p(1/conj z))` for `d = deg p`.
    pub fn reflected(&self) -> Self {
        Self::new(self.coeffs.iter().rev().map(|c| c.conj()).collect())
    }

    /// Coefficients `q` with `p(center + w) = sum q_k w^k`, first `len` terms.
    pub fn taylor_at(&self, center: Complex64, len: usize) -> Vec<Complex64> {
        // repeated synthetic division by (z - center)
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            if work.is_empty() {
                out.push(ZERO);
                continue;
            }
            let mut carry = ZERO;
            for c in work.iter_mut().rev() {
                let next = *c + carry * center;
                *c = carry;
                carry = next;
            }
            out.push(carry);
            // quotient now occupies work[..d]; the top slot is zero
            work.pop();
        }
        out
    }

    /// All roots with multiplicity, ordered by modulus then argument.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        roots::polynomial_roots(&self.coeffs)
    }

    /// Largest coefficient modulus.
    pub fn scale_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Product of two power series truncated to `len` terms.
pub fn series_mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Series of `(base + w)^exponent` about `w = 0`, `base != 0`.
pub fn binomial_series(base: Complex64, exponent: i64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let lead = base.powi(exponent as i32);
    let mut term = lead;
    for k in 0..len {
        out.push(term);
        // C(e, k+1) / C(e, k) = (e - k) / (k + 1)
        term = term * ((exponent - k as i64) as f64 / (k + 1) as f64) / base;
    }
    out
}
