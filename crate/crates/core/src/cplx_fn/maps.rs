//! The map classes: polynomials, rationals with reflected poles, and the
//! three-parameter family `c z (z - a) / (z - b)`.
//!
//! All maps satisfy `f(0) = 0` and `f'(0) > 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::rational::{Pole, RationalFn};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative slack for "real and positive" checks on `f'(0)`.
const NORMALIZATION_SLACK: f64 = 1e-12;

fn check_leading(a0: Complex64) -> Result<Complex64> {
    if a0.re > 0.0 && a0.im.abs() <= NORMALIZATION_SLACK * a0.re {
        Ok(Complex64::new(a0.re, 0.0))
    } else {
        Err(Error::NonPositiveLeading(a0))
    }
}

/// `f(z) = sum_{j=0}^{n} a_j z^{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    coeffs: Vec<Complex64>,
}

impl PolynomialMap {
    /// Trailing zero coefficients are dropped so that `a_n != 0`.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        let a0 = *coeffs
            .first()
            .ok_or_else(|| Error::InvalidMap("polynomial map needs a0".into()))?;
        coeffs[0] = check_leading(a0)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `f(z) = r z`.
    pub fn disk(radius: f64) -> Result<Self> {
        Self::from_real(&[radius])
    }

    /// `a_0 .. a_n`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `n`, one less than the polynomial degree.
    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn a0(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `b_j = (j + 1) a_j`, the coefficients of `f'`.
    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &a)| a * (j + 1) as f64)
            .collect()
    }

    pub fn as_poly(&self) -> Poly {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(ZERO);
        c.extend_from_slice(&self.coeffs);
        Poly::new(c)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &a| acc * z + a) * z
    }
}

/// `f(z) = (a_0 z + ... + a_{m+n} z^{m+n+1}) / prod_j (1 - conj(w_j) z)`.
///
/// `pole_reflections` stores the `conj(w_j)`, so the poles sit at `1/conj(w_j)`
/// outside the closed disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalMap {
    numer: Vec<Complex64>,
    pole_reflections: Vec<Complex64>,
}

impl RationalMap {
    pub fn new(numer: Vec<Complex64>, pole_reflections: Vec<Complex64>) -> Result<Self> {
        let mut numer = numer;
        let a0 = *numer
            .first()
            .ok_or_else(|| Error::InvalidMap("rational map needs a0".into()))?;
        numer[0] = check_leading(a0)?;
        for w in &pole_reflections {
            if w.norm() >= 1.0 {
                return Err(Error::InvalidMap(format!(
                    "pole reflection {w} must lie inside the unit disk"
                )));
            }
        }
        Ok(Self {
            numer,
            pole_reflections,
        })
    }

    pub fn numer(&self) -> &[Complex64] {
        &self.numer
    }

    pub fn pole_reflections(&self) -> &[Complex64] {
        &self.pole_reflections
    }

    /// Number of reflected poles `m`.
    pub fn m(&self) -> usize {
        self.pole_reflections.len()
    }

    /// `n` in the numerator degree `m + n + 1`.
    pub fn n(&self) -> usize {
        (self.numer.len() - 1).saturating_sub(self.m())
    }

    /// Largest `|f'(w_j)|` over the stored `w_j`, i.e. how far the map is from
    /// the consistent state in which every reflected pole is cancelled.
    pub fn consistency_residual(&self) -> f64 {
        let d = self.to_rational().derivative();
        self.pole_reflections
            .iter()
            .map(|w| d.eval_unchecked(w.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_rational(&self) -> RationalFn {
        let mut num = vec![ZERO];
        num.extend_from_slice(&self.numer);
        let mut scale = ONE;
        let mut poles = Vec::new();
        for w in &self.pole_reflections {
            if *w == ZERO {
                continue;
            }
            // 1 - w z = -w (z - 1/w)
            scale /= -*w;
            poles.push(Pole { at: ONE / *w, order: 1 });
        }
        RationalFn::new(0, Poly::new(num).scale(scale), poles)
    }
}

/// `f(z) = c z (z - a) / (z - b)` with `0 < |a| < 1 < |b|` and `a c / b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleAbcMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl ExampleAbcMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if !(a.norm() > 0.0 && a.norm() < 1.0) {
            return Err(Error::Parameter(format!("need 0 < |a| < 1, got |a| = {}", a.norm())));
        }
        if b.norm() <= 1.0 {
            return Err(Error::Parameter(format!("need |b| > 1, got |b| = {}", b.norm())));
        }
        if c == ZERO {
            return Err(Error::Parameter("c must be nonzero".into()));
        }
        let fp0 = a * c / b;
        if !(fp0.re > 0.0 && fp0.im.abs() <= NORMALIZATION_SLACK * fp0.norm()) {
            return Err(Error::Parameter(format!("normalization a c / b > 0 violated: {fp0}")));
        }
        Ok(Self { a, b, c })
    }

    /// Chooses `arg c` so that `a c / b > 0`.
    pub fn with_c_magnitude(a: Complex64, b: Complex64, c_magnitude: f64) -> Result<Self> {
        if !(c_magnitude > 0.0) {
            return Err(Error::Parameter(format!("|c| must be positive, got {c_magnitude}")));
        }
        if a == ZERO {
            return Err(Error::Parameter("need 0 < |a| < 1, got a = 0".into()));
        }
        let ratio = a / b;
        let c = Complex64::from_polar(c_magnitude, -ratio.arg());
        Self::new(a, b, c)
    }

    pub fn to_rational(&self) -> RationalFn {
        RationalFn::new(
            1,
            Poly::new(vec![-self.a * self.c, self.c]),
            vec![Pole { at: self.b, order: 1 }],
        )
    }

    /// The reflected quadrature node `1/conj(b)`.
    pub fn node(&self) -> Complex64 {
        ONE / self.b.conj()
    }

    /// `f'(0) = a c / b`.
    pub fn fprime0(&self) -> f64 {
        (self.a * self.c / self.b).re
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticMap {
    Polynomial(PolynomialMap),
    Rational(RationalMap),
    ExampleAbc(ExampleAbcMap),
}

impl From<PolynomialMap> for AnalyticMap {
    fn from(p: PolynomialMap) -> Self {
        Self::Polynomial(p)
    }
}

impl From<RationalMap> for AnalyticMap {
    fn from(r: RationalMap) -> Self {
        Self::Rational(r)
    }
}

impl From<ExampleAbcMap> for AnalyticMap {
    fn from(m: ExampleAbcMap) -> Self {
        Self::ExampleAbc(m)
    }
}

impl AnalyticMap {
    pub fn to_rational(&self) -> RationalFn {
        match self {
            Self::Polynomial(p) => RationalFn::from_poly(p.as_poly()),
            Self::Rational(r) => r.to_rational(),
            Self::ExampleAbc(m) => m.to_rational(),
        }
    }

    /// `f(z)`; `f(0) = 0` exactly for every class.
    pub fn eval(&self, z: Complex64, pole_tol: f64) -> Result<Complex64> {
        if z == ZERO {
            return Ok(ZERO);
        }
        match self {
            Self::Polynomial(p) => Ok(p.eval(z)),
            _ => self.to_rational().eval(z, pole_tol),
        }
    }

    /// `f'` in closed form. For polynomials its coefficients are `(j + 1) a_j`.
    pub fn derivative(&self) -> RationalFn {
        match self {
            Self::Polynomial(p) => RationalFn::from_poly(Poly::new(p.derivative_coeffs())),
            _ => self.to_rational().derivative(),
        }
    }

    /// The holomorphic reflection `f*(z) = conj(f(1/conj z))`.
    pub fn reflect(&self) -> RationalFn {
        self.to_rational().reflect()
    }

    /// `(m, n)`: number of reflected poles and the order of the pole at infinity minus one.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Polynomial(p) => (0, p.n()),
            Self::Rational(r) => (r.m(), r.n()),
            Self::ExampleAbc(_) => (1, 0),
        }
    }

    /// Default number of moments to compute, `max(n, 2m + 2)`.
    pub fn default_moment_count(&self) -> usize {
        let (m, n) = self.shape();
        n.max(2 * m + 2)
    }

    /// `f'(0)`.
    pub fn fprime0(&self) -> f64 {
        match self {
            Self::Polynomial(p) => p.a0(),
            Self::Rational(r) => r.numer()[0].re,
            Self::ExampleAbc(m) => m.fprime0(),
        }
    }

    /// Taylor coefficients of `f` at the origin: entry `k` multiplies `z^{k+1}`,
    /// `len` entries.
    pub fn taylor_coeffs(&self, len: usize) -> Vec<Complex64> {
        match self {
            Self::Polynomial(p) => {
                let mut c = p.coeffs().to_vec();
                c.resize(len, ZERO);
                c
            }
            _ => {
                let (e, g) = self.to_rational().laurent_at(ZERO, len + 1);
                (1..=len as i32)
                    .map(|k| {
                        let idx = k - e;
                        if idx < 0 {
                            ZERO
                        } else {
                            g.get(idx as usize).copied().unwrap_or(ZERO)
                        }
                    })
                    .collect()
            }
        }
    }
}
