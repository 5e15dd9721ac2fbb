//! Closed-form rational functions `z^shift * num(z) / prod (z - p)^m`.
//!
//! Every map class in the crate, together with its derivatives and its
//! holomorphic reflection `f*(z) = conj(f(1/conj z))`, is represented
//! exactly in this form. Poles are kept factored, so residues can be taken
//! by exact Laurent expansion instead of root-finding on a denominator.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::poly::{binomial_series, series_mul, Poly};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative distance below which two pole locations are the same point.
const POLE_MERGE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub at: Complex64,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    shift: i32,
    num: Poly,
    poles: Vec<Pole>,
}

/// Laurent coefficients for exponents `min_exp ..= max_exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSlice {
    pub min_exp: i32,
    pub coeffs: Vec<Complex64>,
}

impl LaurentSlice {
    pub fn max_exp(&self) -> i32 {
        self.min_exp + self.coeffs.len() as i32 - 1
    }

    /// Coefficient of `z^exp`; zero outside the stored window.
    pub fn get(&self, exp: i32) -> Complex64 {
        if exp < self.min_exp || exp > self.max_exp() {
            return ZERO;
        }
        self.coeffs[(exp - self.min_exp) as usize]
    }
}

fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= POLE_MERGE * a.norm().max(b.norm()).max(1.0)
}

impl RationalFn {
    pub fn new(shift: i32, num: Poly, poles: Vec<Pole>) -> Self {
        let mut out = Self {
            shift,
            num,
            poles: Vec::new(),
        };
        for p in poles {
            out.push_pole(p);
        }
        out.canonicalize();
        out
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::new(0, p, Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn push_pole(&mut self, p: Pole) {
        if p.order == 0 {
            return;
        }
        if p.at == ZERO {
            self.shift -= p.order as i32;
            return;
        }
        match self.poles.iter_mut().find(|q| same_point(q.at, p.at)) {
            Some(q) => q.order += p.order,
            None => self.poles.push(p),
        }
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.shift = 0;
            self.poles.clear();
            return;
        }
        let z = self.num.low_order_zeros();
        if z > 0 {
            self.num = self.num.shift_down(z);
            self.shift += z as i32;
        }
    }

    /// Singular points with their pole order; the origin appears when `shift < 0`.
    pub fn singularities(&self) -> Vec<Pole> {
        let mut out = Vec::with_capacity(self.poles.len() + 1);
        if self.shift < 0 && !self.num.is_zero() {
            out.push(Pole {
                at: ZERO,
                order: (-self.shift) as u32,
            });
        }
        out.extend(self.poles.iter().copied());
        out
    }

    /// Value at `z` without any proximity check.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let mut v = self.num.eval(z) * z.powi(self.shift);
        for p in &self.poles {
            v /= (z - p.at).powi(p.order as i32);
        }
        v
    }

    /// Value at `z`, refusing points within `tol` of a singularity.
    pub fn eval(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        for s in self.singularities() {
            let distance = (z - s.at).norm();
            if distance < tol {
                return Err(Error::PoleProximity {
                    z,
                    pole: s.at,
                    distance,
                });
            }
        }
        Ok(self.eval_unchecked(z))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.shift, self.num.scale(s), self.poles.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut poles = self.poles.clone();
        poles.extend(other.poles.iter().copied());
        Self::new(self.shift + other.shift, &self.num * &other.num, poles)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(ONE), |acc, _| acc.mul(self))
    }

    /// Exact derivative.
    ///
    /// For `f = z^s N / prod (z - p_i)^{m_i}`:
    /// `f' = z^{s-1} [ (sN + zN') prod (z - p_i) - zN sum_i m_i prod_{l != i} (z - p_l) ]
    ///       / prod (z - p_i)^{m_i + 1}`.
    pub fn derivative(&self) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        let z = Poly::monomial(1, ONE);
        let linear: Vec<Poly> = self.poles.iter().map(|p| Poly::new(vec![-p.at, ONE])).collect();
        let all = linear.iter().fold(Poly::one(), |acc, l| &acc * l);

        let head = &self.num.scale(Complex64::from(self.shift as f64)) + &(&z * &self.num.derivative());
        let mut bracket = &head * &all;
        let z_num = &z * &self.num;
        for (i, p) in self.poles.iter().enumerate() {
            let others = linear
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .fold(Poly::one(), |acc, (_, q)| &acc * q);
            let term = (&z_num * &others).scale(Complex64::from(p.order as f64));
            bracket = &bracket - &term;
        }
        let poles = self
            .poles
            .iter()
            .map(|p| Pole {
                at: p.at,
                order: p.order + 1,
            })
            .collect();
        Self::new(self.shift - 1, bracket, poles)
    }

    /// Holomorphic reflection in the unit circle, `conj(f(1/conj z))`.
    pub fn reflect(&self) -> Self {
        let d = self.num.degree().unwrap_or(0) as i32;
        let mut num = self.num.reflected();
        let mut shift = -self.shift - d;
        let mut poles = Vec::with_capacity(self.poles.len());
        for p in &self.poles {
            // (1/z - conj p)^{-m} = z^m (-conj p)^{-m} (z - 1/conj p)^{-m}
            let m = p.order as i32;
            shift += m;
            num = num.scale((-p.at.conj()).powi(-m));
            poles.push(Pole {
                at: ONE / p.at.conj(),
                order: p.order,
            });
        }
        Self::new(shift, num, poles)
    }

    /// Laurent expansion about `center`: returns `(e, g)` with
    /// `f(center + w) = w^e * sum_k g[k] w^k`, `g` truncated to `len` terms.
    /// `e` is minus the pole order at `center` (or `shift` at the origin).
    pub fn laurent_at(&self, center: Complex64, len: usize) -> (i32, Vec<Complex64>) {
        let at_origin = center == ZERO;
        let mut exponent = 0;
        let mut series = self.num.taylor_at(center, len);

        if at_origin {
            exponent = self.shift;
        } else if self.shift != 0 {
            series = series_mul(&series, &binomial_series(center, self.shift as i64, len), len);
        }
        for p in &self.poles {
            if !at_origin && same_point(p.at, center) {
                exponent -= p.order as i32;
            } else {
                let factor = binomial_series(center - p.at, -(p.order as i64), len);
                series = series_mul(&series, &factor, len);
            }
        }
        (exponent, series)
    }

    /// Residue of `f dz` at `p` by exact Laurent expansion.
    pub fn residue_at(&self, p: Complex64) -> Complex64 {
        let (e, _) = self.laurent_at(p, 0);
        let idx = -1 - e;
        if idx < 0 {
            return ZERO;
        }
        let (_, g) = self.laurent_at(p, idx as usize + 1);
        g[idx as usize]
    }

    /// Residue of `f dz` at `p` by trapezoidal quadrature on a circle whose
    /// radius is half the distance to the nearest other singularity.
    pub fn residue_contour(&self, p: Complex64, nodes: usize) -> Result<Complex64> {
        let nearest = self
            .singularities()
            .iter()
            .filter(|s| !same_point(s.at, p))
            .map(|s| (s.at - p).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if nearest.is_finite() { 0.5 * nearest } else { 0.5 };
        if radius < 1e-12 {
            return Err(Error::ContourCollision { center: p, radius });
        }
        Ok(contour_residue(|z| self.eval_unchecked(z), p, radius, nodes))
    }

    /// Laurent coefficients at the origin for exponents `min_exp ..= max_exp`.
    pub fn laurent_at_zero(&self, min_exp: i32, max_exp: i32) -> LaurentSlice {
        let count = (max_exp - min_exp + 1).max(0) as usize;
        let (e, g) = self.laurent_at(ZERO, (max_exp - self.shift + 1).max(0) as usize);
        let coeffs = (min_exp..=max_exp)
            .map(|k| {
                let idx = k - e;
                if idx < 0 {
                    ZERO
                } else {
                    g.get(idx as usize).copied().unwrap_or(ZERO)
                }
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(coeffs.len(), count);
        LaurentSlice { min_exp, coeffs }
    }
}

/// `(1/2 pi i) \oint f dz` over `|z - center| = radius` by the trapezoidal rule.
pub fn contour_residue<F>(f: F, center: Complex64, radius: f64, nodes: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let sum: Complex64 = (0..nodes)
        .map(|k| {
            let u = Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
            f(center + u) * u
        })
        .sum();
    sum / nodes as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inv_z(power: i32) -> RationalFn {
        RationalFn::new(-power, Poly::one(), Vec::new())
    }

    #[test]
    fn simple_residues() {
        assert_eq!(inv_z(1).residue_at(ZERO), ONE);
        assert_eq!(inv_z(2).residue_at(ZERO), ZERO);
        let contour = inv_z(1).residue_contour(ZERO, 256).unwrap();
        assert!((contour - ONE).norm() < 1e-14);
    }

    #[test]
    fn higher_order_pole_residue() {
        // z^2 / (z - 0.5)^3 has residue 1 at 0.5 (second derivative of z^2, over 2!)
        let f = RationalFn::new(
            0,
            Poly::monomial(2, ONE),
            vec![Pole {
                at: c(0.5, 0.0),
                order: 3,
            }],
        );
        assert!((f.residue_at(c(0.5, 0.0)) - ONE).norm() < 1e-14);
        let q = f.residue_contour(c(0.5, 0.0), 256).unwrap();
        assert!((q - ONE).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = RationalFn::new(
            -1,
            Poly::new(vec![c(1.0, 0.2), c(-0.3, 0.0), c(0.0, 0.5)]),
            vec![
                Pole {
                    at: c(2.0, 1.0),
                    order: 2,
                },
                Pole {
                    at: c(-0.5, 1.5),
                    order: 1,
                },
            ],
        );
        let d = f.derivative();
        let z = c(0.3, -0.4);
        let h = 1e-6;
        let fd = (f.eval_unchecked(z + h) - f.eval_unchecked(z - h)) / (2.0 * h);
        assert!((d.eval_unchecked(z) - fd).norm() < 1e-7 * fd.norm().max(1.0));
    }

    #[test]
    fn reflection_definition_and_involution() {
        let f = RationalFn::new(
            1,
            Poly::new(vec![c(2.0, 0.0), c(-0.4, 0.1)]),
            vec![Pole {
                at: c(1.5, -0.5),
                order: 1,
            }],
        );
        let r = f.reflect();
        for z in [c(0.3, 0.2), c(-0.7, 0.1), c(2.0, -1.0)] {
            let expect = f.eval_unchecked(ONE / z.conj()).conj();
            assert!((r.eval_unchecked(z) - expect).norm() < 1e-13);
        }
        let rr = r.reflect();
        for z in [c(0.3, 0.2), c(-0.7, 0.1)] {
            assert!((rr.eval_unchecked(z) - f.eval_unchecked(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn laurent_window_at_origin() {
        // (1/z + 0.3/z^2)(1 + 0.6 z)
        let fs = RationalFn::new(-2, Poly::new(vec![c(0.3, 0.0), ONE]), Vec::new());
        let fp = RationalFn::from_poly(Poly::new(vec![ONE, c(0.6, 0.0)]));
        let g = fs.mul(&fp);
        let s = g.laurent_at_zero(-3, 1);
        assert!((s.get(-1) - c(1.18, 0.0)).norm() < 1e-15);
        assert!((s.get(-2) - c(0.3, 0.0)).norm() < 1e-15);
        assert_eq!(s.get(-3), ZERO);
        assert!((s.get(0) - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_refuses_pole() {
        let f = inv_z(1);
        assert!(matches!(f.eval(c(1e-14, 0.0), 1e-12), Err(Error::PoleProximity { .. })));
    }
}
