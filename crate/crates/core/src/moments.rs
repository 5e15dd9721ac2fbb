//! Harmonic moments `M_k = (1/pi) \int_D f^k |f'|^2 dA`, computed three ways:
//! Richardson's coefficient sum (polynomials only), residues of
//! `f^k f* f'` inside the disk, and a direct area quadrature used as an oracle.
//! Also the coefficients `c_j` of one-point quadrature identities and the
//! triangular correspondence between them and the moments.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cplx_fn::maps::{AnalyticMap, ExampleAbcMap, PolynomialMap};
use crate::cplx_fn::poly::series_mul;
use crate::cplx_fn::rational::RationalFn;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `M_0` (real) and `M_1 .. M_K`. Negative indices are served by [`get`](Self::get)
/// through `M_{-k} = conj(M_k)` and are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub m0: f64,
    pub m: Vec<Complex64>,
}

impl MomentVector {
    /// From `M_0 .. M_K`; the imaginary part of `M_0` is discarded.
    pub fn from_complex(values: &[Complex64]) -> Self {
        Self {
            m0: values.first().map_or(0.0, |v| v.re),
            m: values.iter().skip(1).copied().collect(),
        }
    }

    /// Highest stored index `K`.
    pub fn order(&self) -> usize {
        self.m.len()
    }

    /// `M_k` for `-K <= k <= K`; zero outside.
    pub fn get(&self, k: i32) -> Complex64 {
        match k {
            0 => Complex64::new(self.m0, 0.0),
            k if k > 0 => self.m.get(k as usize - 1).copied().unwrap_or(ZERO),
            k => self.m.get((-k) as usize - 1).map_or(ZERO, |v| v.conj()),
        }
    }

    /// `M_0 .. M_K` as one complex list.
    pub fn to_vec(&self) -> Vec<Complex64> {
        (0..=self.order() as i32).map(|k| self.get(k)).collect()
    }

    /// Largest `|M_k - other_k| / max(1, |other_k|)` over the shared range.
    pub fn max_gap(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order()) as i32;
        (0..=n)
            .map(|k| relative_gap(self.get(k), other.get(k)))
            .fold(0.0, f64::max)
    }
}

/// `|x - y| / max(1, |y|)`.
pub fn relative_gap(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

/// Richardson's sum with the coefficients `x_j` and the conjugates `y_j`
/// treated as independent variables:
/// `R_k(x, y) = sum_{j0} (j0 + 1) x_{j0} sum_s [t^s] X(t)^k y_{j0 + s + k}`,
/// `X(t) = sum_j x_j t^j`. For `k < 0` the roles swap: `R_k(x, y) = R_{-k}(y, x)`.
pub fn richardson_moment(x: &[Complex64], y: &[Complex64], k: i32) -> Complex64 {
    if k < 0 {
        return richardson_moment(y, x, -k);
    }
    let k = k as usize;
    let len = y.len();
    if k >= len {
        return ZERO;
    }
    // only s <= len - 1 - k can meet a nonzero y
    let width = len - k;
    let mut power = vec![ZERO; width];
    power[0] = ONE;
    for _ in 0..k {
        power = series_mul(&power, x, width);
    }
    let mut total = ZERO;
    for (j0, &xj) in x.iter().enumerate() {
        if j0 + k >= len {
            break;
        }
        let inner: Complex64 = power
            .iter()
            .enumerate()
            .take(len - k - j0)
            .map(|(s, &p)| p * y[j0 + s + k])
            .sum();
        total += xj * (j0 + 1) as f64 * inner;
    }
    total
}

/// Moments of a polynomial map by Richardson's formula.
pub fn moments_richardson(map: &PolynomialMap, order: usize) -> MomentVector {
    let a = map.coeffs();
    let abar: Vec<Complex64> = a.iter().map(|c| c.conj()).collect();
    let values: Vec<Complex64> = (0..=order as i32).map(|k| richardson_moment(a, &abar, k)).collect();
    MomentVector::from_complex(&values)
}

/// Richardson's formula applied to the Taylor polynomial of degree `terms`
/// of any map. Exact for polynomials with `n < terms`, a truncation for rationals.
pub fn moments_taylor_richardson(map: &AnalyticMap, order: usize, terms: usize) -> Result<MomentVector> {
    let truncated = PolynomialMap::new(map.taylor_coeffs(terms))?;
    Ok(moments_richardson(&truncated, order))
}

/// Singularities of `h` strictly inside the disk, rejecting any within `tol` of the circle.
fn interior_singularities(h: &RationalFn, tol: f64) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for s in h.singularities() {
        let r = s.at.norm();
        if (r - 1.0).abs() < tol {
            return Err(Error::BoundarySingularity { at: s.at });
        }
        if r < 1.0 {
            out.push(s.at);
        }
    }
    Ok(out)
}

/// Sum of exact residues of `h dz` inside the unit disk.
pub fn interior_residue_sum(h: &RationalFn, tol: &Tolerances) -> Result<Complex64> {
    Ok(interior_singularities(h, tol.boundary_singularity)?
        .into_iter()
        .map(|p| h.residue_at(p))
        .sum())
}

/// Moments as sums of residues of `f^k f* f'` inside the disk.
pub fn moments_residue(map: &AnalyticMap, order: usize, tol: &Tolerances) -> Result<MomentVector> {
    let f = map.to_rational();
    let mut integrand = map.reflect().mul(&map.derivative());
    let mut values = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 {
            integrand = integrand.mul(&f);
        }
        values.push(interior_residue_sum(&integrand, tol)?);
    }
    Ok(MomentVector::from_complex(&values))
}

/// Resolution of the polar area quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaResolution {
    /// Gauss-Legendre nodes in the radius at the coarse level.
    pub radial: usize,
    /// Trapezoid nodes in the angle at the coarse level.
    pub angular: usize,
    /// Largest accepted difference between the coarse and the doubled level.
    pub tolerance: f64,
}

impl Default for AreaResolution {
    fn default() -> Self {
        Self {
            radial: 48,
            angular: 256,
            tolerance: 1e-8,
        }
    }
}

/// Values with the difference between two refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaEstimate {
    pub values: Vec<Complex64>,
    pub error_estimate: f64,
}

fn polar_rule<F>(radial: usize, angular: usize, len: usize, integrand: &F) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &mut [Complex64]),
{
    let rule = GaussLegendre::new(radial)
        .map_err(|e| Error::Parameter(format!("Gauss-Legendre rule of size {radial}: {e}")))?;
    let mut total = vec![ZERO; len];
    let mut point = vec![ZERO; len];
    let dtheta = 2.0 * PI / angular as f64;
    for &(x, w) in rule.as_node_weight_pairs() {
        // map [-1, 1] to r in [0, 1]; dA = r dr dtheta
        let r = 0.5 * (x + 1.0);
        let weight = 0.5 * w * r * dtheta / PI;
        for k in 0..angular {
            let z = Complex64::from_polar(r, k as f64 * dtheta);
            integrand(z, &mut point);
            for (t, p) in total.iter_mut().zip(&point) {
                *t += p * weight;
            }
        }
    }
    Ok(total)
}

/// `(1/pi) \int_D g_i(z) dA` for a vector of integrands written into the
/// output slice, at two resolutions. The finer values are returned.
pub fn area_integrals<F>(len: usize, resolution: &AreaResolution, integrand: F) -> Result<AreaEstimate>
where
    F: Fn(Complex64, &mut [Complex64]),
{
    let coarse = polar_rule(resolution.radial, resolution.angular, len, &integrand)?;
    let fine = polar_rule(2 * resolution.radial, 2 * resolution.angular, len, &integrand)?;
    let error_estimate = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (c - f).norm())
        .fold(0.0, f64::max);
    if !(error_estimate <= resolution.tolerance) {
        return Err(Error::NonConvergent {
            estimate: error_estimate,
            tolerance: resolution.tolerance,
        });
    }
    Ok(AreaEstimate {
        values: fine,
        error_estimate,
    })
}

/// Moments by direct quadrature of `f^k |f'|^2` over the disk.
pub fn moments_area_oracle(
    map: &AnalyticMap,
    order: usize,
    resolution: &AreaResolution,
) -> Result<(MomentVector, f64)> {
    let f = map.to_rational();
    let df = map.derivative();
    let est = area_integrals(order + 1, resolution, |z, out| {
        let w = f.eval_unchecked(z);
        let mut term = Complex64::new(df.eval_unchecked(z).norm_sqr(), 0.0);
        for slot in out.iter_mut() {
            *slot = term;
            term *= w;
        }
    })?;
    Ok((MomentVector::from_complex(&est.values), est.error_estimate))
}

/// Quadrature identities `(1/pi) \int_D g |f'|^2 dA = ...` for analytic `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadratureData {
    /// `sum_j c_j g^(j)(0)`.
    OnePoint { c: Vec<Complex64> },
    /// `A g(0) + B g(node)`, with `image = f(node)`.
    TwoPoint {
        a: Complex64,
        b: Complex64,
        node: Complex64,
        image: Complex64,
    },
}

impl QuadratureData {
    /// Right-hand side for a test function.
    pub fn apply(&self, g: &TestFunction) -> Complex64 {
        match self {
            Self::OnePoint { c } => c.iter().enumerate().map(|(j, &cj)| cj * g.derivative_at_zero(j)).sum(),
            Self::TwoPoint { a, b, node, .. } => a * g.eval(Complex64::new(0.0, 0.0)) + b * g.eval(*node),
        }
    }
}

/// Test functions analytic on the closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum TestFunction {
    /// `z^k`
    Monomial(u32),
    /// `exp(lambda z)`
    Exp(Complex64),
}

impl TestFunction {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            Self::Monomial(k) => z.powu(k),
            Self::Exp(l) => (l * z).exp(),
        }
    }

    /// `g^(j)(0)`.
    pub fn derivative_at_zero(&self, j: usize) -> Complex64 {
        match *self {
            Self::Monomial(k) if k as usize == j => Complex64::new(factorial(j), 0.0),
            Self::Monomial(_) => ZERO,
            Self::Exp(l) => l.powu(j as u32),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Monomial(0) => "1".into(),
            Self::Monomial(1) => "z".into(),
            Self::Monomial(k) => format!("z^{k}"),
            Self::Exp(l) => format!("exp({l} z)"),
        }
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// One-point quadrature coefficients read off the principal part of `f* f'`
/// at the origin: `f* f' = sum_k k! c_k / z^{k+1} + holomorphic`.
///
/// Every pole of `f*` inside the disk away from the origin must be cancelled
/// by a zero of `f'`; otherwise the map carries a second quadrature node.
pub fn quadrature_coeffs(map: &AnalyticMap, tol: &Tolerances) -> Result<QuadratureData> {
    let reflected = map.reflect();
    let df = map.derivative();
    let scale = map.fprime0().max(1.0);
    for p in reflected.poles() {
        if p.at.norm() >= 1.0 {
            continue;
        }
        let residual = df.eval_unchecked(p.at).norm();
        if residual > tol.cancellation * scale || p.order > 1 {
            return Err(Error::UncancelledPole { at: p.at, residual });
        }
    }
    let product = reflected.mul(&df);
    let depth = (-product.shift()).max(0);
    let slice = product.laurent_at_zero(-depth.max(1), -1);
    let mut c: Vec<Complex64> = (0..depth.max(1) as usize)
        .map(|k| slice.get(-(k as i32) - 1) / factorial(k))
        .collect();
    let largest = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    while c.len() > 1 && c.last().is_some_and(|v| v.norm() <= tol.coefficient_zero * largest) {
        c.pop();
    }
    Ok(QuadratureData::OnePoint { c })
}

/// Two-point identity of the three-parameter family, with weights taken as
/// residues of `f* f'` at the origin and at `1/conj(b)`.
pub fn two_point_quadrature(map: &ExampleAbcMap) -> QuadratureData {
    let any = AnalyticMap::from(*map);
    let h = any.reflect().mul(&any.derivative());
    let node = map.node();
    QuadratureData::TwoPoint {
        a: h.residue_at(Complex64::new(0.0, 0.0)),
        b: h.residue_at(node),
        node,
        image: map.to_rational().eval_unchecked(node),
    }
}

/// Taylor coefficients `[z^j] f^k` for `0 <= j, k <= n`, row `k`.
fn power_table(map: &AnalyticMap, n: usize) -> Vec<Vec<Complex64>> {
    let mut series = vec![ZERO];
    series.extend(map.taylor_coeffs(n));
    series.truncate(n + 1);
    let mut rows = Vec::with_capacity(n + 1);
    let mut row = vec![ZERO; n + 1];
    row[0] = ONE;
    for _ in 0..=n {
        rows.push(row.clone());
        row = series_mul(&row, &series, n + 1);
    }
    rows
}

/// `M_k = sum_{j >= k} c_j j! [z^j] f^k` for `k = 0..n`.
pub fn c_to_moments(c: &[Complex64], map: &AnalyticMap) -> Result<MomentVector> {
    check_positive(map)?;
    let n = c.len().saturating_sub(1);
    let table = power_table(map, n);
    let values: Vec<Complex64> = (0..=n)
        .map(|k| (k..=n).map(|j| c[j] * factorial(j) * table[k][j]).sum())
        .collect();
    Ok(MomentVector::from_complex(&values))
}

/// Inverse of [`c_to_moments`] by back substitution on the triangular system
/// whose diagonal is `k! a_0^k`.
pub fn moments_to_c(m: &MomentVector, map: &AnalyticMap) -> Result<Vec<Complex64>> {
    check_positive(map)?;
    let n = m.order();
    let table = power_table(map, n);
    let mut c = vec![ZERO; n + 1];
    for k in (0..=n).rev() {
        let known: Complex64 = (k + 1..=n).map(|j| c[j] * factorial(j) * table[k][j]).sum();
        c[k] = (m.get(k as i32) - known) / (factorial(k) * table[k][k]);
    }
    Ok(c)
}

fn check_positive(map: &AnalyticMap) -> Result<()> {
    let a0 = map.fprime0();
    if a0 > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveLeading(Complex64::new(a0, 0.0)))
    }
}

/// Residual of one test function in a quadrature identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResidual {
    pub test_function: TestFunction,
    pub area_side: Complex64,
    pub node_side: Complex64,
    pub residual: f64,
}

/// `|(1/pi) \int_D g |f'|^2 dA - (node side)|` per test function.
pub fn quadrature_check(
    map: &AnalyticMap,
    data: &QuadratureData,
    tests: &[TestFunction],
    resolution: &AreaResolution,
) -> Result<Vec<QuadratureResidual>> {
    let df = map.derivative();
    let est = area_integrals(tests.len(), resolution, |z, out| {
        let w = df.eval_unchecked(z).norm_sqr();
        for (slot, g) in out.iter_mut().zip(tests) {
            *slot = g.eval(z) * w;
        }
    })?;
    Ok(tests
        .iter()
        .zip(est.values)
        .map(|(g, area_side)| {
            let node_side = data.apply(g);
            QuadratureResidual {
                test_function: *g,
                area_side,
                node_side,
                residual: (area_side - node_side).norm(),
            }
        })
        .collect())
}
