//! The time bracket `{f, f*}_t`, the linear string system and the Jacobian
//! of the moment map for polynomial maps.
//!
//! # Index convention
//!
//! The `(2n+1) x (2n+1)` matrices `V` and `U` are indexed logically by
//! `-n..=n` for both rows and columns and stored at `i + n`. The coefficient
//! vector is `(a_{-n}, .., a_n)` with `a_{-j} = conj(a_j)`, so that the moment
//! map `(M_{-n}, .., M_n)` has Jacobian `V U`:
//!
//! * `V[k][i] = [z^i] f^k` for `0 <= k <= i`, `conj([z^{-i}] (f*)^{-k})` for
//!   `i <= k < 0`, zero otherwise. It is block triangular with `V[k][k] = a_0^|k|`.
//! * `U[i][j] = b_{-(i+j)} + b_0 delta_{i0} delta_{j0}` on `j in [-n, -i] u [0, n]`
//!   for `i >= 0` and `j in [-n, 0] u [-i, n]` for `i <= 0`, with `b_j` the
//!   coefficients of `f'` and `b_{-j} = conj(b_j)`. Row `i` gives the
//!   coefficient of `z^{-i}` in `{f, f*}_t`.
//!
//! # Resultant sign convention
//!
//! The Sylvester matrix of `p` (degree `dp`) and `q` (degree `dq`) stacks `dq`
//! shifted copies of the coefficients of `p` in ascending powers, followed by
//! `dp` shifted copies of those of `q`. With this layout
//! `Res_pol(z - alpha, z - beta) = beta - alpha` and the meromorphic resultant
//! satisfies `Res(g, h) = Res_pol(g, z^n h) / (b_0^n c_0^n)` exactly.
//!
//! Evaluated numerically, `det(V U) = (-1)^n 2 a_0^{n^2+3n+1} Res(f', f'*)`
//! and `det U = (-1)^n 2 b_0 det S`. The report from
//! [`jacobian_identity_check`] carries both the unsigned and the
//! parity-corrected comparisons.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::cplx_fn::grid::CircleGrid;
use crate::cplx_fn::maps::{AnalyticMap, PolynomialMap};
use crate::cplx_fn::poly::{series_mul, Poly};
use crate::cplx_fn::rational::RationalFn;
use crate::cplx_fn::roots::polynomial_roots;
use crate::error::{Error, Result};
use crate::moments::richardson_moment;
use crate::tolerance::Tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type CMatrix = DMatrix<Complex64>;

fn at(n: usize, i: i64) -> usize {
    (i + n as i64) as usize
}

/// `V` and `U` for one polynomial map.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketSystem {
    pub n: usize,
    pub v: CMatrix,
    pub u: CMatrix,
}

impl BracketSystem {
    pub fn new(map: &PolynomialMap) -> Self {
        Self {
            n: map.n(),
            v: build_v(map),
            u: build_u(map),
        }
    }

    /// `V U`, the Jacobian of `(M_{-n}..M_n)` in `(a_{-n}..a_n)`.
    pub fn jacobian(&self) -> CMatrix {
        &self.v * &self.u
    }

    /// Entry at logical indices.
    pub fn v_at(&self, k: i64, i: i64) -> Complex64 {
        self.v[(at(self.n, k), at(self.n, i))]
    }

    pub fn u_at(&self, i: i64, j: i64) -> Complex64 {
        self.u[(at(self.n, i), at(self.n, j))]
    }
}

/// Rows `k = 0..=n` of `[t^s] X(t)^k`, `s = 0..=n`, where `f = z X(z)`.
fn powers_of_x(a: &[Complex64], n: usize) -> Vec<Vec<Complex64>> {
    let mut rows = Vec::with_capacity(n + 1);
    let mut row = vec![ZERO; n + 1];
    row[0] = ONE;
    for _ in 0..=n {
        rows.push(row.clone());
        row = series_mul(&row, a, n + 1);
    }
    rows
}

pub fn build_v(map: &PolynomialMap) -> CMatrix {
    let n = map.n();
    let a = map.coeffs();
    let px = powers_of_x(a, n);
    let mut v = CMatrix::zeros(2 * n + 1, 2 * n + 1);
    for k in 0..=n {
        for i in k..=n {
            // [z^i] f^k = [t^{i-k}] X^k
            let val = px[k][i - k];
            v[(at(n, k as i64), at(n, i as i64))] = val;
            if k > 0 {
                v[(at(n, -(k as i64)), at(n, -(i as i64)))] = val.conj();
            }
        }
    }
    v
}

pub fn build_u(map: &PolynomialMap) -> CMatrix {
    let n = map.n() as i64;
    let b = map.derivative_coeffs();
    let b_at = |k: i64| -> Complex64 {
        if k.unsigned_abs() as usize >= b.len() {
            ZERO
        } else if k >= 0 {
            b[k as usize]
        } else {
            b[(-k) as usize].conj()
        }
    };
    let size = (2 * n + 1) as usize;
    let mut u = CMatrix::zeros(size, size);
    for i in -n..=n {
        for j in -n..=n {
            let in_range = if i >= 0 { j <= -i || j >= 0 } else { j <= 0 || j >= -i };
            if !in_range {
                continue;
            }
            let mut val = b_at(-(i + j));
            if i == 0 && j == 0 {
                val += b[0];
            }
            u[(at(n as usize, i), at(n as usize, j))] = val;
        }
    }
    u
}

/// Determinant of the Sylvester matrix of `p` and `q` (ascending coefficient lists).
pub fn sylvester_matrix(p: &[Complex64], q: &[Complex64]) -> Result<CMatrix> {
    if p.last().is_none_or(|c| *c == ZERO) || q.last().is_none_or(|c| *c == ZERO) {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let size = dp + dq;
    let mut s = CMatrix::zeros(size, size);
    for r in 0..dq {
        for (l, &c) in p.iter().enumerate() {
            s[(r, r + l)] = c;
        }
    }
    for r in 0..dp {
        for (l, &c) in q.iter().enumerate() {
            s[(dq + r, r + l)] = c;
        }
    }
    Ok(s)
}

pub fn sylvester_resultant(p: &[Complex64], q: &[Complex64]) -> Result<Complex64> {
    let s = sylvester_matrix(p, q)?;
    Ok(if s.nrows() == 0 { ONE } else { s.determinant() })
}

/// Validates `g = sum_0^n b_j z^j` and `h = sum_0^n c_k z^{-k}`, returning `n`.
fn resultant_inputs(g: &[Complex64], h: &[Complex64]) -> Result<usize> {
    if g.is_empty() || g.len() != h.len() {
        return Err(Error::ResultantUndefined(format!(
            "expected coefficient lists of equal nonzero length, got {} and {}",
            g.len(),
            h.len()
        )));
    }
    let n = g.len() - 1;
    if h[0] == ZERO {
        return Err(Error::ResultantUndefined("h vanishes at infinity".into()));
    }
    if n > 0 && g[n] == ZERO {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if n > 0 && g[0] == ZERO && h[n] != ZERO {
        return Err(Error::ResultantUndefined(
            "h has a pole at a zero of g (the origin)".into(),
        ));
    }
    Ok(n)
}

/// `Res(g, h) = prod_i h(w_i) / h(inf)^n` over the zeros `w_i` of `g`,
/// computed from the Sylvester determinant of `g` and `z^n h`.
pub fn meromorphic_resultant(g: &[Complex64], h: &[Complex64]) -> Result<Complex64> {
    let n = resultant_inputs(g, h)?;
    if n == 0 {
        return Ok(ONE);
    }
    let zn_h: Vec<Complex64> = h.iter().rev().copied().collect();
    let det = sylvester_resultant(g, &zn_h)?;
    Ok(det / (g[0].powu(n as u32) * h[0].powu(n as u32)))
}

/// The same resultant as a product over the roots of `g`.
pub fn meromorphic_resultant_by_roots(g: &[Complex64], h: &[Complex64]) -> Result<Complex64> {
    let n = resultant_inputs(g, h)?;
    if n == 0 {
        return Ok(ONE);
    }
    let hf = RationalFn::new(-(n as i32), Poly::new(h.iter().rev().copied().collect()), Vec::new());
    let roots = polynomial_roots(g)?;
    Ok(roots.iter().map(|&w| hf.eval_unchecked(w) / h[0]).product())
}

/// `Res(f', f'*)`.
pub fn derivative_resultant(map: &PolynomialMap) -> Result<Complex64> {
    let b = map.derivative_coeffs();
    let bc: Vec<Complex64> = b.iter().map(|c| c.conj()).collect();
    meromorphic_resultant(&b, &bc)
}

/// Sylvester matrix of `f'` and `z^n f'*`.
pub fn derivative_sylvester(map: &PolynomialMap) -> Result<CMatrix> {
    let b = map.derivative_coeffs();
    let zn: Vec<Complex64> = b.iter().rev().map(|c| c.conj()).collect();
    sylvester_matrix(&b, &zn)
}

/// Central finite differences of Richardson's sum in the independent
/// variables `(a_j, conj a_j)`. Column `j > 0` perturbs `a_j`, column `-j`
/// perturbs `conj a_j`, and column 0 perturbs `a_0` in both slots since
/// `a_0` is real.
pub fn fd_jacobian(map: &PolynomialMap, step: f64) -> CMatrix {
    let n = map.n();
    let x0 = map.coeffs().to_vec();
    let y0: Vec<Complex64> = x0.iter().map(|c| c.conj()).collect();
    let moments = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
        (-(n as i32)..=n as i32).map(|k| richardson_moment(x, y, k)).collect()
    };
    let mut jac = CMatrix::zeros(2 * n + 1, 2 * n + 1);
    for j in -(n as i64)..=n as i64 {
        let shifted = |h: f64| {
            let (mut x, mut y) = (x0.clone(), y0.clone());
            let idx = j.unsigned_abs() as usize;
            if j >= 0 {
                x[idx] += h;
            }
            if j <= 0 {
                y[idx] += h;
            }
            moments(&x, &y)
        };
        let plus = shifted(step);
        let minus = shifted(-step);
        for (r, (p, m)) in plus.iter().zip(&minus).enumerate() {
            jac[(r, at(n, j))] = (p - m) / (2.0 * step);
        }
    }
    jac
}

/// Everything computed by [`jacobian_identity_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    pub n: usize,
    pub a0: f64,
    /// `det(V U)`.
    pub lhs: Complex64,
    /// `2 a_0^{n^2+3n+1} Res(f', f'*)`.
    pub rhs: Complex64,
    pub rel_error: f64,
    /// `|lhs - (-1)^n rhs| / |rhs|`.
    pub parity_rel_error: f64,
    pub resultant: Complex64,
    pub resultant_by_roots: Complex64,
    pub det_v: Complex64,
    /// `a_0^{n(n+1)}`.
    pub det_v_closed: f64,
    pub det_u: Complex64,
    /// `2 b_0^{2n+1} Res(f', f'*)`.
    pub det_u_closed: Complex64,
    pub det_s: Complex64,
    /// `2 b_0 det S`.
    pub det_u_sylvester: Complex64,
    /// Largest entrywise `|V U - J_fd|`.
    pub fd_max_error: f64,
}

fn rel(x: Complex64, y: Complex64) -> f64 {
    if y == ZERO {
        x.norm()
    } else {
        (x - y).norm() / y.norm()
    }
}

impl JacobianReport {
    pub fn det_v_rel_error(&self) -> f64 {
        rel(self.det_v, Complex64::new(self.det_v_closed, 0.0))
    }

    pub fn det_u_rel_error(&self) -> f64 {
        rel(self.det_u, self.det_u_closed)
    }

    pub fn det_u_sylvester_rel_error(&self) -> f64 {
        rel(self.det_u, self.det_u_sylvester)
    }

    fn parity(&self) -> f64 {
        if self.n.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn det_u_parity_rel_error(&self) -> f64 {
        rel(self.det_u, self.det_u_closed * self.parity())
    }

    pub fn det_u_sylvester_parity_rel_error(&self) -> f64 {
        rel(self.det_u, self.det_u_sylvester * self.parity())
    }
}

/// Finite-difference step used by the report.
pub const FD_STEP: f64 = 1e-5;

pub fn jacobian_identity_check(map: &PolynomialMap) -> Result<JacobianReport> {
    let sys = BracketSystem::new(map);
    let n = sys.n;
    let a0 = map.a0();
    let b0 = map.derivative_coeffs()[0];
    let resultant = derivative_resultant(map)?;
    let b = map.derivative_coeffs();
    let bc: Vec<Complex64> = b.iter().map(|c| c.conj()).collect();
    let resultant_by_roots = meromorphic_resultant_by_roots(&b, &bc)?;

    let jac = sys.jacobian();
    let lhs = jac.determinant();
    let rhs = resultant * 2.0 * a0.powi((n * n + 3 * n + 1) as i32);
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };

    let det_s = if n == 0 {
        ONE
    } else {
        derivative_sylvester(map)?.determinant()
    };
    let fd = fd_jacobian(map, FD_STEP);
    let fd_max_error = (&jac - &fd).iter().map(|c| c.norm()).fold(0.0, f64::max);

    Ok(JacobianReport {
        n,
        a0,
        lhs,
        rhs,
        rel_error: rel(lhs, rhs),
        parity_rel_error: rel(lhs, rhs * parity),
        resultant,
        resultant_by_roots,
        det_v: sys.v.determinant(),
        det_v_closed: a0.powi((n * (n + 1)) as i32),
        det_u: sys.u.determinant(),
        det_u_closed: resultant * 2.0 * b0.powu(2 * n as u32 + 1),
        det_s,
        det_u_sylvester: det_s * 2.0 * b0,
        fd_max_error,
    })
}

/// Solution `(adot_{-n}..adot_n)` of `U adot = e_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringVelocities {
    pub n: usize,
    pub adot: Vec<Complex64>,
    /// Smallest over largest singular value of `U`.
    pub conditioning: f64,
}

impl StringVelocities {
    pub fn get(&self, j: i64) -> Complex64 {
        self.adot[at(self.n, j)]
    }

    /// `adot_0 .. adot_n`, the rates of the map coefficients.
    pub fn forward(&self) -> &[Complex64] {
        &self.adot[self.n..]
    }

    /// Largest `|adot_{-j} - conj(adot_j)|`, including `Im adot_0`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..=self.n as i64)
            .map(|j| (self.get(-j) - self.get(j).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `df/dt = sum_j adot_j z^{j+1}`.
    pub fn velocity_function(&self) -> RationalFn {
        let mut c = vec![ZERO];
        c.extend_from_slice(self.forward());
        RationalFn::from_poly(Poly::new(c))
    }
}

/// Solves the linear string system. A near-singular `U` (which happens
/// exactly when `f'` and `f'*` share a zero) is reported as
/// [`Error::Degenerate`].
pub fn solve_string_system(map: &PolynomialMap, tol: &Tolerances) -> Result<StringVelocities> {
    let n = map.n();
    let u = build_u(map);
    let sv = u.clone().singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
    if !(ratio >= tol.singular_ratio) {
        let resultant = derivative_resultant(map).unwrap_or(ZERO);
        return Err(Error::Degenerate { resultant, ratio });
    }
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(2 * n + 1);
    rhs[n] = ONE;
    let sol = u.lu().solve(&rhs).ok_or(Error::Degenerate {
        resultant: derivative_resultant(map).unwrap_or(ZERO),
        ratio,
    })?;
    Ok(StringVelocities {
        n,
        adot: sol.iter().copied().collect(),
        conditioning: ratio,
    })
}

/// `z f'(z) (df/dt)*(z) + z^{-1} f'*(z) (df/dt)(z)` at the grid nodes, with
/// `(df/dt)*` obtained by reflecting `f_dot`. On the circle this equals
/// `2 Re[f_dot conj(z f')]`.
pub fn bracket_t_samples(map: &AnalyticMap, f_dot: &RationalFn, grid: &CircleGrid) -> Vec<Complex64> {
    let df = map.derivative();
    let df_star = df.reflect();
    let f_dot_star = f_dot.reflect();
    grid.sample(|z| {
        z * df.eval_unchecked(z) * f_dot_star.eval_unchecked(z)
            + df_star.eval_unchecked(z) * f_dot.eval_unchecked(z) / z
    })
}

/// `max |{f, f*}_t - 1|` over the grid.
pub fn string_residual(map: &AnalyticMap, f_dot: &RationalFn, grid: &CircleGrid) -> f64 {
    bracket_t_samples(map, f_dot, grid)
        .iter()
        .map(|s| (s - ONE).norm())
        .fold(0.0, f64::max)
}
