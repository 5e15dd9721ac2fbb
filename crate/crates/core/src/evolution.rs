//! Hele-Shaw evolution with `dM_0/dt = 1` and all other moments fixed.
//!
//! Two steppers share a fixed-step RK4 core:
//!
//! * polynomial mode integrates the coefficients with velocities from the
//!   linear string system;
//! * taylor mode integrates a truncated power series under
//!   `df/dt = z f'(z) P(z)`, where `P` is the Poisson-Schwarz (Herglotz)
//!   extension of `1/(2|f'|^2)` from the circle. Because `df/dt` vanishes
//!   wherever `f'` does, branch points `B_j = f(w_j)` stay fixed.
//!
//! Time is normalized so that `M_0(t) = M_0(0) + t`. The Polubarinova-Galin
//! convention `M_0 = 2t` corresponds to running this flow at half speed.
//!
//! Each step is taken twice, with `s` and `2s` RK4 substeps, and the finer
//! result is kept. One fifteenth of the difference is reported as the local
//! error estimate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bracket_jacobian::{solve_string_system, string_residual};
use crate::cplx_fn::grid::CircleGrid;
use crate::cplx_fn::maps::{AnalyticMap, PolynomialMap};
use crate::cplx_fn::poly::{series_mul, Poly};
use crate::cplx_fn::rational::{contour_residue, RationalFn};
use crate::cplx_fn::roots::polynomial_roots;
use crate::error::{Error, Result};
use crate::moments::{moments_richardson, MomentVector};
use crate::scenarios::ScenarioSpec;
use crate::tolerance::Tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Polynomial,
    Taylor,
}

/// `P(z) = sum_m p_m z^m`, analytic in the disk with `Im p_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerglotzFunction {
    pub coeffs: Vec<Complex64>,
}

impl HerglotzFunction {
    /// Analytic completion of real boundary data sampled on `grid`:
    /// `p_0 = h_0`, `p_m = 2 h_m` for `0 < m < N/2`, `p_{N/2} = h_{N/2}`.
    /// Its real part reproduces the samples exactly at the nodes.
    pub fn from_boundary(samples: &[f64], grid: &CircleGrid) -> Self {
        let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let h = grid.coefficients(&complex);
        let half = grid.size() / 2;
        let mut coeffs = Vec::with_capacity(half + 1);
        coeffs.push(Complex64::new(h[0].re, 0.0));
        coeffs.extend(h[1..half].iter().map(|c| c * 2.0));
        coeffs.push(Complex64::new(h[half].re, 0.0));
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Keeps `p_0 .. p_{modes}`.
    pub fn truncated(mut self, modes: usize) -> Self {
        self.coeffs.truncate(modes + 1);
        self
    }
}

fn cusp_check(fp: &[Complex64], tol: &Tolerances) -> Result<()> {
    let min = fp.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min > tol.cusp) {
        return Err(Error::Cusp { min });
    }
    Ok(())
}

/// The Herglotz function with boundary real part `1/(2|f'|^2)`.
pub fn poisson_schwarz(
    map: &AnalyticMap,
    grid: &CircleGrid,
    modes: usize,
    tol: &Tolerances,
) -> Result<HerglotzFunction> {
    let df = map.derivative();
    let fp = grid.sample(|z| df.eval_unchecked(z));
    cusp_check(&fp, tol)?;
    let h: Vec<f64> = fp.iter().map(|v| 0.5 / v.norm_sqr()).collect();
    Ok(HerglotzFunction::from_boundary(&h, grid).truncated(modes))
}

/// A zero `w` of `f'` in the disk and its image, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub omega: Complex64,
    /// `f(w)`.
    pub value: Complex64,
    /// Residue of `f f'' / f'` at `w`.
    pub value_residue: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPointSet {
    pub points: Vec<BranchPoint>,
}

impl BranchPointSet {
    pub fn omegas(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    /// Largest `|f(w) - res(f f''/f', w)|`.
    pub fn residue_gap(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.value - p.value_residue).norm())
            .fold(0.0, f64::max)
    }
}

/// Zeros of `f'` inside the disk with `B_j = f(w_j)`.
pub fn branch_points(map: &AnalyticMap, tol: &Tolerances) -> Result<BranchPointSet> {
    let f = map.to_rational();
    let df = map.derivative();
    let d2f = df.derivative();
    let zeros = match df.numerator().degree() {
        Some(d) if d > 0 => polynomial_roots(df.numerator().coeffs())?,
        _ => Vec::new(),
    };
    let mut points = Vec::new();
    for (i, &w) in zeros.iter().enumerate() {
        let gap = 1.0 - w.norm();
        if gap.abs() < tol.boundary_zero {
            return Err(Error::ZeroNearBoundary {
                at: w,
                distance: gap.abs(),
            });
        }
        if gap < 0.0 {
            continue;
        }
        let second = d2f.eval_unchecked(w).norm();
        if second < tol.simple_zero {
            return Err(Error::MultipleZero { at: w, second });
        }
        // other singularities of f f''/f': the remaining zeros and the poles of f
        let nearest = zeros
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, z)| (z - w).norm())
            .chain(f.poles().iter().map(|p| (p.at - w).norm()))
            .fold(f64::INFINITY, f64::min);
        if nearest < 1e-6 {
            return Err(Error::MultipleZero { at: w, second });
        }
        let radius = if nearest.is_finite() { 0.5 * nearest } else { 0.5 };
        let value_residue = contour_residue(
            |z| f.eval_unchecked(z) * d2f.eval_unchecked(z) / df.eval_unchecked(z),
            w,
            radius,
            tol.residue_nodes,
        );
        points.push(BranchPoint {
            omega: w,
            value: f.eval_unchecked(w),
            value_residue,
        });
    }
    Ok(BranchPointSet { points })
}

/// Result of one step: the state kept and the step-halving error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Stepped<T> {
    pub next: T,
    pub error_estimate: f64,
}

/// Substep control shared by both steppers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// `dt` is split into equal RK4 substeps no longer than this.
    pub max_substep: f64,
    pub tol: Tolerances,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            max_substep: 1e-3,
            tol: Tolerances::default(),
        }
    }
}

fn axpy(y: &[Complex64], h: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

fn rk4_step<F>(y: &[Complex64], h: f64, rhs: &mut F) -> Result<Vec<Complex64>>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, 0.5 * h, &k1))?;
    let k3 = rhs(&axpy(y, 0.5 * h, &k2))?;
    let k4 = rhs(&axpy(y, h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, &v)| v + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
        .collect())
}

fn integrate<F>(y0: &[Complex64], dt: f64, substeps: usize, rhs: &mut F) -> Result<Vec<Complex64>>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let h = dt / substeps as f64;
    let mut y = y0.to_vec();
    for _ in 0..substeps {
        y = rk4_step(&y, h, rhs)?;
    }
    Ok(y)
}

fn integrate_with_estimate<F>(y0: &[Complex64], dt: f64, max_substep: f64, mut rhs: F) -> Result<(Vec<Complex64>, f64)>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
{
    if !(max_substep > 0.0) {
        return Err(Error::Parameter(format!(
            "max_substep must be positive, got {max_substep}"
        )));
    }
    let substeps = ((dt.abs() / max_substep).ceil() as usize).max(1);
    let coarse = integrate(y0, dt, substeps, &mut rhs)?;
    let fine = integrate(y0, dt, 2 * substeps, &mut rhs)?;
    let estimate = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / 15.0;
    Ok((fine, estimate))
}

fn renormalize(mut coeffs: Vec<Complex64>, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let im = coeffs[0].im;
    if im.abs() >= tol.normalization {
        return Err(Error::Normalization(im));
    }
    coeffs[0].im = 0.0;
    Ok(coeffs)
}

fn interior_zero_count(coeffs: &[Complex64]) -> Result<usize> {
    let b: Vec<Complex64> = coeffs.iter().enumerate().map(|(j, &a)| a * (j + 1) as f64).collect();
    if b.len() < 2 {
        return Ok(0);
    }
    Ok(polynomial_roots(&b)?.iter().filter(|w| w.norm() < 1.0).count())
}

/// One RK4 step of `da/dt` from the string system.
///
/// A zero of `f'` crossing the unit circle during the step means the flow
/// passed through `Res(f', f'*) = 0`; this is reported as
/// [`Error::Degenerate`] even when no stage lands close enough to the
/// singular point for the conditioning test to fire.
pub fn step_polynomial(map: &PolynomialMap, dt: f64, ctl: &StepControl) -> Result<Stepped<PolynomialMap>> {
    let tol = ctl.tol;
    let inside = interior_zero_count(map.coeffs())?;
    let rhs = |a: &[Complex64]| -> Result<Vec<Complex64>> {
        let stage = PolynomialMap::new(a.to_vec())?;
        let v = solve_string_system(&stage, &tol)?;
        if interior_zero_count(a)? != inside {
            return Err(Error::Degenerate {
                resultant: crate::bracket_jacobian::derivative_resultant(&stage).unwrap_or(ZERO),
                ratio: v.conditioning,
            });
        }
        Ok(v.forward().to_vec())
    };
    let (next, error_estimate) = integrate_with_estimate(map.coeffs(), dt, ctl.max_substep, rhs)?;
    let next = renormalize(next, &tol)?;
    if interior_zero_count(&next)? != inside {
        return Err(Error::Degenerate {
            resultant: ZERO,
            ratio: 0.0,
        });
    }
    Ok(Stepped {
        next: PolynomialMap::new(next)?,
        error_estimate,
    })
}

/// A map `f = sum_j a_j z^{j+1}` truncated to a fixed number of terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorSeries {
    pub coeffs: Vec<Complex64>,
}

impl TaylorSeries {
    pub fn from_map(map: &AnalyticMap, order: usize) -> Self {
        Self {
            coeffs: map.taylor_coeffs(order),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// The truncated series as a polynomial map.
    pub fn to_map(&self) -> Result<PolynomialMap> {
        PolynomialMap::new(self.coeffs.clone())
    }

    /// Energy in the top quarter of the coefficients relative to the total.
    pub fn tail_ratio(&self) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let start = self.coeffs.len() - self.coeffs.len() / 4;
        let tail: f64 = self.coeffs[start..].iter().map(|c| c.norm_sqr()).sum();
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    pub fn check_tail(&self, tol: &Tolerances) -> Result<()> {
        let ratio = self.tail_ratio();
        if ratio > tol.tail_energy {
            return Err(Error::TruncationTail {
                ratio,
                threshold: tol.tail_energy,
            });
        }
        Ok(())
    }

    fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &a)| a * (j + 1) as f64)
            .collect()
    }
}

/// `da/dt` for `df/dt = z f' P`. The product is formed in coefficient space
/// and truncated to the series order.
pub fn taylor_velocity(coeffs: &[Complex64], grid: &CircleGrid, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let b: Vec<Complex64> = coeffs.iter().enumerate().map(|(j, &a)| a * (j + 1) as f64).collect();
    let fp = grid.synthesize(&b);
    cusp_check(&fp, tol)?;
    let h: Vec<f64> = fp.iter().map(|v| 0.5 / v.norm_sqr()).collect();
    let p = HerglotzFunction::from_boundary(&h, grid);
    Ok(series_mul(&b, &p.coeffs, coeffs.len()))
}

/// One RK4 step of the truncated series under `df/dt = z f' P`.
pub fn step_taylor_fixed_branch(
    series: &TaylorSeries,
    dt: f64,
    grid: &CircleGrid,
    ctl: &StepControl,
) -> Result<Stepped<TaylorSeries>> {
    if grid.size() < 2 * series.order() {
        return Err(Error::Parameter(format!(
            "taylor grid of {} nodes cannot resolve {} coefficients",
            grid.size(),
            series.order()
        )));
    }
    let tol = ctl.tol;
    let rhs = |a: &[Complex64]| taylor_velocity(a, grid, &tol);
    let (next, error_estimate) = integrate_with_estimate(&series.coeffs, dt, ctl.max_substep, rhs)?;
    let next = TaylorSeries {
        coeffs: renormalize(next, &tol)?,
    };
    next.check_tail(&tol)?;
    Ok(Stepped { next, error_estimate })
}

/// Newton continuation of a zero of the truncated `f'` from a nearby guess.
fn track_zero(series: &TaylorSeries, guess: Complex64) -> Result<Complex64> {
    let b = Poly::new(series.derivative_coeffs());
    let db = b.derivative();
    let mut w = guess;
    for _ in 0..50 {
        let step = b.eval(w) / db.eval(w);
        w -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    if !w.is_finite() || w.norm() >= 1.0 {
        return Err(Error::BranchPointEscaped { at: w });
    }
    Ok(w)
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionState {
    pub t: f64,
    /// `a_0 ..` of the polynomial, or of the truncated series in taylor mode.
    pub coeffs: Vec<Complex64>,
    pub moments: MomentVector,
    /// `|M_k(t) - M_k(0) - t delta_{k0}|` per `k`.
    pub moment_drift: Vec<f64>,
    pub branch_omegas: Vec<Complex64>,
    pub branch_values: Vec<Complex64>,
    /// `|B_j(t) - B_j(0)|` per `j`.
    pub branch_drift: Vec<f64>,
    pub string_residual: f64,
    pub step: f64,
    pub error_estimate: f64,
}

impl EvolutionState {
    pub fn max_branch_drift(&self) -> f64 {
        self.branch_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_moment_drift(&self) -> f64 {
        self.moment_drift.iter().copied().fold(0.0, f64::max)
    }
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    Degenerate { t: f64, message: String },
    Cusp { t: f64, message: String },
    Truncation { t: f64, message: String },
    BranchPointEscaped { t: f64, message: String },
    Failed { t: f64, message: String },
}

impl StopReason {
    pub fn from_error(t: f64, e: &Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Degenerate { .. } => Self::Degenerate { t, message },
            Error::Cusp { .. } => Self::Cusp { t, message },
            Error::TruncationTail { .. } => Self::Truncation { t, message },
            Error::BranchPointEscaped { .. } => Self::BranchPointEscaped { t, message },
            _ => Self::Failed { t, message },
        }
    }

    pub fn completed(&self) -> bool {
        matches!(self, Self::Completed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub mode: Mode,
    pub states: Vec<EvolutionState>,
    pub stop: StopReason,
}

enum Stepper {
    Polynomial(PolynomialMap),
    Taylor(TaylorSeries, CircleGrid),
}

impl Stepper {
    fn coeffs(&self) -> &[Complex64] {
        match self {
            Self::Polynomial(p) => p.coeffs(),
            Self::Taylor(s, _) => &s.coeffs,
        }
    }

    fn as_polynomial(&self) -> Result<PolynomialMap> {
        match self {
            Self::Polynomial(p) => Ok(p.clone()),
            Self::Taylor(s, _) => s.to_map(),
        }
    }

    fn step(&self, dt: f64, ctl: &StepControl) -> Result<(Self, f64)> {
        Ok(match self {
            Self::Polynomial(p) => {
                let s = step_polynomial(p, dt, ctl)?;
                (Self::Polynomial(s.next), s.error_estimate)
            }
            Self::Taylor(series, grid) => {
                let s = step_taylor_fixed_branch(series, dt, grid, ctl)?;
                (Self::Taylor(s.next, grid.clone()), s.error_estimate)
            }
        })
    }

    fn string_residual(&self, grid: &CircleGrid, tol: &Tolerances) -> Result<f64> {
        let map = self.as_polynomial()?;
        let f_dot = match self {
            Self::Polynomial(p) => solve_string_system(p, tol)?.velocity_function(),
            Self::Taylor(s, g) => {
                let mut c = vec![ZERO];
                c.extend(taylor_velocity(&s.coeffs, g, tol)?);
                RationalFn::from_poly(Poly::new(c))
            }
        };
        Ok(string_residual(&map.into(), &f_dot, grid))
    }
}

struct Recorder {
    initial_moments: MomentVector,
    initial_branches: Vec<Complex64>,
    t0: f64,
    order: usize,
    grid: CircleGrid,
    tol: Tolerances,
}

impl Recorder {
    fn record(&self, t: f64, s: &Stepper, omegas: &[Complex64], step: f64, err: f64) -> Result<EvolutionState> {
        let poly = s.as_polynomial()?;
        let moments = moments_richardson(&poly, self.order);
        let moment_drift = (0..=self.order as i32)
            .map(|k| {
                let growth = if k == 0 { t - self.t0 } else { 0.0 };
                (moments.get(k) - self.initial_moments.get(k) - growth).norm()
            })
            .collect();
        let branch_values: Vec<Complex64> = omegas.iter().map(|&w| poly.eval(w)).collect();
        let branch_drift = branch_values
            .iter()
            .zip(&self.initial_branches)
            .map(|(b, b0)| (b - b0).norm())
            .collect();
        Ok(EvolutionState {
            t,
            coeffs: s.coeffs().to_vec(),
            moments,
            moment_drift,
            branch_omegas: omegas.to_vec(),
            branch_values,
            branch_drift,
            string_residual: s.string_residual(&self.grid, &self.tol)?,
            step,
            error_estimate: err,
        })
    }
}

/// Runs a scenario to its horizon, recording every `output_every` steps and
/// the final state. Any failure after the start ends the run with a typed
/// stop reason; failures while setting up are returned as errors.
pub fn run_evolution(spec: &ScenarioSpec) -> Result<Trajectory> {
    spec.validate()?;
    let tol = spec.tolerances;
    let map = spec.family.build()?;
    let mode = spec.mode();
    let order = spec.moment_order.unwrap_or_else(|| map.default_moment_count());
    let grid = CircleGrid::new(spec.grid_size)?;

    let mut stepper = match mode {
        Mode::Polynomial => match &map {
            AnalyticMap::Polynomial(p) => Stepper::Polynomial(p.clone()),
            _ => {
                return Err(Error::Parameter(format!(
                    "mode: polynomial stepping needs a polynomial family, got {}",
                    spec.family.name()
                )))
            }
        },
        Mode::Taylor => {
            let series = TaylorSeries::from_map(&map, spec.taylor_order);
            series.check_tail(&tol)?;
            Stepper::Taylor(series, CircleGrid::new(spec.taylor_grid)?)
        }
    };

    // branch points are followed on the exact map at t = 0, then by continuation
    let initial = branch_points(&map, &tol)?;
    let mut omegas = initial.omegas();
    let initial_poly = stepper.as_polynomial()?;
    let recorder = Recorder {
        initial_moments: moments_richardson(&initial_poly, order),
        initial_branches: omegas.iter().map(|&w| initial_poly.eval(w)).collect(),
        t0: 0.0,
        order,
        grid,
        tol,
    };

    let ctl = StepControl {
        max_substep: spec.dt.abs(),
        tol,
    };
    let steps = ((spec.horizon / spec.dt) - 1e-9).ceil().max(0.0) as usize;
    let mut states = vec![recorder.record(0.0, &stepper, &omegas, 0.0, 0.0)?];
    let mut t = 0.0;
    let mut stop = StopReason::Completed;

    for i in 1..=steps {
        let target = if i == steps { spec.horizon } else { i as f64 * spec.dt };
        let dt = target - t;
        let outcome = stepper.step(dt, &ctl).and_then(|(next, err)| {
            let tracked = match &next {
                Stepper::Taylor(series, _) => omegas
                    .iter()
                    .map(|&w| track_zero(series, w))
                    .collect::<Result<Vec<_>>>()?,
                Stepper::Polynomial(_) => omegas.clone(),
            };
            Ok((next, err, tracked))
        });
        let (next, err, tracked) = match outcome {
            Ok(v) => v,
            Err(e) => {
                stop = StopReason::from_error(t, &e);
                break;
            }
        };
        stepper = next;
        omegas = tracked;
        t = target;
        if i % spec.output_every == 0 || i == steps {
            match recorder.record(t, &stepper, &omegas, dt, err) {
                Ok(s) => states.push(s),
                Err(e) => {
                    stop = StopReason::from_error(t, &e);
                    break;
                }
            }
        }
    }

    Ok(Trajectory { mode, states, stop })
}
