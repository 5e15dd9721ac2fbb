//! The rational family `f = c z (z - a) / (z - b)`, its two degenerate
//! subcases, and scenario descriptions for the evolution driver.
//!
//! Subcase 1 (`a = 1/conj b`) maps the disk twice onto a disk of radius
//! `sqrt(M0/2)`; its moments are those of that disk and do not determine the
//! map. The branch point `B1 = f(w1)` does. Subcase 2 (`w1 = 1/conj b`) has a
//! single quadrature node at the origin with weight `M0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cplx_fn::grid::CircleGrid;
use crate::cplx_fn::maps::{AnalyticMap, ExampleAbcMap, PolynomialMap, RationalMap};
use crate::cplx_fn::winding::{winding_number, BoundaryCurve};
use crate::error::{Error, Result};
use crate::evolution::{branch_points, Mode};
use crate::moments::{
    moments_area_oracle, moments_residue, moments_taylor_richardson, quadrature_check, quadrature_coeffs,
    two_point_quadrature, AreaResolution, MomentVector, QuadratureData, TestFunction,
};
use crate::tolerance::Tolerances;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Map families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Disk {
        radius: f64,
    },
    Polynomial {
        coeffs: Vec<Complex64>,
    },
    ExampleAbc {
        a: Complex64,
        b: Complex64,
        c_magnitude: f64,
    },
    Subcase1 {
        m0: f64,
        b1: Complex64,
    },
    Subcase2 {
        m0: f64,
        b1: Complex64,
    },
    /// A general rational map in the reflected-pole form, evolved as a power series.
    Taylor {
        numer: Vec<Complex64>,
        pole_reflections: Vec<Complex64>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Disk { .. } => "disk",
            Self::Polynomial { .. } => "polynomial",
            Self::ExampleAbc { .. } => "example_abc",
            Self::Subcase1 { .. } => "subcase1",
            Self::Subcase2 { .. } => "subcase2",
            Self::Taylor { .. } => "taylor",
        }
    }

    /// Polynomial families step the linear string system; all others step the power series.
    pub fn default_mode(&self) -> Mode {
        match self {
            Self::Disk { .. } | Self::Polynomial { .. } => Mode::Polynomial,
            _ => Mode::Taylor,
        }
    }

    pub fn build(&self) -> Result<AnalyticMap> {
        Ok(match self {
            Self::Disk { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::Parameter(format!("disk radius must be positive, got {radius}")));
                }
                PolynomialMap::disk(*radius)?.into()
            }
            Self::Polynomial { coeffs } => PolynomialMap::new(coeffs.clone())?.into(),
            Self::ExampleAbc { a, b, c_magnitude } => make_example_abc(*a, *b, *c_magnitude)?.0.into(),
            Self::Subcase1 { m0, b1 } => make_subcase1(*m0, *b1)?.into(),
            Self::Subcase2 { m0, b1 } => make_subcase2(*m0, *b1)?.into(),
            Self::Taylor {
                numer,
                pole_reflections,
            } => RationalMap::new(numer.clone(), pole_reflections.clone())?.into(),
        })
    }
}

/// Where a run writes its artifacts. Paths are used as given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSinks {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub json: Option<String>,
}

/// A complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Stepper; defaults to the family's natural mode.
    pub mode: Option<Mode>,
    pub horizon: f64,
    pub dt: f64,
    /// Record a state every this many steps.
    pub output_every: usize,
    /// Circle grid for diagnostics (string residual, winding numbers).
    pub grid_size: usize,
    /// Truncation order of the power series in taylor mode.
    pub taylor_order: usize,
    /// Grid used by the Poisson-Schwarz transform in taylor mode.
    pub taylor_grid: usize,
    /// Highest moment tracked; defaults to `max(n, 2m + 2)`.
    pub moment_order: Option<usize>,
    pub tolerances: Tolerances,
    pub outputs: OutputSinks,
}

impl ScenarioSpec {
    pub const DEFAULT_DT: f64 = 1e-3;
    pub const DEFAULT_GRID: usize = 1024;
    pub const DEFAULT_TAYLOR_ORDER: usize = 64;
    pub const DEFAULT_TAYLOR_GRID: usize = 256;
    pub const DEFAULT_HORIZON: f64 = 0.1;

    pub fn new(family: Family) -> Self {
        Self {
            family,
            mode: None,
            horizon: Self::DEFAULT_HORIZON,
            dt: Self::DEFAULT_DT,
            output_every: 1,
            grid_size: Self::DEFAULT_GRID,
            taylor_order: Self::DEFAULT_TAYLOR_ORDER,
            taylor_grid: Self::DEFAULT_TAYLOR_GRID,
            moment_order: None,
            tolerances: Tolerances::default(),
            outputs: OutputSinks::default(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or_else(|| self.family.default_mode())
    }

    /// Checks the numeric fields; family parameters are checked by [`Family::build`].
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Parameter(format!("{key}: {why}")));
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return bad("dt", format!("must be finite and nonzero, got {}", self.dt));
        }
        if !(self.horizon.is_finite()) || self.horizon * self.dt < 0.0 {
            return bad(
                "horizon",
                format!("must be finite with the sign of dt, got {}", self.horizon),
            );
        }
        if self.output_every == 0 {
            return bad("output_every", "must be at least 1".into());
        }
        for (key, n) in [("grid_size", self.grid_size), ("taylor_grid", self.taylor_grid)] {
            if n < 4 || !n.is_power_of_two() {
                return bad(key, format!("must be a power of two >= 4, got {n}"));
            }
        }
        if self.taylor_order < 4 {
            return bad("taylor_order", format!("must be at least 4, got {}", self.taylor_order));
        }
        if 2 * self.taylor_order > self.taylor_grid {
            return bad(
                "taylor_grid",
                format!(
                    "must be at least twice taylor_order ({}), got {}",
                    self.taylor_order, self.taylor_grid
                ),
            );
        }
        self.family.build().map(|_| ())
    }
}

/// Closed-form weights of the two-point identity
/// `(1/pi) \int_D g |f'|^2 dA = A g(0) + B g(1/conj b)`.
pub fn example_abc_weights(map: &ExampleAbcMap) -> (Complex64, Complex64) {
    let (a, b, c) = (map.a, map.b, map.c);
    let c2 = c.norm_sqr();
    let b2 = b.norm_sqr();
    let weight_a = a / b * c2;
    let weight_b = (a.conj() - b.conj()) * (1.0 - 2.0 * b2 + a * b.conj() * b2) / (b.conj() * (1.0 - b2).powi(2)) * c2;
    (weight_a, weight_b)
}

/// The map with `arg c` fixed by `a c / b > 0`, and its two-point quadrature
/// data from the closed-form weights.
pub fn make_example_abc(a: Complex64, b: Complex64, c_magnitude: f64) -> Result<(ExampleAbcMap, QuadratureData)> {
    let map = ExampleAbcMap::with_c_magnitude(a, b, c_magnitude)?;
    let (wa, wb) = example_abc_weights(&map);
    let node = map.node();
    Ok((
        map,
        QuadratureData::TwoPoint {
            a: wa,
            b: wb,
            node,
            image: map.to_rational().eval_unchecked(node),
        },
    ))
}

/// `|B1|` as a function of `|b|` in subcase 1.
fn subcase1_branch_modulus(m0: f64, beta: f64) -> f64 {
    let u = 1.0 - (1.0 - 1.0 / (beta * beta)).sqrt();
    beta * beta * (m0 / 2.0).sqrt() * u * u
}

/// Subcase 1: `a = 1/conj b`, `c = |b| sqrt(M0/2)`, with `b` recovered from `(M0, B1)`.
///
/// The closed-form inverse `|b| = (X^{1/4} + X^{-1/4}) / 2`, `X = 2|B1|^2/M0`,
/// `arg b = arg B1` seeds a safeguarded Newton iteration on
/// `|B1| = |b|^2 sqrt(M0/2) (1 - sqrt(1 - 1/|b|^2))^2`, which is decreasing
/// in `|b| > 1`.
pub fn make_subcase1(m0: f64, b1: Complex64) -> Result<ExampleAbcMap> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Parameter(format!("subcase1 needs M0 > 0, got {m0}")));
    }
    let limit = (m0 / 2.0).sqrt();
    let target = b1.norm();
    if !(target > 0.0 && target < limit) {
        return Err(Error::Parameter(format!(
            "subcase1 needs 0 < |B1| < sqrt(M0/2) = {limit}, got |B1| = {target}"
        )));
    }
    let x = 2.0 * target * target / m0;
    let mut beta = 0.5 * (x.powf(0.25) + x.powf(-0.25));
    // bracket for the safeguard
    let (mut lo, mut hi) = (1.0_f64, beta.max(2.0));
    while subcase1_branch_modulus(m0, hi) > target {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let g = subcase1_branch_modulus(m0, beta) - target;
        if g > 0.0 {
            lo = lo.max(beta);
        } else {
            hi = hi.min(beta);
        }
        let s = (1.0 - 1.0 / (beta * beta)).sqrt();
        let u = 1.0 - s;
        let dg = 2.0 * limit * u * (beta * u - 1.0 / (beta * s));
        let mut next = beta - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - beta).abs() <= 1e-16 * beta {
            beta = next;
            break;
        }
        beta = next;
    }
    let b = Complex64::from_polar(beta, b1.arg());
    let a = ONE / b.conj();
    ExampleAbcMap::new(a, b, Complex64::new(beta * limit, 0.0))
}

/// `w1` of subcase 2 from `(M0, B1)`.
pub fn subcase2_omega(m0: f64, b1: Complex64) -> Complex64 {
    let q = b1.norm_sqr() / m0;
    let r2 = -q / 2.0 + (q * q / 4.0 + 2.0 * q).sqrt();
    Complex64::from_polar(r2.sqrt(), b1.arg())
}

/// Subcase 2 from the branch-point preimage `w1` and `M0`:
/// `f = C z (2|w|^2 - |w|^4 - conj(w) z) / (1 - conj(w) z)`,
/// `C = sqrt(M0) / (|w| sqrt(2 - |w|^2))`.
pub fn subcase2_from_omega(m0: f64, omega: Complex64) -> Result<RationalMap> {
    let r = omega.norm();
    if !(m0 > 0.0) || !(r > 0.0 && r < 1.0) {
        return Err(Error::Parameter(format!(
            "subcase2 needs M0 > 0 and 0 < |w1| < 1, got {m0}, {r}"
        )));
    }
    let r2 = r * r;
    let cc = m0.sqrt() / (r * (2.0 - r2).sqrt());
    let alpha = 2.0 * r2 - r2 * r2;
    RationalMap::new(
        vec![Complex64::new(cc * alpha, 0.0), -omega.conj() * cc],
        vec![omega.conj()],
    )
}

/// `C` of subcase 2.
pub fn subcase2_scale(m0: f64, omega: Complex64) -> f64 {
    let r = omega.norm();
    m0.sqrt() / (r * (2.0 - r * r).sqrt())
}

/// `B1 = w |w| sqrt(M0) / sqrt(2 - |w|^2)`.
pub fn subcase2_branch_point(m0: f64, omega: Complex64) -> Complex64 {
    let r = omega.norm();
    omega * r * m0.sqrt() / (2.0 - r * r).sqrt()
}

pub fn make_subcase2(m0: f64, b1: Complex64) -> Result<RationalMap> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Parameter(format!("subcase2 needs M0 > 0, got {m0}")));
    }
    let limit = m0.sqrt();
    if !(b1.norm() > 0.0 && b1.norm() < limit) {
        return Err(Error::Parameter(format!(
            "subcase2 needs 0 < |B1| < sqrt(M0) = {limit}, got |B1| = {}",
            b1.norm()
        )));
    }
    subcase2_from_omega(m0, subcase2_omega(m0, b1))
}

/// Recovers `(M0, B1)` from a map built by either subcase constructor.
pub fn subcase_parameters(map: &AnalyticMap, tol: &Tolerances) -> Result<(f64, Complex64)> {
    let m = moments_residue(map, 0, tol)?;
    let bp = branch_points(map, tol)?;
    let first = bp
        .points
        .first()
        .ok_or_else(|| Error::InvalidMap("no branch point in the disk".into()))?;
    Ok((m.m0, first.value))
}

/// A fixed corpus of maps from every family, used by the moment cross-checks.
pub fn scenario_corpus() -> Vec<Family> {
    let c = Complex64::new;
    vec![
        Family::Disk { radius: 1.0 },
        Family::Disk { radius: 0.7 },
        Family::Polynomial {
            coeffs: vec![c(1.0, 0.0), c(0.3, 0.0)],
        },
        Family::Polynomial {
            coeffs: vec![c(1.0, 0.0), c(0.2, -0.1), c(0.05, 0.1), c(-0.03, 0.02)],
        },
        Family::ExampleAbc {
            a: c(0.4, 0.0),
            b: c(2.0, 0.0),
            c_magnitude: 2.0,
        },
        Family::ExampleAbc {
            a: c(0.3, 0.2),
            b: c(1.5, -1.0),
            c_magnitude: 1.2,
        },
        Family::Subcase1 {
            m0: 2.0,
            b1: Complex64::from_polar(subcase1_branch_modulus(2.0, 2.0), 0.0),
        },
        Family::Subcase1 {
            m0: 1.0,
            b1: c(0.1, 0.15),
        },
        Family::Subcase2 {
            m0: 1.0,
            b1: subcase2_branch_point(1.0, c(0.6, 0.0)),
        },
        Family::Subcase2 {
            m0: 1.5,
            b1: c(-0.2, 0.3),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
}

impl Check {
    pub fn measured(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        let status = if residual.is_finite() && residual < threshold {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            status,
            residual: Some(residual),
            threshold: Some(threshold),
        }
    }

    /// A pass/fail check with nothing to measure.
    pub fn ok(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Pass,
            residual: None,
            threshold: None,
        }
    }

    pub fn failed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            residual: None,
            threshold: None,
        }
    }

    pub fn skipped(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Skipped,
            residual: None,
            threshold: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub family: String,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Moments by the three independent routes, `(richardson, residue, area)`.
pub fn three_way_moments(
    map: &AnalyticMap,
    order: usize,
    tol: &Tolerances,
) -> Result<(MomentVector, MomentVector, MomentVector)> {
    let richardson = moments_taylor_richardson(map, order, 160)?;
    let residue = moments_residue(map, order, tol)?;
    let (area, _) = moments_area_oracle(map, order, &AreaResolution::default())?;
    Ok((richardson, residue, area))
}

fn push_result(checks: &mut Vec<Check>, name: &str, r: Result<Check>) {
    checks.push(r.unwrap_or_else(|_| Check::failed(name)));
}

/// Runs the checks appropriate to the family. Checks that do not apply are
/// listed as skipped so every report has the same check names per family.
pub fn verify_scenario(family: &Family, tol: &Tolerances) -> Result<ScenarioReport> {
    let map = family.build()?;
    let mut checks = Vec::new();
    let grid = CircleGrid::new(1024)?;
    let order = map.default_moment_count().max(6);

    let df = map.derivative();
    let min_fp = grid
        .sample(|z| df.eval_unchecked(z))
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    // reported as cusp tolerance over min |f'| so that smaller is better
    checks.push(Check::measured(
        "no cusp: cusp / min |f'| on circle",
        tol.cusp / min_fp,
        1.0,
    ));

    match three_way_moments(&map, order, tol) {
        Ok((r, s, a)) => {
            checks.push(Check::measured("moments richardson vs residue", r.max_gap(&s), 1e-10));
            checks.push(Check::measured("moments residue vs area", s.max_gap(&a), 1e-6));
        }
        Err(_) => {
            checks.push(Check::failed("moments richardson vs residue"));
            checks.push(Check::failed("moments residue vs area"));
        }
    }

    let moments = moments_residue(&map, order, tol)?;

    match family {
        Family::ExampleAbc { .. } => {
            let AnalyticMap::ExampleAbc(m) = map else {
                unreachable!()
            };
            let (wa, wb) = example_abc_weights(&m);
            let QuadratureData::TwoPoint { a, b, image, .. } = two_point_quadrature(&m) else {
                unreachable!()
            };
            checks.push(Check::measured(
                "weight A residue",
                (a - wa).norm() / wa.norm().max(1.0),
                1e-12,
            ));
            checks.push(Check::measured(
                "weight B residue",
                (b - wb).norm() / wb.norm().max(1.0),
                1e-12,
            ));
            let consistency = (0..=4)
                .map(|k| {
                    let expect = if k == 0 { a + b } else { b * image.powi(k) };
                    (moments.get(k) - expect).norm() / expect.norm().max(1.0)
                })
                .fold(0.0, f64::max);
            checks.push(Check::measured("moments A+B, B f(1/conj b)^k", consistency, 1e-10));
            if moments.get(1).norm() > 1e-10 {
                let gp = (2..=5)
                    .map(|k| {
                        let lhs = moments.get(k + 1) * moments.get(k - 1);
                        let rhs = moments.get(k) * moments.get(k);
                        (lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max);
                checks.push(Check::measured("geometric progression", gp, 1e-10));
            } else {
                checks.push(Check::skipped("geometric progression"));
            }
            checks.push(Check::skipped("subcase moment pattern"));
        }
        Family::Subcase1 { m0, b1 } => {
            let AnalyticMap::ExampleAbc(m) = map else {
                unreachable!()
            };
            let (wa, _) = example_abc_weights(&m);
            checks.push(Check::measured("M0 = 2A", (moments.m0 - 2.0 * wa.re).abs(), 1e-10));
            let tail = (1..=6).map(|k| moments.get(k).norm()).fold(0.0, f64::max);
            checks.push(Check::measured("M1..M6 vanish", tail, 1e-10));
            let curve = BoundaryCurve::of_map(&map, &grid);
            let radius = (m0 / 2.0).sqrt();
            let mut worst = 0.0_f64;
            let mut ok = true;
            for (r, th) in [(0.05, 0.3), (0.3, 1.7), (0.6, -2.2), (0.9, 0.9)] {
                match winding_number(&curve, Complex64::from_polar(r * radius, th), tol) {
                    Ok(w) => {
                        ok &= w.index == 2;
                        worst = worst.max(w.residual);
                    }
                    Err(_) => ok = false,
                }
            }
            checks.push(Check::measured(
                "winding number 2 inside",
                if ok { worst } else { f64::INFINITY },
                1e-6,
            ));
            push_result(
                &mut checks,
                "(M0, B1) round trip",
                subcase_parameters(&map, tol)
                    .map(|(m, b)| Check::measured("(M0, B1) round trip", (m - m0).abs().max((b - b1).norm()), 1e-10)),
            );
        }
        Family::Subcase2 { m0, b1 } => {
            let tail = (1..=6).map(|k| moments.get(k).norm()).fold(0.0, f64::max);
            checks.push(Check::measured("M1..M6 vanish", tail, 1e-10));
            push_result(
                &mut checks,
                "one-point weight A = M0",
                quadrature_coeffs(&map, tol).map(|q| match q {
                    QuadratureData::OnePoint { c } => {
                        let extra = c.iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max);
                        Check::measured("one-point weight A = M0", (c[0].re - m0).abs().max(extra), 1e-10)
                    }
                    _ => Check::failed("one-point weight A = M0"),
                }),
            );
            let tests = [
                TestFunction::Monomial(0),
                TestFunction::Monomial(1),
                TestFunction::Monomial(2),
            ];
            let data = QuadratureData::OnePoint {
                c: vec![Complex64::new(*m0, 0.0)],
            };
            push_result(
                &mut checks,
                "quadrature identity g = 1, z, z^2",
                quadrature_check(&map, &data, &tests, &AreaResolution::default()).map(|rs| {
                    let worst = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
                    Check::measured("quadrature identity g = 1, z, z^2", worst, 1e-6)
                }),
            );
            push_result(
                &mut checks,
                "(M0, B1) round trip",
                subcase_parameters(&map, tol)
                    .map(|(m, b)| Check::measured("(M0, B1) round trip", (m - m0).abs().max((b - b1).norm()), 1e-10)),
            );
            let omega = subcase2_omega(*m0, *b1);
            let second = Complex64::new(2.0, 0.0) / omega.conj() - omega;
            let zero_gap = df.eval_unchecked(omega).norm().max(df.eval_unchecked(second).norm());
            checks.push(Check::measured("f' zeros at w1 and 2/conj(w1) - w1", zero_gap, 1e-10));
        }
        _ => {
            checks.push(Check::skipped("subcase moment pattern"));
        }
    }

    Ok(ScenarioReport {
        family: family.name().into(),
        checks,
    })
}
