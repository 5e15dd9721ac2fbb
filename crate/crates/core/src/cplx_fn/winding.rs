//! Winding numbers of a sampled closed curve.
//!
//! The curve is `theta -> z(theta)` sampled uniformly together with its
//! derivative, so the index integral `(1/2 pi i) \oint dz / (z - w)` becomes
//! a periodic trapezoidal sum and converges spectrally.

use num_complex::Complex64;

use super::grid::CircleGrid;
use super::maps::AnalyticMap;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Image of the unit circle under a map: points `f(z_k)` and `dz/dtheta = i z_k f'(z_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub points: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
}

impl BoundaryCurve {
    pub fn of_map(map: &AnalyticMap, grid: &CircleGrid) -> Self {
        let f = map.to_rational();
        let df = map.derivative();
        let i = Complex64::i();
        Self {
            points: grid.sample(|z| f.eval_unchecked(z)),
            velocity: grid.sample(|z| i * z * df.eval_unchecked(z)),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub index: i64,
    /// Distance of the discrete integral from `index` before rounding.
    pub residual: f64,
}

pub fn winding_number(curve: &BoundaryCurve, w: Complex64, tol: &Tolerances) -> Result<Winding> {
    if curve.is_empty() {
        return Err(Error::Parameter("empty boundary curve".into()));
    }
    let distance = curve
        .points
        .iter()
        .map(|p| (p - w).norm())
        .fold(f64::INFINITY, f64::min);
    if distance < tol.curve_proximity {
        return Err(Error::PointOnCurve { z: w, distance });
    }
    let sum: Complex64 = curve
        .points
        .iter()
        .zip(&curve.velocity)
        .map(|(&p, &v)| v / (p - w))
        .sum();
    let raw = sum / (curve.len() as f64 * Complex64::i());
    let index = raw.re.round();
    let residual = (raw - index).norm();
    if residual > tol.winding_residual {
        return Err(Error::UnderResolved { residual });
    }
    Ok(Winding {
        index: index as i64,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx_fn::maps::PolynomialMap;

    fn unit_circle() -> BoundaryCurve {
        let grid = CircleGrid::new(64).unwrap();
        BoundaryCurve::of_map(&PolynomialMap::disk(1.0).unwrap().into(), &grid)
    }

    #[test]
    fn unit_circle_indices() {
        let tol = Tolerances::default();
        let c = unit_circle();
        assert_eq!(winding_number(&c, Complex64::new(0.0, 0.0), &tol).unwrap().index, 1);
        assert_eq!(winding_number(&c, Complex64::new(3.0, 0.0), &tol).unwrap().index, 0);
        assert!(winding_number(&c, Complex64::new(0.0, 0.0), &tol).unwrap().residual < 1e-14);
    }

    #[test]
    fn point_on_curve_rejected() {
        let tol = Tolerances::default();
        assert!(matches!(
            winding_number(&unit_circle(), Complex64::new(1.0, 0.0), &tol),
            Err(Error::PointOnCurve { .. })
        ));
    }

    #[test]
    fn double_cover() {
        // z^2 traverses the circle twice
        let grid = CircleGrid::new(64).unwrap();
        let i = Complex64::i();
        let curve = BoundaryCurve {
            points: grid.sample(|z| z * z),
            velocity: grid.sample(|z| 2.0 * i * z * z),
        };
        let w = winding_number(&curve, Complex64::new(0.01, 0.0), &Tolerances::default()).unwrap();
        assert_eq!(w.index, 2);
    }

    #[test]
    fn coarse_grid_near_curve_is_under_resolved() {
        let grid = CircleGrid::new(4).unwrap();
        let c = BoundaryCurve::of_map(&PolynomialMap::disk(1.0).unwrap().into(), &grid);
        let r = winding_number(&c, Complex64::new(0.95, 0.0), &Tolerances::default());
        assert!(matches!(r, Err(Error::UnderResolved { .. })));
    }
}
