//! Numerical thresholds shared by every module.
//!
//! The defaults are the values the test-suite is pinned against. A scenario
//! file may override any of them in its `[tolerances]` table.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Minimum distance between an evaluation point and a pole.
    pub pole_proximity: f64,
    /// Minimum distance between a winding-number query point and the curve.
    pub curve_proximity: f64,
    /// Largest acceptable distance of a discrete winding integral from an integer.
    pub winding_residual: f64,
    /// Singularities closer than this to |z| = 1 are rejected.
    pub boundary_singularity: f64,
    /// Zeros of f' closer than this to |z| = 1 are rejected.
    pub boundary_zero: f64,
    /// |f''(w)| below this marks a zero of f' as multiple.
    pub simple_zero: f64,
    /// Smallest/largest singular value of U below this is a degenerate system.
    pub singular_ratio: f64,
    /// |Im a0| below this is rounding and is zeroed after a step.
    pub normalization: f64,
    /// min |f'| on the circle below this is a cusp.
    pub cusp: f64,
    /// Relative energy allowed in the top quarter of a truncated series.
    pub tail_energy: f64,
    /// |f'(p)| below this (relative) counts as cancelling a pole of f* at p.
    pub cancellation: f64,
    /// Quadrature coefficients below this (relative) are treated as zero.
    pub coefficient_zero: f64,
    /// Nodes used by contour-quadrature residues.
    pub residue_nodes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole_proximity: 1e-12,
            curve_proximity: 1e-9,
            winding_residual: 0.1,
            boundary_singularity: 1e-9,
            boundary_zero: 1e-6,
            simple_zero: 1e-8,
            singular_ratio: 1e-10,
            normalization: 1e-13,
            cusp: 1e-6,
            tail_energy: 1e-10,
            cancellation: 1e-9,
            coefficient_zero: 1e-12,
            residue_nodes: 256,
        }
    }
}
