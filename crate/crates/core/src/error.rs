use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("point {z} lies within {distance:e} of a pole at {pole}")]
    PoleProximity {
        z: Complex64,
        pole: Complex64,
        distance: f64,
    },

    #[error("polynomial has degree zero; no roots to find")]
    DegreeZero,

    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,

    #[error("point {z} is within {distance:e} of the sampled curve")]
    PointOnCurve { z: Complex64, distance: f64 },

    #[error("winding number under-resolved: rounding residual {residual:e}")]
    UnderResolved { residual: f64 },

    #[error("contour around {center} collides with a singularity (radius {radius:e})")]
    ContourCollision { center: Complex64, radius: f64 },

    #[error("singularity at {at} lies on or near the unit circle")]
    BoundarySingularity { at: Complex64 },

    #[error("area quadrature not converged: refinement difference {estimate:e} > {tolerance:e}")]
    NonConvergent { estimate: f64, tolerance: f64 },

    #[error("f* has a pole at {at} that f' does not cancel (|f'| = {residual:e}); use the two-point identity")]
    UncancelledPole { at: Complex64, residual: f64 },

    #[error("a0 must be real and positive, got {0}")]
    NonPositiveLeading(Complex64),

    #[error("resultant undefined: {0}")]
    ResultantUndefined(String),

    #[error(
        "string equation degenerate: Res(f', f'*) = {resultant}, singular value ratio {ratio:e} \
         (f' and f'* share a zero; the string equation cannot hold)"
    )]
    Degenerate { resultant: Complex64, ratio: f64 },

    #[error("normalization violated: Im a0 = {0:e}")]
    Normalization(f64),

    #[error("zero of f' at {at} is not simple (|f''| = {second:e})")]
    MultipleZero { at: Complex64, second: f64 },

    #[error("zero of f' at {at} lies within {distance:e} of the unit circle")]
    ZeroNearBoundary { at: Complex64, distance: f64 },

    #[error("cusp: min |f'| on the unit circle is {min:e}")]
    Cusp { min: f64 },

    #[error("series tail energy ratio {ratio:e} exceeds {threshold:e}; increase the truncation order")]
    TruncationTail { ratio: f64, threshold: f64 },

    #[error("branch point pre-image {at} left the unit disk")]
    BranchPointEscaped { at: Complex64 },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
