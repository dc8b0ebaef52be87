use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("contour radius {radius} reaches the nearest singularity at distance {zeta0}")]
    ContourHitsSingularity { radius: f64, zeta0: f64 },

    /// Adaptive quadrature gave up; `value` is the best estimate reached.
    #[error("quadrature did not converge: value {value}, error estimate {abs_error:e} after {evaluations} evaluations")]
    QuadratureFailure {
        value: Complex64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("pole at {location} lies on the contour")]
    PoleOnContour { location: Complex64 },

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("integral is absolutely convergent; no finite part to take")]
    NotDivergent,

    #[error("branch exponent nu = {nu} is too close to 0 or 1")]
    DegenerateBranch { nu: f64 },

    #[error("expansion hypotheses violated: {0}")]
    ExpansionInvalid(String),

    #[error("integral diverges at infinity: {0}")]
    TailDivergent(String),

    #[error("gamma function has a pole at {x}")]
    GammaPole { x: f64 },

    #[error("contour result has imaginary residue {imag:e} (value {real})")]
    NonRealResult { real: f64, imag: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
