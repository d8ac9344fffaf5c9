use num_complex::Complex64;
use thiserror::Error;

use crate::core_functions::PoleDatum;

#[derive(Debug, Clone, Error)]
pub enum QiError {
    #[error("Gamma pole at {0}")]
    GammaPole(Complex64),
    #[error("pole at {} of order {}", .0.location, .0.order)]
    Pole(PoleDatum),
    #[error("evaluation at the point at infinity (argument {0})")]
    PointAtInfinity(Complex64),
    #[error("pole of the transported symbol at disk point {disk} (half-plane {plane})")]
    DiskPole { disk: Complex64, plane: Complex64 },
    #[error("index {k} outside the resolvable range (limit {limit})")]
    OutOfRange { k: i64, limit: i64 },
    #[error("coefficient stream lacks index {0}")]
    InsufficientRange(i64),
    #[error("series did not converge: tail estimate {tail:e} exceeds {tol:e}")]
    NonConvergence { tail: f64, tol: f64 },
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, QiError>;
