//! Numerical companion for quasi-inner functions built from ratios of local L-factors.
//!
//! Conventions used throughout:
//! * `k` indexes Fourier coefficients of e^{ikθ}; the off-diagonal side is k ≤ -1.
//! * Hankel domain basis is z^j (j ≥ 0), range basis is z^{-j-1} (j ≥ 0).
//! * u₂₂ acts on the range side in the basis z^{-j-1}.

pub mod conformal;
pub mod core_functions;
pub mod diagnostics;
pub mod error;
pub mod fourier;
pub mod operators;
pub mod sonin;
pub mod special;

pub use core_functions::{FactorSpec, Place, PoleDatum};
pub use error::{QiError, Result};
pub use num_complex::Complex64;
