//! Shared numerical kernels: sine integral, adaptive quadrature, discrete
//! Fourier transforms with an ideal low-pass mask, and dense linear algebra
//! with a truncated pseudoinverse.

mod fft;
mod matrix;
mod quad;
mod si;

pub use fft::{spectral_mask, SpectralMask};
pub use matrix::{pinv_truncated, svd_jacobi, DenseMatrix, PseudoInverse, Svd};
pub use quad::quad_adaptive;
pub use si::{si, si_antiderivative};

/// Errors from the numerical kernels.
#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("tolerance or parameter out of range")]
    BadTolerance,
    #[error("quadrature budget exhausted (best estimate {achieved})")]
    QuadratureBudget { achieved: f64 },
    #[error("integrand not finite at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("grid cannot represent bandwidth: Nyquist {nyquist} <= omega {omega}")]
    GridCannotRepresentBandwidth { nyquist: f64, omega: f64 },
    #[error("grid too short: {len} points")]
    GridTooShort { len: usize },
}
