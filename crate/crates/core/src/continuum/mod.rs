//! Exact continuum results: the 2-d oscillator with imaginary `iλxy`
//! coupling (closed-form spectrum, left/right eigenfunctions, integral-form
//! HFT via tensor Gauss–Legendre quadrature) and the 1-d oscillator with
//! complex frequency (ladder-algebra HFT and the trapping-energy/virial
//! relation).

mod oscillator1d;
mod oscillator2d;

pub use oscillator1d::{oscillator1d_hft, virial_check, DriveParam, HftPair, VirialReport};
pub use oscillator2d::{
    derive_params, hft_lhs_quadrature, OscPhase, OscState, OscillatorParams, QuadResult, QuadSpec,
    Wavefunctions,
};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ContinuumError {
    /// λ within the exclusion radius of the critical coupling (k diverges).
    #[error("coupling {lambda} within exclusion radius of critical coupling {critical}")]
    AtCritical { lambda: f64, critical: f64 },
    /// The real part of the Gaussian exponent is not positive definite.
    #[error("integrand does not decay: min Re-form eigenvalue {min_eigenvalue:e}")]
    NonDecayingIntegrand { min_eigenvalue: f64 },
    /// Refinement did not settle within the requested tolerance.
    #[error("quadrature not converged: best estimate {best_re}+{best_im}i, error bar {error_bar:e}")]
    NotConverged { best_re: f64, best_im: f64, error_bar: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Complex Hermite polynomial `H_n(z)` by the forward three-term recurrence
/// `H_{n+1}(z) = 2 z H_n(z) - 2 n H_{n-1}(z)`.
pub fn hermite<T: crate::scalar::Scalar>(
    n: usize,
    z: crate::scalar::C<T>,
) -> crate::scalar::C<T> {
    use crate::scalar::{cone, from_f64};
    let mut prev = cone::<T>();
    if n == 0 {
        return prev;
    }
    let two = from_f64::<T>(2.0);
    let mut cur = z * two;
    for k in 1..n {
        let next = z * cur * two - prev * from_f64::<T>(2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}
