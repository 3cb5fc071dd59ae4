//! The 1-d oscillator `H = p²/2 + Ω²x²/2` with complex frequency
//! `Ω = ω₁ + iω₂` (not PT invariant). Matrix elements are evaluated through
//! the ladder algebra `x = (a† + a)/sqrt(2Ω)`, `a|n> = sqrt(n)|n-1>`; the
//! left basis is the dual Fock basis, so `<n̄|f(a,a†)|n>` reduces to the
//! Hermitian matrix element with complex Ω.

use super::ContinuumError;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cre, from_f64, C, Scalar};

/// Which parameter the HFT differentiates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveParam {
    /// λ = ω₁: `∂H/∂ω₁ = Ω x²`, `∂E_n/∂ω₁ = n + ½`.
    Omega1,
    /// λ = ω₂: `∂H/∂ω₂ = iΩ x²`, `∂E_n/∂ω₂ = i(n + ½)`.
    Omega2,
    /// λ = Ω: `∂H/∂Ω = Ω x²`, `∂E_n/∂Ω = n + ½`.
    Omega,
}

/// Both sides of the modified HFT.
#[derive(Debug, Clone, Copy)]
pub struct HftPair<T: Scalar> {
    pub lhs: C<T>,
    pub rhs: C<T>,
}

/// `<n̄|x²|n>` by explicit ladder matrices in a truncated Fock space:
/// `(a† + a)²` has diagonal entry `2n+1`, so the element is `(2n+1)/(2Ω)`.
fn x_squared_diagonal<T: Scalar>(n: usize, omega: C<T>) -> C<T> {
    let dim = n + 3;
    // (a + a†) as a real matrix
    let mut ladder = vec![vec![T::zero(); dim]; dim];
    for m in 1..dim {
        let amp = from_f64::<T>(m as f64).sqrt();
        ladder[m - 1][m] = amp; // a
        ladder[m][m - 1] = amp; // a†
    }
    // diagonal element n of (a + a†)²
    let mut acc = T::zero();
    for k in 0..dim {
        acc = acc + ladder[n][k] * ladder[k][n];
    }
    cre(acc) / (omega.scale(from_f64(2.0)))
}

/// Modified HFT for the n-th state and one of the three parameter choices.
/// Both sides are returned; they agree identically by the ladder algebra.
pub fn oscillator1d_hft<T: Scalar>(
    n: usize,
    omega: C<T>,
    which: DriveParam,
) -> Result<HftPair<T>, ContinuumError> {
    if omega.re <= T::zero() {
        return Err(ContinuumError::InvalidInput(
            "Re Ω = ω₁ must be positive for normalizable states".into(),
        ));
    }
    let x2 = x_squared_diagonal(n, omega);
    let half = from_f64::<T>(0.5);
    let n_half = cre(from_f64::<T>(n as f64) + half);
    let i = C::new(T::zero(), T::one());
    let (lhs, rhs) = match which {
        DriveParam::Omega1 => (omega * x2, n_half),
        DriveParam::Omega2 => (i * omega * x2, i * n_half),
        DriveParam::Omega => (omega * x2, n_half),
    };
    Ok(HftPair { lhs, rhs })
}

/// Trapping-energy check: `E_tr = ½<Ω²x²>_G` against `E_n = (n+½)Ω`.
#[derive(Debug, Clone, Copy)]
pub struct VirialReport<T: Scalar> {
    pub trapping_energy: C<T>,
    pub energy: C<T>,
    /// `E_tr / E_n`; equals ½ for every n and every Ω with Re Ω > 0.
    pub ratio: C<T>,
    /// Ground state only: the same trapping energy from 1-d quadrature of
    /// the explicit left/right Gaussians.
    pub quadrature_trapping_energy: Option<C<T>>,
}

/// Evaluate the trapping energy by ladder algebra and, for the ground
/// state, cross-check by quadrature of `∫ e^{-Ωx²} ½Ω²x² dx / ∫ e^{-Ωx²} dx`.
pub fn virial_check<T: Scalar>(n: usize, omega: C<T>) -> Result<VirialReport<T>, ContinuumError> {
    if omega.re <= T::zero() {
        return Err(ContinuumError::InvalidInput(
            "Re Ω = ω₁ must be positive for normalizable states".into(),
        ));
    }
    let half = from_f64::<T>(0.5);
    let x2 = x_squared_diagonal(n, omega);
    let trapping_energy = (omega * omega * x2).scale(half);
    let energy = omega.scale(from_f64::<T>(n as f64) + half);
    let ratio = trapping_energy / energy;
    let quadrature_trapping_energy = if n == 0 { Some(ground_state_quadrature(omega)) } else { None };
    Ok(VirialReport { trapping_energy, energy, ratio, quadrature_trapping_energy })
}

/// `∫ e^{-Ωx²} ½Ω²x² dx / ∫ e^{-Ωx²} dx` on a truncated interval; the
/// integrand decays like `e^{-ω₁x²}`.
fn ground_state_quadrature<T: Scalar>(omega: C<T>) -> C<T> {
    let cutoff = from_f64::<T>(8.0) / omega.re.sqrt();
    let rule = GaussLegendre::<T>::new(200);
    let half = from_f64::<T>(0.5);
    let mut num = C::new(T::zero(), T::zero());
    let mut den = C::new(T::zero(), T::zero());
    for (x, w) in rule.scaled(cutoff) {
        let f = (-omega.scale(x * x)).exp();
        den = den + f.scale(w);
        num = num + (omega * omega * f).scale(w * half * x * x);
    }
    num / den
}
