//! The 2-d oscillator `H = p²/2m + m(ωx²x² + ωy²y²)/2 + iλxy` (ωx ≠ ωy):
//! derived constants, closed-form energies and λ-derivatives, left/right
//! eigenfunction evaluators, and the integral-form HFT computed by tensor
//! Gauss–Legendre quadrature with doubling-based convergence certificates.

use super::{hermite, ContinuumError};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cre, from_f64, C, Scalar};

/// Which side of the critical coupling the parameters sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscPhase {
    /// `|λ| < λ_c`: k real ≥ 1, C₁ and C₂ real positive.
    Unbroken,
    /// `|λ| > λ_c`: k imaginary, C₁ = conj(C₂) = A - iB.
    Broken,
}

/// Derived constants of the model at one coupling.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorParams<T: Scalar> {
    pub omega_x: T,
    pub omega_y: T,
    pub mass: T,
    pub hbar: T,
    pub lambda: T,
    pub omega_plus_sq: T,
    pub omega_minus_sq: T,
    pub lambda_c: T,
    pub phase: OscPhase,
    /// `1/k = sqrt(1 - λ²/λ_c²)` continued with the principal root.
    pub k: C<T>,
    pub c1: C<T>,
    pub c2: C<T>,
    pub alpha1: C<T>,
    pub alpha2: C<T>,
    /// Broken phase only: C₂ = A + iB with A, B > 0.
    pub a: Option<T>,
    pub b: Option<T>,
    /// sign(λ); the coordinate mixing `sqrt((k²-1)) = k λ/λ_c` fixes the
    /// rotation orientation to the sign of the coupling.
    pub sign: T,
}

/// Exclusion radius around the critical coupling.
pub const CRITICAL_EXCLUSION: f64 = 1e-3;

/// Populate all derived constants, choosing the phase-consistent branch of
/// every square root (continuity from λ=0 via the principal root).
pub fn derive_params<T: Scalar>(
    omega_x: T,
    omega_y: T,
    mass: T,
    hbar: T,
    lambda: T,
) -> Result<OscillatorParams<T>, ContinuumError> {
    if omega_x <= T::zero() || omega_y <= T::zero() || mass <= T::zero() || hbar <= T::zero() {
        return Err(ContinuumError::InvalidInput("frequencies, mass and hbar must be positive".into()));
    }
    if omega_x == omega_y {
        return Err(ContinuumError::InvalidInput("omega_x must differ from omega_y".into()));
    }
    let omega_plus_sq = omega_y * omega_y + omega_x * omega_x;
    let omega_minus_sq = omega_y * omega_y - omega_x * omega_x;
    let lambda_c = (mass * omega_minus_sq / from_f64::<T>(2.0)).abs();
    if (lambda.abs() - lambda_c).abs() < from_f64(CRITICAL_EXCLUSION) {
        return Err(ContinuumError::AtCritical {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
            critical: lambda_c.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = lambda / lambda_c;
    let inv_k = cre(T::one() - ratio * ratio).sqrt(); // i·t in the broken phase
    let k = cre(T::one()) / inv_k;
    let half = from_f64::<T>(0.5);
    let c1 = (cre(omega_plus_sq) - cre(omega_minus_sq) * inv_k).scale(half).sqrt();
    let c2 = (cre(omega_plus_sq) + cre(omega_minus_sq) * inv_k).scale(half).sqrt();
    let alpha1 = (c1.scale(mass / hbar)).sqrt();
    let alpha2 = (c2.scale(mass / hbar)).sqrt();
    let phase = if lambda.abs() < lambda_c { OscPhase::Unbroken } else { OscPhase::Broken };
    let (a, b) = match phase {
        OscPhase::Unbroken => (None, None),
        OscPhase::Broken => (Some(c2.re), Some(c2.im)),
    };
    let sign = if lambda >= T::zero() { T::one() } else { -T::one() };
    Ok(OscillatorParams {
        omega_x,
        omega_y,
        mass,
        hbar,
        lambda,
        omega_plus_sq,
        omega_minus_sq,
        lambda_c,
        phase,
        k,
        c1,
        c2,
        alpha1,
        alpha2,
        a,
        b,
        sign,
    })
}

/// A quantum state `(n₁, n₂)` of the oscillator at fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct OscState<T: Scalar> {
    pub n1: usize,
    pub n2: usize,
    pub params: OscillatorParams<T>,
}

impl<T: Scalar> OscState<T> {
    pub fn new(n1: usize, n2: usize, params: OscillatorParams<T>) -> Self {
        Self { n1, n2, params }
    }

    /// `E = (n₁+½)ħC₁ + (n₂+½)ħC₂`; real iff n₁=n₂ or the phase is unbroken.
    pub fn energy(&self) -> C<T> {
        let p = &self.params;
        let half = from_f64::<T>(0.5);
        p.c1.scale((from_f64::<T>(self.n1 as f64) + half) * p.hbar)
            + p.c2.scale((from_f64::<T>(self.n2 as f64) + half) * p.hbar)
    }

    /// Analytic `dE/dλ` through the chain rule `C₁'(λ) = ω₋²λ k/(4λ_c²C₁)`
    /// (and the sign-flipped counterpart for C₂), continued across the
    /// critical coupling by the principal root.
    pub fn d_energy(&self) -> C<T> {
        let p = &self.params;
        let half = from_f64::<T>(0.5);
        let four = from_f64::<T>(4.0);
        let inv_k = cre(T::one()) / p.k;
        let common = cre(p.omega_minus_sq * p.lambda / (four * p.lambda_c * p.lambda_c)) / inv_k;
        let dc1 = common / p.c1;
        let dc2 = -common / p.c2;
        dc1.scale((from_f64::<T>(self.n1 as f64) + half) * p.hbar)
            + dc2.scale((from_f64::<T>(self.n2 as f64) + half) * p.hbar)
    }

    /// Callable left/right eigenfunction evaluators (unnormalized; the
    /// overall constant cancels in the HFT ratio).
    pub fn eigenfunctions(&self) -> Wavefunctions<T> {
        Wavefunctions { state: *self }
    }
}

/// Unnormalized eigenfunction evaluators in the rotated complex coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Wavefunctions<T: Scalar> {
    state: OscState<T>,
}

impl<T: Scalar> Wavefunctions<T> {
    /// Coordinate mixing weights `sqrt((k±1)/2)`; the cross weight carries
    /// sign(λ) so that `sqrt(k²-1) = kλ/λ_c` holds for either sign.
    fn mixing(&self) -> (C<T>, C<T>) {
        let p = &self.state.params;
        let half = from_f64::<T>(0.5);
        let sp = ((p.k + cre(T::one())).scale(half)).sqrt();
        let sm = ((p.k - cre(T::one())).scale(half)).sqrt().scale(p.sign);
        (sp, sm)
    }

    /// Right eigenfunction
    /// `R = exp(-(m/2ħ)(C₁X² + C₂Y²)) H_{n₁}(α₁X) H_{n₂}(α₂Y)` with
    /// `X = sp·x - i·sm·y`, `Y = i·sm·x + sp·y`.
    pub fn right(&self, x: T, y: T) -> C<T> {
        let p = &self.state.params;
        let (sp, sm) = self.mixing();
        let i = C::new(T::zero(), T::one());
        let xr = sp.scale(x) - i * sm.scale(y);
        let yr = i * sm.scale(x) + sp.scale(y);
        let scale = p.mass / (from_f64::<T>(2.0) * p.hbar);
        let gauss = (-(p.c1 * xr * xr + p.c2 * yr * yr).scale(scale)).exp();
        gauss * hermite(self.state.n1, p.alpha1 * xr) * hermite(self.state.n2, p.alpha2 * yr)
    }

    /// Left eigenfunction with the phase-appropriate starred quantities: in
    /// the unbroken phase the starred coordinates are the conjugated
    /// rotation; in the broken phase `k* = -k`, `C₁* = C₂`, `α₁* = α₂` and
    /// the rotation axes swap roles.
    pub fn left(&self, x: T, y: T) -> C<T> {
        let p = &self.state.params;
        let (sp, sm) = self.mixing();
        let i = C::new(T::zero(), T::one());
        let scale = p.mass / (from_f64::<T>(2.0) * p.hbar);
        match p.phase {
            OscPhase::Unbroken => {
                let xs = sp.scale(x) + i * sm.scale(y);
                let ys = -(i * sm.scale(x)) + sp.scale(y);
                let gauss = (-(p.c1 * xs * xs + p.c2 * ys * ys).scale(scale)).exp();
                gauss * hermite(self.state.n1, p.alpha1 * xs)
                    * hermite(self.state.n2, p.alpha2 * ys)
            }
            OscPhase::Broken => {
                let xs = i * sm.scale(x) - sp.scale(y);
                let ys = sp.scale(x) + i * sm.scale(y);
                let gauss = (-(p.c2 * xs * xs + p.c1 * ys * ys).scale(scale)).exp();
                gauss * hermite(self.state.n1, p.alpha2 * xs)
                    * hermite(self.state.n2, p.alpha1 * ys)
            }
        }
    }

    /// Quadratic-form coefficients (xx, yy, xy) of the exponent of
    /// `conj(L)·R`, the decaying part of the HFT integrand.
    fn integrand_exponent(&self) -> (C<T>, C<T>, C<T>) {
        let p = &self.state.params;
        let (sp, sm) = self.mixing();
        let i = C::new(T::zero(), T::one());
        let scale = p.mass / (from_f64::<T>(2.0) * p.hbar);
        let two = from_f64::<T>(2.0);
        // right: C₁X² + C₂Y²
        let r_xx = p.c1 * sp * sp - p.c2 * sm * sm;
        let r_yy = p.c2 * sp * sp - p.c1 * sm * sm;
        let r_xy = (p.c2 - p.c1) * i * sp * sm.scale(two);
        // left form before conjugation
        let (l_xx, l_yy, l_xy) = match p.phase {
            OscPhase::Unbroken => {
                let xx = p.c1 * sp * sp - p.c2 * sm * sm;
                let yy = p.c2 * sp * sp - p.c1 * sm * sm;
                let xy = (p.c1 - p.c2) * i * sp * sm.scale(two);
                (xx, yy, xy)
            }
            OscPhase::Broken => {
                // X* = i·sm·x - sp·y, Y* = sp·x + i·sm·y with C₂X*² + C₁Y*²
                let xx = -(p.c2 * sm * sm) + p.c1 * sp * sp;
                let yy = p.c2 * sp * sp - p.c1 * sm * sm;
                let xy = (p.c1 - p.c2) * i * sp * sm.scale(two);
                (xx, yy, xy)
            }
        };
        let q_xx = (l_xx.conj() + r_xx).scale(scale);
        let q_yy = (l_yy.conj() + r_yy).scale(scale);
        let q_xy = (l_xy.conj() + r_xy).scale(scale);
        (q_xx, q_yy, q_xy)
    }
}

/// Tensor-product Gauss–Legendre specification on `[-R, R]²`.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec<T: Scalar> {
    /// Nodes per axis of the base rule (the certificate doubles this).
    pub points_per_axis: usize,
    /// Box cutoff factor: `R = box_scale / sqrt(min eig of the Re form)`.
    pub box_scale: T,
    /// Relative convergence tolerance under refinement.
    pub tol: T,
    /// How many node-count doublings may chase the tolerance.
    pub max_refinements: usize,
}

impl<T: Scalar> Default for QuadSpec<T> {
    fn default() -> Self {
        Self { points_per_axis: 64, box_scale: from_f64(8.0), tol: from_f64(1e-9), max_refinements: 3 }
    }
}

/// Convergence certificate attached to a quadrature result.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T: Scalar> {
    pub value: C<T>,
    pub points_per_axis: usize,
    pub cutoff: T,
    /// Relative change when the node count per axis doubles.
    pub delta_points: T,
    /// Relative change when the box is doubled as well.
    pub delta_cutoff: T,
    pub converged: bool,
}

/// Integral-form HFT LHS
/// `∫ conj(L)(i x y)(R) dxdy / ∫ conj(L)(R) dxdy`
/// over the truncated box, with the convergence certificate from doubling
/// both the rule and the box.
pub fn hft_lhs_quadrature<T: Scalar>(
    state: &OscState<T>,
    quad: &QuadSpec<T>,
) -> Result<QuadResult<T>, ContinuumError> {
    let wf = state.eigenfunctions();
    let (q_xx, q_yy, q_xy) = wf.integrand_exponent();
    // real part of the decay form must be positive definite
    let (exx, eyy, exy) = (q_xx.re, q_yy.re, q_xy.re);
    let half_tr = (exx + eyy) * from_f64(0.5);
    let disc = ((exx - eyy) * from_f64::<T>(0.5)).powi(2) + (exy * from_f64::<T>(0.5)).powi(2);
    let min_eig = half_tr - disc.sqrt();
    if min_eig <= T::zero() {
        return Err(ContinuumError::NonDecayingIntegrand {
            min_eigenvalue: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    let cutoff = quad.box_scale / min_eig.sqrt();

    // escalate the rule until doubling the node count stops moving the
    // ratio, then double the box (node density preserved) to certify the
    // truncation
    let mut n = quad.points_per_axis.max(8);
    let mut coarse = ratio_on_box(&wf, n, cutoff);
    let mut fine = ratio_on_box(&wf, 2 * n, cutoff);
    let mut delta_points = (fine - coarse).norm() / T::one().max(fine.norm());
    let mut refinements = 0;
    while delta_points > quad.tol && refinements < quad.max_refinements {
        n *= 2;
        coarse = fine;
        fine = ratio_on_box(&wf, 2 * n, cutoff);
        delta_points = (fine - coarse).norm() / T::one().max(fine.norm());
        refinements += 1;
    }
    let wide = ratio_on_box(&wf, 4 * n, cutoff * from_f64(2.0));
    let delta_cutoff = (wide - fine).norm() / T::one().max(wide.norm());
    let converged = delta_points <= quad.tol && delta_cutoff <= quad.tol;
    let result = QuadResult {
        value: wide,
        points_per_axis: 2 * n,
        cutoff,
        delta_points,
        delta_cutoff,
        converged,
    };
    if !converged {
        return Err(ContinuumError::NotConverged {
            best_re: wide.re.to_f64().unwrap_or(f64::NAN),
            best_im: wide.im.to_f64().unwrap_or(f64::NAN),
            error_bar: delta_points.max(delta_cutoff).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(result)
}

/// Numerator and denominator on one tensor rule; summation order is the
/// fixed row-major node order, so results are bit-reproducible.
fn ratio_on_box<T: Scalar>(wf: &Wavefunctions<T>, n: usize, cutoff: T) -> C<T> {
    let rule = GaussLegendre::<T>::new(n);
    let nodes: Vec<(T, T)> = rule.scaled(cutoff).collect();
    let i = C::new(T::zero(), T::one());
    let mut num = C::new(T::zero(), T::zero());
    let mut den = C::new(T::zero(), T::zero());
    for &(x, wx) in &nodes {
        for &(y, wy) in &nodes {
            let w = wx * wy;
            let f = wf.left(x, y).conj() * wf.right(x, y);
            den = den + f.scale(w);
            num = num + (i * f).scale(w * x * y);
        }
    }
    num / den
}
