//! Left/right eigenvector pairing, the Hermitian metric operator G, metric
//! expectation values, the good-observable test and phase classification.
//!
//! Conventions: for each non-defective state the stored pair satisfies
//! `<L_i|R_j> = δ_ij` with `||L_i|| = ||R_i||` (norm-balanced split). The
//! balanced split is the one for which `G = Σ|L_i><L_i|` simultaneously
//! equals `[Σ|R_i><R_i|]^{-1}` and reproduces `<L_i| = <R_i| G` row by row;
//! it pins the per-state scale freedom the orthonormality condition leaves
//! open. States whose raw overlap `|<l_i|r_i>|` (unit-norm vectors) falls
//! below the defectivity threshold are flagged and left unnormalized.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    canonicalize_vec, dot_conj, eigendecompose, invert, scale_vec, ComplexMatrix, LinalgError,
};
use crate::scalar::{from_f64, C, Scalar};

#[derive(Debug, Clone, Error)]
pub enum BiorthoError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// Two distinct adjoint eigenvalues compete for the same state.
    #[error("ambiguous left/right pairing for state {state}: candidate distances {best:e} vs {second:e}")]
    AmbiguousPairing { state: usize, best: f64, second: f64 },
    /// Metric construction requested on a spectrum with defective states.
    #[error("spectrum has defective states {0:?}")]
    DefectiveSpectrum(Vec<usize>),
    /// The two G construction routes disagree beyond tolerance.
    #[error("G construction mismatch: ||sum-of-lefts - inv-sum-of-rights|| = {mismatch:e} (allowed {allowed:e})")]
    ConstructionMismatch { mismatch: f64, allowed: f64 },
    /// `<R|G|R>` vanished; the state sits at an exceptional point.
    #[error("metric norm <R|G|R> below threshold ({norm:e})")]
    ZeroNorm { norm: f64 },
}

/// Tolerances for pairing and normalization.
#[derive(Debug, Clone, Copy)]
pub struct BiorthoOptions<T: Scalar> {
    /// Eigensolver residual tolerance (relative to `||H||_F`).
    pub tol: T,
    /// Pairing tolerance on `|E_i - conj(mu)|`, relative to `max(1, ||H||_F)`.
    pub matching_tol: T,
    /// Raw self-overlap below this flags the state defective.
    pub defect_tol: T,
}

impl<T: Scalar> Default for BiorthoOptions<T> {
    fn default() -> Self {
        Self {
            tol: from_f64(1e-12),
            matching_tol: from_f64(1e-6),
            defect_tol: from_f64(1e-8),
        }
    }
}

/// Paired, normalized biorthogonal spectrum.
#[derive(Debug, Clone)]
pub struct BiorthoSpectrum<T: Scalar> {
    pub eigenvalues: Vec<C<T>>,
    /// Right eigenvectors (norm-balanced scaling; unit norm if defective).
    pub rights: Vec<Vec<C<T>>>,
    /// Left eigenvectors, scaled so `<L_i|R_i> = 1` (unit norm if defective).
    pub lefts: Vec<Vec<C<T>>>,
    /// Raw overlaps `<l_i|r_i>` of the unit-norm pair, before rescaling.
    pub self_overlaps: Vec<C<T>>,
    pub defective: Vec<bool>,
    /// Frobenius norm of the source matrix (tolerance scaling).
    pub h_norm: T,
}

impl<T: Scalar> BiorthoSpectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_clean(&self) -> bool {
        self.defective.iter().all(|&d| !d)
    }

    pub fn defective_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.defective[i]).collect()
    }

    /// `||Σ|R_i><L_i| - I||_F` over the non-defective subspace; the full sum
    /// resolves the identity when no state is flagged.
    pub fn completeness_residual(&self) -> T {
        let n = self.dim();
        let mut acc = ComplexMatrix::zeros(n);
        for i in 0..n {
            for r in 0..n {
                for c in 0..n {
                    acc[(r, c)] = acc[(r, c)] + self.rights[i][r] * self.lefts[i][c].conj();
                }
            }
        }
        acc.sub(&ComplexMatrix::identity(n)).norm_fro()
    }

    /// Largest deviation `|<L_i|R_j> - δ_ij|` over non-defective pairs.
    pub fn biorthogonality_residual(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            if self.defective[i] {
                continue;
            }
            for j in 0..n {
                if self.defective[j] {
                    continue;
                }
                let overlap = dot_conj(&self.lefts[i], &self.rights[j]);
                let target = if i == j { C::new(T::one(), T::zero()) } else { C::new(T::zero(), T::zero()) };
                worst = worst.max((overlap - target).norm());
            }
        }
        worst
    }
}

/// Pair right eigenvectors of `h` with left eigenvectors (right eigenvectors
/// of the adjoint at the conjugate eigenvalue), normalize, and record raw
/// overlaps and defectivity flags.
pub fn pair_left_right<T: Scalar>(
    h: &ComplexMatrix<T>,
    opts: &BiorthoOptions<T>,
) -> Result<BiorthoSpectrum<T>, BiorthoError> {
    let right_spec = eigendecompose(h, opts.tol)?;
    let left_spec = eigendecompose(&h.adjoint(), opts.tol)?;
    let n = h.dim();
    let h_norm = h.norm_fro();
    let match_tol = opts.matching_tol * T::one().max(h_norm);

    let mut lefts: Vec<Vec<C<T>>> = vec![Vec::new(); n];
    let mut assigned = vec![false; n];
    for i in 0..n {
        let e = right_spec.eigenvalues[i];
        // distances to conjugated adjoint eigenvalues
        let mut best = (T::infinity(), usize::MAX);
        let mut second = (T::infinity(), usize::MAX);
        for (l, mu) in left_spec.eigenvalues.iter().enumerate() {
            if assigned[l] {
                continue;
            }
            let d = (e - mu.conj()).norm();
            if d < best.0 {
                second = best;
                best = (d, l);
            } else if d < second.0 {
                second = (d, l);
            }
        }
        if best.1 == usize::MAX || best.0 > match_tol {
            return Err(BiorthoError::AmbiguousPairing {
                state: i,
                best: best.0.to_f64().unwrap_or(f64::NAN),
                second: second.0.to_f64().unwrap_or(f64::NAN),
            });
        }
        // contested only between genuinely distinct adjoint eigenvalues;
        // degenerate candidates span the same subspace and either pick works
        if second.1 != usize::MAX && second.0 <= from_f64::<T>(10.0) * best.0 {
            let mu_gap = (left_spec.eigenvalues[best.1] - left_spec.eigenvalues[second.1]).norm();
            if mu_gap > match_tol {
                return Err(BiorthoError::AmbiguousPairing {
                    state: i,
                    best: best.0.to_f64().unwrap_or(f64::NAN),
                    second: second.0.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        assigned[best.1] = true;
        lefts[i] = left_spec.right_vectors[best.1].clone();
    }

    let mut rights = right_spec.right_vectors;
    for v in rights.iter_mut() {
        canonicalize_vec(v);
    }
    for v in lefts.iter_mut() {
        canonicalize_vec(v);
    }

    let mut self_overlaps = Vec::with_capacity(n);
    let mut defective = Vec::with_capacity(n);
    for i in 0..n {
        let s = dot_conj(&lefts[i], &rights[i]);
        defective.push(s.norm() < opts.defect_tol);
        self_overlaps.push(s);
    }

    // norm-balanced rescale: R -> r/sqrt|s|, L -> l*s/|s|^(3/2)
    for i in 0..n {
        if defective[i] {
            continue;
        }
        let s = self_overlaps[i];
        let rt = s.norm().sqrt();
        scale_vec(&mut rights[i], C::new(T::one() / rt, T::zero()));
        scale_vec(&mut lefts[i], s / C::new(s.norm() * rt, T::zero()));
    }

    Ok(BiorthoSpectrum { eigenvalues: right_spec.eigenvalues, rights, lefts, self_overlaps, defective, h_norm })
}

/// How a [`GMetric`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GConstruction {
    SumOfLefts,
    InverseSumOfRights,
}

/// Hermitian metric operator with provenance and conditioning.
#[derive(Debug, Clone)]
pub struct GMetric<T: Scalar> {
    pub matrix: ComplexMatrix<T>,
    pub construction: GConstruction,
    pub condition_estimate: T,
}

/// Build G as `Σ|L_i><L_i|`, cross-check against `[Σ|R_i><R_i|]^{-1}`, and
/// symmetrize. Both routes use the balanced vectors, under which they agree
/// up to rounding.
pub fn build_g_metric<T: Scalar>(
    spec: &BiorthoSpectrum<T>,
    tol: T,
) -> Result<GMetric<T>, BiorthoError> {
    if !spec.is_clean() {
        return Err(BiorthoError::DefectiveSpectrum(spec.defective_indices()));
    }
    let n = spec.dim();
    let mut g_lefts = ComplexMatrix::zeros(n);
    let mut sum_rights = ComplexMatrix::zeros(n);
    for i in 0..n {
        g_lefts.add_outer(&spec.lefts[i], T::one());
        sum_rights.add_outer(&spec.rights[i], T::one());
    }
    let g_inv_route = invert(&sum_rights)?;
    let condition_estimate = g_lefts.norm_fro() * sum_rights.norm_fro();
    let mismatch = g_lefts.sub(&g_inv_route).norm_fro();
    let allowed = tol * condition_estimate * T::one().max(g_lefts.norm_fro());
    if mismatch > allowed {
        return Err(BiorthoError::ConstructionMismatch {
            mismatch: mismatch.to_f64().unwrap_or(f64::NAN),
            allowed: allowed.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = C::new(from_f64::<T>(0.5), T::zero());
    let matrix = g_lefts.add(&g_lefts.adjoint()).scale(half);
    Ok(GMetric { matrix, construction: GConstruction::SumOfLefts, condition_estimate })
}

/// Normalized metric expectation `<R|G O|R> / <R|G|R>`.
pub fn g_expectation<T: Scalar>(
    g: &GMetric<T>,
    observable: &ComplexMatrix<T>,
    state: &[C<T>],
) -> Result<C<T>, BiorthoError> {
    assert_eq!(observable.dim(), g.matrix.dim(), "dimension mismatch");
    assert_eq!(state.len(), g.matrix.dim(), "dimension mismatch");
    let g_r = g.matrix.matvec(state);
    let den = dot_conj(state, &g_r);
    let state_sq = state.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
    let floor = from_f64::<T>(1e4) * T::epsilon() * g.matrix.norm_fro() * state_sq;
    if den.norm() <= floor {
        return Err(BiorthoError::ZeroNorm { norm: den.norm().to_f64().unwrap_or(0.0) });
    }
    let o_r = observable.matvec(state);
    let g_o_r = g.matrix.matvec(&o_r);
    Ok(dot_conj(state, &g_o_r) / den)
}

/// Good-observable test `O^dag G = G O`; returns the verdict and the defect
/// norm `||O^dag G - G O||_F`.
pub fn is_good_observable<T: Scalar>(
    observable: &ComplexMatrix<T>,
    g: &GMetric<T>,
    tol: T,
) -> (bool, T) {
    let lhs = observable.adjoint().matmul(&g.matrix);
    let rhs = g.matrix.matmul(observable);
    let defect = lhs.sub(&rhs).norm_fro();
    let scale = g.matrix.norm_fro() * observable.norm_fro();
    (defect <= tol * scale, defect)
}

/// Spectral phase of a PT-symmetric family at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Unbroken,
    Broken,
    NearEp,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Unbroken => write!(f, "unbroken"),
            Phase::Broken => write!(f, "broken"),
            Phase::NearEp => write!(f, "near-ep"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseReport<T: Scalar> {
    pub phase: Phase,
    /// Largest `|Im E_i|`.
    pub max_imag: T,
    /// Smallest pairwise eigenvalue distance.
    pub min_gap: T,
}

/// Classify the phase. A near-vanishing raw self-overlap wins over the
/// reality test: at an exceptional point the coalescing eigenvalues are
/// real but the spectrum is not diagonalizable.
pub fn phase_classify<T: Scalar>(
    spec: &BiorthoSpectrum<T>,
    reality_tol: T,
    ep_tol: T,
) -> PhaseReport<T> {
    let n = spec.dim();
    let max_imag =
        spec.eigenvalues.iter().map(|e| e.im.abs()).fold(T::zero(), T::max);
    let mut min_gap = T::infinity();
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((spec.eigenvalues[i] - spec.eigenvalues[j]).norm());
        }
    }
    let min_overlap =
        spec.self_overlaps.iter().map(|s| s.norm()).fold(T::infinity(), T::min);
    let phase = if min_overlap < ep_tol {
        Phase::NearEp
    } else if max_imag <= reality_tol {
        Phase::Unbroken
    } else {
        Phase::Broken
    };
    PhaseReport { phase, max_imag, min_gap }
}

/// Default reality tolerance: `1e-9 * ||H||_F`.
pub fn default_reality_tol<T: Scalar>(h_norm: T) -> T {
    from_f64::<T>(1e-9) * h_norm.max(T::one())
}

/// Default exceptional-point overlap tolerance.
pub fn default_ep_tol<T: Scalar>() -> T {
    from_f64(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    type M = ComplexMatrix<f64>;

    fn dimer(lam: f64) -> M {
        M::from_rows(2, &[c64(0.0, lam), c64(-1.0, 0.0), c64(-1.0, 0.0), c64(0.0, -lam)])
    }

    #[test]
    fn hermitian_matrix_lefts_equal_rights_and_g_is_identity() {
        let h = M::from_rows(
            3,
            &[
                c64(1.0, 0.0),
                c64(0.5, 0.2),
                c64(0.0, -0.3),
                c64(0.5, -0.2),
                c64(-0.7, 0.0),
                c64(0.1, 0.0),
                c64(0.0, 0.3),
                c64(0.1, 0.0),
                c64(2.0, 0.0),
            ],
        );
        let spec = pair_left_right(&h, &BiorthoOptions::default()).unwrap();
        assert!(spec.is_clean());
        for i in 0..3 {
            let diff: f64 = spec.lefts[i]
                .iter()
                .zip(&spec.rights[i])
                .map(|(a, b)| (a - b).norm())
                .sum();
            assert!(diff < 1e-10, "left != right for Hermitian input");
        }
        let g = build_g_metric(&spec, 1e-12).unwrap();
        assert!(g.matrix.sub(&M::identity(3)).norm_fro() < 1e-10);
    }

    #[test]
    fn dimer_unbroken_biorthonormal_to_1e12() {
        let spec = pair_left_right(&dimer(0.5), &BiorthoOptions::default()).unwrap();
        assert!(spec.biorthogonality_residual() < 1e-12);
        assert!(spec.completeness_residual() < 2.0 * 1e-12);
    }

    #[test]
    fn dimer_at_ep_flags_both_states_defective() {
        let spec = pair_left_right(&dimer(1.0), &BiorthoOptions::default()).unwrap();
        assert!(spec.defective.iter().all(|&d| d));
        for s in &spec.self_overlaps {
            assert!(s.norm() < 1e-6);
        }
        assert!(matches!(build_g_metric(&spec, 1e-12), Err(BiorthoError::DefectiveSpectrum(_))));
    }

    #[test]
    fn dimer_g_matches_closed_form_at_half() {
        let spec = pair_left_right(&dimer(0.5), &BiorthoOptions::default()).unwrap();
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let c = (1.0f64 - 0.25).sqrt();
        let expect = M::from_rows(
            2,
            &[c64(1.0 / c, 0.0), c64(0.0, 0.5 / c), c64(0.0, -0.5 / c), c64(1.0 / c, 0.0)],
        );
        assert!(g.matrix.sub(&expect).norm_fro() < 1e-12);
    }

    #[test]
    fn left_via_g_identity() {
        let spec = pair_left_right(&dimer(0.7), &BiorthoOptions::default()).unwrap();
        let g = build_g_metric(&spec, 1e-12).unwrap();
        for i in 0..2 {
            // <L_i| = <R_i| G  <=>  L_i = G^dag R_i = G R_i
            let g_r = g.matrix.matvec(&spec.rights[i]);
            let diff: f64 =
                g_r.iter().zip(&spec.lefts[i]).map(|(a, b)| (a - b).norm()).sum();
            assert!(diff < 1e-10, "left-via-G failed: {diff:e}");
        }
    }

    #[test]
    fn g_expectation_of_identity_is_one() {
        let spec = pair_left_right(&dimer(0.6), &BiorthoOptions::default()).unwrap();
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let v = g_expectation(&g, &M::identity(2), &spec.rights[0]).unwrap();
        assert!((v - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dimer_g_expectation_of_dh_matches_derivative() {
        // state with E = +sqrt(1-λ²) at λ=0.6 has <dH>_G = -λ/sqrt(1-λ²) = -0.75
        let spec = pair_left_right(&dimer(0.6), &BiorthoOptions::default()).unwrap();
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let dh = M::from_diagonal(&[c64(0.0, 1.0), c64(0.0, -1.0)]);
        let plus = if spec.eigenvalues[0].re > 0.0 { 0 } else { 1 };
        let v = g_expectation(&g, &dh, &spec.rights[plus]).unwrap();
        assert!((v - c64(-0.75, 0.0)).norm() < 1e-12, "got {v}");
    }

    #[test]
    fn good_observable_checks() {
        let spec = pair_left_right(&dimer(0.5), &BiorthoOptions::default()).unwrap();
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let (good, _) = is_good_observable(&dimer(0.5), &g, 1e-10);
        assert!(good, "H is a good observable in the unbroken phase");
        let (good_id, defect) = is_good_observable(&M::identity(2), &g, 1e-10);
        assert!(good_id && defect < 1e-14);

        let spec_b = pair_left_right(&dimer(1.5), &BiorthoOptions::default()).unwrap();
        let g_b = build_g_metric(&spec_b, 1e-12).unwrap();
        let (good_b, defect_b) = is_good_observable(&dimer(1.5), &g_b, 1e-10);
        assert!(!good_b && defect_b > 1e-3, "H is not good in the broken phase");
    }

    #[test]
    fn phase_classification() {
        let opts = BiorthoOptions::default();
        let s1 = pair_left_right(&dimer(0.9), &opts).unwrap();
        let r1 = phase_classify(&s1, default_reality_tol(s1.h_norm), default_ep_tol());
        assert_eq!(r1.phase, Phase::Unbroken);

        let s2 = pair_left_right(&dimer(1.1), &opts).unwrap();
        let r2 = phase_classify(&s2, default_reality_tol(s2.h_norm), default_ep_tol());
        assert_eq!(r2.phase, Phase::Broken);
        assert!(r2.max_imag > 0.4);

        let s3 = pair_left_right(&dimer(1.0), &opts).unwrap();
        let r3 = phase_classify(&s3, default_reality_tol(s3.h_norm), default_ep_tol());
        assert_eq!(r3.phase, Phase::NearEp);
    }
}
