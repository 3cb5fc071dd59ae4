//! Both sides of the modified Hellmann–Feynman identity
//! `dE/dλ = <L|∂H/∂λ|R> / <L|R> = <R|G ∂H/∂λ|R> / <R|G|R>`,
//! eigenvalue-branch tracking across λ sweeps, detection of real→complex
//! transitions, and power-law fits of the divergence of `f(λ) = |LHS|`
//! approaching a transition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biortho::{
    build_g_metric, g_expectation, pair_left_right, phase_classify, BiorthoError, BiorthoOptions,
    BiorthoSpectrum, GMetric, Phase,
};
use crate::linalg::dot_conj;
use crate::models::{ClosedForm, Model};
use crate::scalar::{from_f64, C, Scalar};

#[derive(Debug, Clone, Error)]
pub enum HftError {
    #[error(transparent)]
    Biortho(#[from] BiorthoError),
    /// State is flagged defective; the ratio `<L|dH|R>/<L|R>` is undefined.
    #[error("state {0} is defective at this coupling")]
    DefectiveState(usize),
    /// Left-vector route and G route disagree beyond tolerance.
    #[error("HFT route mismatch for state {state}: |Δ| = {delta:e} (allowed {allowed:e})")]
    RouteMismatch { state: usize, delta: f64, allowed: f64 },
    /// No closed form for this model.
    #[error("closed-form derivative unsupported: {0}")]
    Unsupported(String),
    /// λ sits inside the exclusion radius of a critical coupling.
    #[error("coupling {lambda} within exclusion radius of critical point {critical}")]
    AtCriticalPoint { lambda: f64, critical: f64 },
    /// Branch assignment between neighboring spectra is not unique.
    #[error("state tracking ambiguous for states {contested:?}")]
    TrackingAmbiguous { permutation: Vec<usize>, contested: Vec<usize> },
    /// Richardson estimate exceeds the requested finite-difference accuracy.
    #[error("finite-difference step too large: error estimate {estimate:e} > requested {requested:e}")]
    StepTooLarge { estimate: f64, requested: f64 },
    /// Too few clean samples before the transition to fit an exponent.
    #[error("insufficient points before transition: have {available}, need {needed}")]
    InsufficientPoints { available: usize, needed: usize },
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
}

/// Engine tolerances and sweep policy.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions<T: Scalar> {
    pub biortho: BiorthoOptions<T>,
    /// Reality tolerance factor (times `||H||_F`) for transition detection.
    pub reality_tol_rel: T,
    /// Raw-overlap threshold for near-EP classification.
    pub ep_tol: T,
    /// Samples within this distance of a closed-form critical point are
    /// flagged and not computed.
    pub exclusion_radius: T,
    /// Requested accuracy of finite-difference derivatives.
    pub fd_accuracy: T,
    /// RHS source policy.
    pub rhs: RhsSource,
    /// Evaluate grid points in parallel (output is identical either way).
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsSource {
    /// Closed form when the model has one, finite differences otherwise.
    Auto,
    ClosedForm,
    FiniteDifference,
}

impl<T: Scalar> Default for SweepOptions<T> {
    fn default() -> Self {
        Self {
            biortho: BiorthoOptions::default(),
            reality_tol_rel: from_f64(1e-9),
            ep_tol: from_f64(1e-6),
            exclusion_radius: from_f64(1e-4),
            fd_accuracy: from_f64(1e-7),
            rhs: RhsSource::Auto,
            parallel: true,
        }
    }
}

/// LHS of the modified HFT for state `i`: `<L_i|dH|R_i> / <L_i|R_i>`,
/// cross-checked against the G route `<R_i|G dH|R_i> / <R_i|G|R_i>` when a
/// metric is supplied.
pub fn hft_lhs<T: Scalar>(
    dh: &crate::linalg::ComplexMatrix<T>,
    spec: &BiorthoSpectrum<T>,
    i: usize,
    g: Option<&GMetric<T>>,
    tol: T,
) -> Result<C<T>, HftError> {
    if spec.defective[i] {
        return Err(HftError::DefectiveState(i));
    }
    let num = dot_conj(&spec.lefts[i], &dh.matvec(&spec.rights[i]));
    let den = dot_conj(&spec.lefts[i], &spec.rights[i]);
    let value = num / den;
    if let Some(g) = g {
        let alt = g_expectation(g, dh, &spec.rights[i])?;
        let allowed = from_f64::<T>(100.0)
            * tol
            * T::one().max(g.condition_estimate)
            * T::one().max(value.norm());
        let delta = (alt - value).norm();
        if delta > allowed {
            return Err(HftError::RouteMismatch {
                state: i,
                delta: delta.to_f64().unwrap_or(f64::NAN),
                allowed: allowed.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(value)
}

/// Closed-form RHS `dE/dλ` for a branch, guarded by the exclusion radius.
pub fn hft_rhs_closed<T: Scalar>(
    cf: &ClosedForm<T>,
    branch: usize,
    lambda: T,
    exclusion_radius: T,
) -> Result<C<T>, HftError> {
    if let Some(&critical) =
        cf.critical_points.iter().find(|&&c| (lambda - c).abs() < exclusion_radius)
    {
        return Err(HftError::AtCriticalPoint {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
            critical: critical.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(cf.d_eigenvalue(branch, lambda))
}

/// Branch assignment between two spectra: a bijection maximizing
/// `Σ |<L_i^prev|R_{π(i)}^next>|`, greedy with a contest check. Falls back to
/// eigenvalue proximity when the overlaps carry no signal.
pub fn track_states<T: Scalar>(
    prev: &BiorthoSpectrum<T>,
    next: &BiorthoSpectrum<T>,
) -> Result<Vec<usize>, HftError> {
    let n = prev.dim();
    assert_eq!(n, next.dim(), "dimension mismatch");
    let mut overlap = vec![vec![T::zero(); n]; n];
    let mut max_entry = T::zero();
    for i in 0..n {
        for j in 0..n {
            let o = dot_conj(&prev.lefts[i], &next.rights[j]).norm();
            overlap[i][j] = o;
            max_entry = max_entry.max(o);
        }
    }
    let floor = max_entry * from_f64::<T>(1e-10);

    let mut perm = vec![usize::MAX; n];
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    let mut contested = Vec::new();
    let contest_ratio = from_f64::<T>(0.99);

    for _ in 0..n {
        let mut best = (T::neg_infinity(), usize::MAX, usize::MAX);
        for i in 0..n {
            if row_used[i] {
                continue;
            }
            for j in 0..n {
                if col_used[j] {
                    continue;
                }
                if overlap[i][j] > best.0 {
                    best = (overlap[i][j], i, j);
                }
            }
        }
        let (score, bi, bj) = best;
        if score <= floor || max_entry == T::zero() {
            // no usable overlap signal left: match remaining by eigenvalue
            // proximity and mark them contested
            let rem_rows: Vec<usize> = (0..n).filter(|&i| !row_used[i]).collect();
            let mut cols_left: Vec<usize> = (0..n).filter(|&j| !col_used[j]).collect();
            for i in rem_rows {
                let (pos, _) = cols_left
                    .iter()
                    .enumerate()
                    .min_by(|(_, &a), (_, &b)| {
                        let da = (prev.eigenvalues[i] - next.eigenvalues[a]).norm();
                        let db = (prev.eigenvalues[i] - next.eigenvalues[b]).norm();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                perm[i] = cols_left.remove(pos);
                contested.push(i);
            }
            break;
        }
        // contested row: another next-state fits this prev-state nearly as well
        for j in 0..n {
            if j != bj && !col_used[j] && overlap[bi][j] >= contest_ratio * score {
                contested.push(bi);
                break;
            }
        }
        // contested column: another prev-state fits this next-state nearly as well
        for i in 0..n {
            if i != bi && !row_used[i] && overlap[i][bj] >= contest_ratio * score {
                contested.push(bi);
                break;
            }
        }
        perm[bi] = bj;
        row_used[bi] = true;
        col_used[bj] = true;
    }

    if contested.is_empty() {
        Ok(perm)
    } else {
        contested.sort_unstable();
        contested.dedup();
        Err(HftError::TrackingAmbiguous { permutation: perm, contested })
    }
}

/// Finite-difference RHS with Richardson error estimate.
#[derive(Debug, Clone, Copy)]
pub struct FdDerivative<T: Scalar> {
    pub value: C<T>,
    pub error_estimate: T,
}

/// Central difference `(E_i(λ+h) - E_i(λ-h)) / 2h` on the branch tracked
/// from the spectrum at λ, with a step-2h Richardson comparison.
pub fn hft_rhs_fd<T: Scalar>(
    model: &Model,
    state: usize,
    lambda: T,
    h: T,
    opts: &SweepOptions<T>,
) -> Result<FdDerivative<T>, HftError> {
    let reference = pair_left_right(&model.hamiltonian(lambda), &opts.biortho)?;
    let batch = fd_all_states(model, &reference, lambda, h, opts)?;
    let d = batch[state];
    if d.error_estimate > opts.fd_accuracy {
        return Err(HftError::StepTooLarge {
            estimate: d.error_estimate.to_f64().unwrap_or(f64::NAN),
            requested: opts.fd_accuracy.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(d)
}

/// Central differences for every state at once (shares the four
/// eigendecompositions). Tracking is local: each λ±h spectrum is matched
/// against the reference spectrum at λ.
fn fd_all_states<T: Scalar>(
    model: &Model,
    reference: &BiorthoSpectrum<T>,
    lambda: T,
    h: T,
    opts: &SweepOptions<T>,
) -> Result<Vec<FdDerivative<T>>, HftError> {
    let two = from_f64::<T>(2.0);
    let track = |lam: T| -> Result<Vec<C<T>>, HftError> {
        let spec = pair_left_right(&model.hamiltonian(lam), &opts.biortho)?;
        let perm = match track_states(reference, &spec) {
            Ok(p) => p,
            Err(HftError::TrackingAmbiguous { permutation, .. }) => permutation,
            Err(e) => return Err(e),
        };
        Ok(perm.iter().map(|&j| spec.eigenvalues[j]).collect())
    };
    let ep1 = track(lambda + h)?;
    let em1 = track(lambda - h)?;
    let ep2 = track(lambda + two * h)?;
    let em2 = track(lambda - two * h)?;

    let n = reference.dim();
    let three = from_f64::<T>(3.0);
    Ok((0..n)
        .map(|i| {
            let d1 = (ep1[i] - em1[i]) / C::new(two * h, T::zero());
            let d2 = (ep2[i] - em2[i]) / C::new(two * two * h, T::zero());
            // central differences carry O(h²) error, so |d1 - exact| ≈ |d1-d2|/3
            let error_estimate = (d1 - d2).norm() / three;
            FdDerivative { value: d1, error_estimate }
        })
        .collect())
}

/// Per-sample quality flags, serialized into the CSV `flags` column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFlags {
    /// Raw overlap below the defectivity threshold: no normalized pair.
    pub defective: bool,
    /// Inside the exclusion radius of a closed-form critical coupling.
    pub near_critical: bool,
    /// Branch assignment to this λ was contested.
    pub tracking_ambiguous: bool,
    /// Left/right pairing failed at this λ; sample not computed.
    pub pairing_failed: bool,
    /// Finite-difference error estimate exceeded the requested accuracy.
    pub fd_error_large: bool,
    /// No RHS source available for this sample.
    pub rhs_unavailable: bool,
}

impl SampleFlags {
    pub fn any(&self) -> bool {
        self.defective
            || self.near_critical
            || self.tracking_ambiguous
            || self.pairing_failed
            || self.fd_error_large
            || self.rhs_unavailable
    }

    pub fn to_compact_string(&self) -> String {
        let mut parts = Vec::new();
        if self.defective {
            parts.push("defective");
        }
        if self.near_critical {
            parts.push("near-critical");
        }
        if self.tracking_ambiguous {
            parts.push("tracking-ambiguous");
        }
        if self.pairing_failed {
            parts.push("pairing-failed");
        }
        if self.fd_error_large {
            parts.push("fd-error-large");
        }
        if self.rhs_unavailable {
            parts.push("rhs-unavailable");
        }
        parts.join(";")
    }
}

/// One (λ, state) record of the sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct HftSample<T: Scalar> {
    pub lambda: T,
    /// Canonical state index at the sweep start, followed along branches.
    pub state: usize,
    /// Tracked eigenvalue at this λ (NaN when the point was not computed).
    pub energy: C<T>,
    pub lhs: Option<C<T>>,
    pub rhs: Option<C<T>>,
    /// `|lhs - rhs|` when both sides exist.
    pub residual: Option<T>,
    pub phase: Phase,
    pub flags: SampleFlags,
}

impl<T: Scalar> HftSample<T> {
    /// `f(λ) = |LHS|`, the quantity the divergence diagnostics track.
    pub fn abs_f(&self) -> Option<T> {
        self.lhs.map(|v| v.norm())
    }
}

/// One tracking step of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrackStep<T: Scalar> {
    pub from_lambda: T,
    pub to_lambda: T,
    /// Bijection from state positions at `from_lambda` to `to_lambda`.
    pub permutation: Vec<usize>,
    pub contested: Vec<usize>,
}

/// Full sweep output: samples ordered by (λ ascending, state ascending).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepResult<T: Scalar> {
    pub grid: Vec<T>,
    pub states: usize,
    pub samples: Vec<HftSample<T>>,
    pub tracking: Vec<TrackStep<T>>,
    /// Per state: first grid λ at which the tracked `|Im E|` exceeds the
    /// reality tolerance, if any.
    pub transitions: Vec<Option<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn sample(&self, grid_index: usize, state: usize) -> &HftSample<T> {
        &self.samples[grid_index * self.states + state]
    }

    /// All samples of one tracked state, λ ascending.
    pub fn state_samples(&self, state: usize) -> impl Iterator<Item = &HftSample<T>> {
        self.samples.iter().skip(state).step_by(self.states.max(1))
    }
}

struct PointData<T: Scalar> {
    lambda: T,
    excluded: bool,
    spec: Option<BiorthoSpectrum<T>>,
    phase: Phase,
    pairing_failed: bool,
    lhs: Vec<Option<C<T>>>,
    rhs: Vec<Option<C<T>>>,
    fd_error_large: Vec<bool>,
    rhs_unavailable: Vec<bool>,
    defective: Vec<bool>,
}

/// Sweep λ across `grid`, computing both HFT sides per tracked state, with
/// per-sample flags instead of hard failures. Spectra for the grid points
/// are evaluated in parallel; tracking runs as a deterministic sequential
/// pass, so the output does not depend on the execution schedule.
pub fn sweep<T: Scalar>(
    model: &Model,
    grid: &[T],
    opts: &SweepOptions<T>,
) -> Result<SweepResult<T>, HftError> {
    if grid.len() < 2 {
        return Err(HftError::InvalidGrid("grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HftError::InvalidGrid("grid must be strictly ascending".into()));
    }
    model.validate().map_err(|e| HftError::InvalidGrid(e.to_string()))?;

    let n = model.dim();
    let cf = model.closed_form::<T>();
    let use_closed = match opts.rhs {
        RhsSource::Auto => cf.is_some(),
        RhsSource::ClosedForm => {
            if cf.is_none() {
                return Err(HftError::Unsupported(format!(
                    "{} has no closed-form spectrum",
                    model.name()
                )));
            }
            true
        }
        RhsSource::FiniteDifference => false,
    };

    // rough transition locations (complex-count changes between grid points)
    // set the fd step's distance-to-transition scale before exact tracking
    // is available
    let rough = if use_closed { Vec::new() } else { rough_transitions(model, grid, opts) };

    let eval_point =
        |&lambda: &T| evaluate_point(model, lambda, cf.as_ref(), use_closed, &rough, opts);
    let mut points: Vec<PointData<T>> = if opts.parallel {
        grid.par_iter().map(eval_point).collect()
    } else {
        grid.iter().map(eval_point).collect()
    };

    // sequential tracking pass over valid points
    let mut tracking = Vec::new();
    let mut positions: Vec<Vec<usize>> = Vec::with_capacity(points.len());
    let mut contested_at: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    let mut last_valid: Option<usize> = None;
    let mut current: Vec<usize> = (0..n).collect();
    for t in 0..points.len() {
        if points[t].spec.is_none() {
            positions.push(current.clone());
            continue;
        }
        if let Some(prev_t) = last_valid {
            let prev_spec = points[prev_t].spec.as_ref().unwrap();
            let next_spec = points[t].spec.as_ref().unwrap();
            let (perm, contested) = match track_states(prev_spec, next_spec) {
                Ok(p) => (p, Vec::new()),
                Err(HftError::TrackingAmbiguous { permutation, contested }) => {
                    (permutation, contested)
                }
                Err(_) => ((0..n).collect(), (0..n).collect()),
            };
            // contested entries are positions at prev_t; translate to the
            // sweep-start state labels
            let contested_states: Vec<usize> = current
                .iter()
                .enumerate()
                .filter(|(_, &pos)| contested.contains(&pos))
                .map(|(start, _)| start)
                .collect();
            tracking.push(TrackStep {
                from_lambda: points[prev_t].lambda,
                to_lambda: points[t].lambda,
                permutation: perm.clone(),
                contested,
            });
            current = current.iter().map(|&pos| perm[pos]).collect();
            contested_at[t] = contested_states;
        }
        positions.push(current.clone());
        last_valid = Some(t);
    }

    let reality_tol = {
        let h_norm =
            points.iter().find_map(|p| p.spec.as_ref().map(|s| s.h_norm)).unwrap_or(T::one());
        opts.reality_tol_rel * h_norm.max(T::one())
    };
    let mut transitions: Vec<Option<T>> = vec![None; n];
    let mut samples = Vec::with_capacity(points.len() * n);
    for (t, point) in points.iter_mut().enumerate() {
        let lambda = point.lambda;
        for start in 0..n {
            let pos = positions[t][start];
            let mut flags = SampleFlags {
                near_critical: point.excluded,
                pairing_failed: point.pairing_failed,
                tracking_ambiguous: contested_at[t].contains(&start),
                ..SampleFlags::default()
            };
            let (energy, lhs, rhs, residual) = if let Some(spec) = point.spec.as_ref() {
                flags.defective = point.defective[pos];
                flags.fd_error_large = point.fd_error_large[pos];
                flags.rhs_unavailable = point.rhs_unavailable[pos];
                let e = spec.eigenvalues[pos];
                if transitions[start].is_none() && e.im.abs() > reality_tol {
                    transitions[start] = Some(lambda);
                }
                let lhs = point.lhs[pos];
                let rhs = point.rhs[pos];
                let residual = match (lhs, rhs) {
                    (Some(a), Some(b)) => Some((a - b).norm()),
                    _ => None,
                };
                (e, lhs, rhs, residual)
            } else {
                (C::new(T::nan(), T::nan()), None, None, None)
            };
            samples.push(HftSample { lambda, state: start, energy, lhs, rhs, residual, phase: point.phase, flags });
        }
    }

    Ok(SweepResult { grid: grid.to_vec(), states: n, samples, tracking, transitions })
}

fn evaluate_point<T: Scalar>(
    model: &Model,
    lambda: T,
    cf: Option<&ClosedForm<T>>,
    use_closed: bool,
    rough_transitions: &[T],
    opts: &SweepOptions<T>,
) -> PointData<T> {
    let n = model.dim();
    let empty = |excluded: bool, pairing_failed: bool| PointData {
        lambda,
        excluded,
        spec: None,
        phase: Phase::NearEp,
        pairing_failed,
        lhs: vec![None; n],
        rhs: vec![None; n],
        fd_error_large: vec![false; n],
        rhs_unavailable: vec![false; n],
        defective: vec![false; n],
    };
    if let Some(cf) = cf {
        if cf.near_critical(lambda, opts.exclusion_radius) {
            return empty(true, false);
        }
    }
    let h = model.hamiltonian(lambda);
    let spec = match pair_left_right(&h, &opts.biortho) {
        Ok(s) => s,
        Err(_) => return empty(false, true),
    };
    let phase =
        phase_classify(&spec, opts.reality_tol_rel * spec.h_norm.max(T::one()), opts.ep_tol);
    let g = if spec.is_clean() { build_g_metric(&spec, opts.biortho.tol).ok() } else { None };
    let dh = model.d_dlambda::<T>();

    let mut lhs = vec![None; n];
    for (i, slot) in lhs.iter_mut().enumerate() {
        if !spec.defective[i] {
            *slot = hft_lhs(&dh, &spec, i, g.as_ref(), opts.biortho.tol).ok();
        }
    }

    let mut rhs = vec![None; n];
    let mut fd_error_large = vec![false; n];
    let mut rhs_unavailable = vec![false; n];
    if use_closed {
        let cf = cf.unwrap();
        for (i, slot) in rhs.iter_mut().enumerate() {
            *slot =
                Some(cf.d_eigenvalue(cf.nearest_branch(spec.eigenvalues[i], lambda), lambda));
        }
    } else {
        // shrink the step approaching a transition: branch derivatives
        // steepen like an inverse square root there
        let dist = rough_transitions
            .iter()
            .map(|&t| (lambda - t).abs())
            .fold(T::infinity(), T::min);
        let h_step = if dist.is_finite() {
            (from_f64::<T>(1e-4) * dist).max(from_f64(1e-6))
        } else {
            from_f64(1e-6)
        };
        match fd_all_states(model, &spec, lambda, h_step, opts) {
            Ok(ds) => {
                for (i, d) in ds.into_iter().enumerate() {
                    rhs[i] = Some(d.value);
                    fd_error_large[i] = d.error_estimate > opts.fd_accuracy;
                }
            }
            Err(_) => rhs_unavailable = vec![true; n],
        }
    }

    let defective = spec.defective.clone();
    PointData {
        lambda,
        excluded: false,
        spec: Some(spec),
        phase: phase.phase,
        pairing_failed: false,
        lhs,
        rhs,
        fd_error_large,
        rhs_unavailable,
        defective,
    }
}

/// Grid λ values where the number of complex eigenvalues changes (set-level
/// transition markers, no tracking needed).
fn rough_transitions<T: Scalar>(model: &Model, grid: &[T], opts: &SweepOptions<T>) -> Vec<T> {
    let mut out = Vec::new();
    let mut prev_count: Option<usize> = None;
    for &lambda in grid {
        let h = model.hamiltonian(lambda);
        let tol = opts.reality_tol_rel * h.norm_fro().max(T::one());
        let count = match crate::linalg::eigendecompose(&h, opts.biortho.tol) {
            Ok(s) => s.eigenvalues.iter().filter(|e| e.im.abs() > tol).count(),
            Err(_) => continue,
        };
        if let Some(p) = prev_count {
            if count != p {
                out.push(lambda);
            }
        }
        prev_count = Some(count);
    }
    out
}

/// Divergence diagnosis for one tracked state.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum DivergenceFinding<T: Scalar> {
    /// `|f(λ)| ~ C |λ - λ*|^(-p)` fit on the approach to the transition.
    Diverges { state: usize, lambda_star: T, exponent: T, fit_residual: T, points: usize },
    /// The tracked eigenvalue stays real; `|f|` remains bounded.
    NoDivergence { state: usize, max_abs_f: T },
    /// A transition exists but too few clean samples precede it.
    InsufficientPoints { state: usize, lambda_star: T, available: usize },
}

/// Fit the growth exponent of `f(λ)` before each detected real→complex
/// transition. When the model has a closed form, the transition location is
/// snapped to the nearest critical coupling; up to eight clean samples,
/// spread roughly uniformly in `log|λ - λ*|`, enter a log-log least-squares
/// fit.
pub fn divergence_report<T: Scalar>(
    sweep: &SweepResult<T>,
    cf: Option<&ClosedForm<T>>,
) -> Vec<DivergenceFinding<T>> {
    const NEEDED: usize = 8;
    (0..sweep.states)
        .map(|state| {
            let lambda_star = match sweep.transitions[state] {
                None => {
                    let max_abs_f = sweep
                        .state_samples(state)
                        .filter_map(|s| s.abs_f())
                        .fold(T::zero(), T::max);
                    return DivergenceFinding::NoDivergence { state, max_abs_f };
                }
                Some(det) => match cf {
                    Some(cf) => cf
                        .critical_points
                        .iter()
                        .copied()
                        .min_by(|a, b| (*a - det).abs().partial_cmp(&(*b - det).abs()).unwrap())
                        .unwrap_or(det),
                    None => det,
                },
            };
            let mut candidates: Vec<(T, T)> = sweep
                .state_samples(state)
                .filter(|s| s.lambda < lambda_star && !s.flags.any())
                .filter_map(|s| s.abs_f().map(|f| ((lambda_star - s.lambda), f)))
                .filter(|&(d, f)| d > T::zero() && f > T::zero())
                .collect();
            if candidates.len() < NEEDED {
                return DivergenceFinding::InsufficientPoints {
                    state,
                    lambda_star,
                    available: candidates.len(),
                };
            }
            candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let selected = select_log_uniform(&candidates, NEEDED);
            let (slope, fit_residual) = log_log_fit(&selected);
            DivergenceFinding::Diverges {
                state,
                lambda_star,
                exponent: -slope,
                fit_residual,
                points: selected.len(),
            }
        })
        .collect()
}

/// Pick up to `count` points spread uniformly in log-distance.
fn select_log_uniform<T: Scalar>(sorted: &[(T, T)], count: usize) -> Vec<(T, T)> {
    if sorted.len() <= count {
        return sorted.to_vec();
    }
    let d_min = sorted.first().unwrap().0.ln();
    let d_max = sorted.last().unwrap().0.ln();
    let mut picked = Vec::with_capacity(count);
    let mut used = vec![false; sorted.len()];
    for k in 0..count {
        let target =
            d_min + (d_max - d_min) * from_f64::<T>(k as f64) / from_f64::<T>((count - 1) as f64);
        let (idx, _) = sorted
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, a), (_, b)| {
                (a.0.ln() - target).abs().partial_cmp(&(b.0.ln() - target).abs()).unwrap()
            })
            .unwrap();
        used[idx] = true;
        picked.push(sorted[idx]);
    }
    picked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    picked
}

/// Least squares of `log f` on `log d`; returns (slope, rms residual).
fn log_log_fit<T: Scalar>(points: &[(T, T)]) -> (T, T) {
    let n = from_f64::<T>(points.len() as f64);
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &(d, f) in points {
        let x = d.ln();
        let y = f.ln();
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = T::zero();
    for &(d, f) in points {
        let r = f.ln() - (slope * d.ln() + intercept);
        ss = ss + r * r;
    }
    (slope, (ss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    fn dimer_spec(lam: f64) -> BiorthoSpectrum<f64> {
        pair_left_right(&Model::TwoLevel.hamiltonian(lam), &BiorthoOptions::default()).unwrap()
    }

    #[test]
    fn lhs_unbroken_matches_closed_form() {
        let spec = dimer_spec(0.6);
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let dh = Model::TwoLevel.d_dlambda::<f64>();
        let plus = if spec.eigenvalues[0].re > 0.0 { 0 } else { 1 };
        let v = hft_lhs(&dh, &spec, plus, Some(&g), 1e-12).unwrap();
        assert!((v - c64(-0.75, 0.0)).norm() < 1e-12, "got {v}");
    }

    #[test]
    fn lhs_broken_matches_closed_form() {
        let spec = dimer_spec(1.25);
        let g = build_g_metric(&spec, 1e-12).unwrap();
        let dh = Model::TwoLevel.d_dlambda::<f64>();
        // E_+ = +i sqrt(λ²-1): identify by imaginary part
        let plus = if spec.eigenvalues[0].im > 0.0 { 0 } else { 1 };
        let v = hft_lhs(&dh, &spec, plus, Some(&g), 1e-12).unwrap();
        assert!((v - c64(0.0, 1.25 / 0.75)).norm() < 1e-10, "got {v}");
    }

    #[test]
    fn lhs_at_zero_equals_fd() {
        // do not assume the derivative vanishes at λ=0: compute both sides
        let opts = SweepOptions::default();
        for model in [Model::TwoLevel, Model::LatticeStaggered { sites: 8, span: 2 }] {
            let spec = pair_left_right(&model.hamiltonian(0.0), &opts.biortho).unwrap();
            let dh = model.d_dlambda::<f64>();
            for i in 0..model.dim() {
                let lhs = hft_lhs(&dh, &spec, i, None, 1e-12).unwrap();
                let fd = hft_rhs_fd(&model, i, 0.0, 1e-6, &opts).unwrap();
                assert!((lhs - fd.value).norm() < 1e-7, "{model:?} state {i}");
            }
        }
    }

    #[test]
    fn defective_state_is_rejected() {
        let spec = dimer_spec(1.0);
        let dh = Model::TwoLevel.d_dlambda::<f64>();
        assert!(matches!(hft_lhs(&dh, &spec, 0, None, 1e-12), Err(HftError::DefectiveState(0))));
    }

    #[test]
    fn rhs_closed_guards_critical_points() {
        let cf = Model::TwoLevel.closed_form::<f64>().unwrap();
        assert!(matches!(
            hft_rhs_closed(&cf, 1, 1.00005, 1e-4),
            Err(HftError::AtCriticalPoint { .. })
        ));
        let v = hft_rhs_closed(&cf, 1, 0.6, 1e-4).unwrap();
        assert!((v - c64(-0.75, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn tracking_identity_for_identical_and_nearby_spectra() {
        let a = dimer_spec(0.5);
        assert_eq!(track_states(&a, &a).unwrap(), vec![0, 1]);
        let b = dimer_spec(0.51);
        assert_eq!(track_states(&a, &b).unwrap(), vec![0, 1]);
    }

    #[test]
    fn tracking_flags_ep_crossing() {
        let a = dimer_spec(0.999);
        let b = dimer_spec(1.001);
        match track_states(&a, &b) {
            Err(HftError::TrackingAmbiguous { permutation, contested }) => {
                assert_eq!(permutation.len(), 2);
                assert!(!contested.is_empty());
            }
            other => panic!("expected ambiguity at the EP crossing, got {other:?}"),
        }
    }

    #[test]
    fn fd_matches_closed_derivative() {
        let opts = SweepOptions::default();
        let spec = dimer_spec(0.6);
        let plus = if spec.eigenvalues[0].re > 0.0 { 0 } else { 1 };
        let fd = hft_rhs_fd(&Model::TwoLevel, plus, 0.6, 1e-5, &opts).unwrap();
        assert!((fd.value - c64(-0.75, 0.0)).norm() < 1e-8, "got {:?}", fd.value);
        assert!(fd.error_estimate < 1e-8);
    }

    #[test]
    fn fd_step_too_large_is_reported() {
        let opts = SweepOptions::default();
        let res = hft_rhs_fd(&Model::TwoLevel, 0, 0.5, 0.2, &opts);
        assert!(matches!(res, Err(HftError::StepTooLarge { .. })));
    }

    #[test]
    fn sweep_dimer_residuals_and_monotone_f() {
        let grid: Vec<f64> = (1..20).map(|i| 0.05 * i as f64).collect();
        let result = sweep(&Model::TwoLevel, &grid, &SweepOptions::default()).unwrap();
        assert_eq!(result.samples.len(), grid.len() * 2);
        let worst = result.samples.iter().filter_map(|s| s.residual).fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "worst residual {worst:e}");
        for state in 0..2 {
            let fs: Vec<f64> = result.state_samples(state).filter_map(|s| s.abs_f()).collect();
            assert!(fs.windows(2).all(|w| w[1] > w[0]), "state {state} |f| not monotone");
        }
        assert!(result.transitions.iter().all(|t| t.is_none()));
    }

    #[test]
    fn sweep_detects_dimer_transition() {
        let grid: Vec<f64> = (1..=30).map(|i| 0.9 + 0.01 * i as f64).collect();
        let result = sweep(&Model::TwoLevel, &grid, &SweepOptions::default()).unwrap();
        for state in 0..2 {
            let t = result.transitions[state].expect("transition expected");
            assert!((t - 1.01).abs() < 1e-12, "transition detected at {t}");
        }
    }

    #[test]
    fn sweep_grid_validation() {
        let opts = SweepOptions::default();
        assert!(matches!(sweep(&Model::TwoLevel, &[0.5], &opts), Err(HftError::InvalidGrid(_))));
        assert!(matches!(
            sweep(&Model::TwoLevel, &[0.5, 0.4], &opts),
            Err(HftError::InvalidGrid(_))
        ));
    }

    #[test]
    fn divergence_fit_recovers_half_for_dimer() {
        // log-spaced approach to λ*=1 from below, then two broken-phase
        // points so the transition is detected at all
        let mut grid: Vec<f64> =
            (0..12).map(|k| 1.0 - 1e-4 * (2e-2f64 / 1e-4).powf(k as f64 / 11.0)).collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.push(1.05);
        grid.push(1.1);
        let result = sweep(&Model::TwoLevel, &grid, &SweepOptions::default()).unwrap();
        let cf = Model::TwoLevel.closed_form::<f64>().unwrap();
        for finding in divergence_report(&result, Some(&cf)) {
            match finding {
                DivergenceFinding::Diverges { exponent, lambda_star, .. } => {
                    assert!((lambda_star - 1.0).abs() < 1e-12);
                    assert!((exponent - 0.5).abs() < 0.05, "p = {exponent}");
                }
                other => panic!("expected divergence, got {other:?}"),
            }
        }
    }

    #[test]
    fn conjugate_branches_have_conjugate_lhs() {
        let spec = dimer_spec(1.4);
        let dh = Model::TwoLevel.d_dlambda::<f64>();
        let a = hft_lhs(&dh, &spec, 0, None, 1e-12).unwrap();
        let b = hft_lhs(&dh, &spec, 1, None, 1e-12).unwrap();
        assert!((spec.eigenvalues[0] - spec.eigenvalues[1].conj()).norm() < 1e-10);
        assert!((a - b.conj()).norm() < 1e-10, "lhs pair not conjugate: {a} vs {b}");
    }
}
