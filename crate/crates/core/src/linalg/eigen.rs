//! Dense non-normal eigensolver: unitary Hessenberg reduction followed by
//! explicitly shifted QR iteration (Wilkinson shifts, windowed deflation),
//! eigenvectors recovered by inverse iteration on the original matrix.

use super::lu::{LuFactors, PivotPolicy};
use super::{canonicalize_vec, norm2, ComplexMatrix, LinalgError};
use crate::scalar::{czero, from_f64, C, Scalar};

/// Eigenvalues in canonical order with per-pair right eigenvectors and
/// backward-error estimates `||Hv - Ev|| / ||H||_F`.
#[derive(Debug, Clone)]
pub struct RawSpectrum<T: Scalar> {
    pub eigenvalues: Vec<C<T>>,
    pub right_vectors: Vec<Vec<C<T>>>,
    pub residuals: Vec<T>,
}

/// Eigendecompose a square complex matrix.
///
/// Eigenvalues are returned sorted by real part then imaginary part, with
/// round-off-level real-part ties broken on the imaginary part so the order
/// is reproducible. Each right eigenvector has unit Euclidean norm and a
/// fixed phase (largest component real positive), and satisfies
/// `||M v - E v|| <= tol * ||M||_F`.
pub fn eigendecompose<T: Scalar>(
    m: &ComplexMatrix<T>,
    tol: T,
) -> Result<RawSpectrum<T>, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::InvalidInput("non-finite entries".into()));
    }
    if tol <= T::zero() {
        return Err(LinalgError::InvalidInput("tolerance must be positive".into()));
    }
    let n = m.dim();
    if n == 0 {
        return Ok(RawSpectrum { eigenvalues: vec![], right_vectors: vec![], residuals: vec![] });
    }

    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    let sweep_cap = 100 * n;
    let mut eigenvalues = qr_eigenvalues(&mut h, sweep_cap)?;
    sort_canonical(&mut eigenvalues, m.norm_fro());

    let norm = m.norm_fro().max(T::min_positive_value());
    let mut right_vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut failed = Vec::new();
    for (i, &ev) in eigenvalues.iter().enumerate() {
        match inverse_iteration(m, ev, i, tol) {
            Some((v, resid)) => {
                right_vectors.push(v);
                residuals.push(resid / norm);
            }
            None => {
                failed.push(i);
                right_vectors.push(vec![czero(); n]);
                residuals.push(T::infinity());
            }
        }
    }
    if !failed.is_empty() {
        return Err(LinalgError::NonConvergence { failed, sweeps: sweep_cap });
    }
    Ok(RawSpectrum { eigenvalues, right_vectors, residuals })
}

/// Canonical ordering: ascending real part, imaginary part breaking ties.
/// Real parts are first clustered at round-off resolution so that a purely
/// imaginary pair `(eps - i c, -eps + i c)` sorts by imaginary part instead
/// of by noise.
fn sort_canonical<T: Scalar>(ev: &mut [C<T>], scale: T) {
    ev.sort_by(|a, b| {
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    });
    let snap = T::epsilon() * scale.max(T::one()) * from_f64(256.0);
    let n = ev.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (ev[end].re - ev[end - 1].re).abs() <= snap {
            end += 1;
        }
        ev[start..end].sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        start = end;
    }
}

/// Unitary reduction to upper Hessenberg form via Householder reflectors.
fn hessenberg_in_place<T: Scalar>(h: &mut ComplexMatrix<T>) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // reflector for column k, rows k+1..n
        let mut v: Vec<C<T>> = (k + 1..n).map(|r| h[(r, k)]).collect();
        let xnorm = norm2(&v);
        if xnorm <= T::epsilon() * h.norm_fro() {
            continue;
        }
        let x0 = v[0];
        let sign = if x0.norm() > T::zero() {
            x0 / C::new(x0.norm(), T::zero())
        } else {
            C::new(T::one(), T::zero())
        };
        let beta = -sign * C::new(xnorm, T::zero());
        v[0] = x0 - beta;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if vnorm2 <= T::zero() {
            continue;
        }
        let two_over = from_f64::<T>(2.0) / vnorm2;

        // left: rows k+1..n of columns k..n
        for j in k..n {
            let mut acc: C<T> = czero();
            for (r, vr) in v.iter().enumerate() {
                acc = acc + vr.conj() * h[(k + 1 + r, j)];
            }
            acc = acc * C::new(two_over, T::zero());
            for (r, vr) in v.iter().enumerate() {
                let delta = *vr * acc;
                h[(k + 1 + r, j)] = h[(k + 1 + r, j)] - delta;
            }
        }
        // right: columns k+1..n of all rows
        for i in 0..n {
            let mut acc: C<T> = czero();
            for (r, vr) in v.iter().enumerate() {
                acc = acc + h[(i, k + 1 + r)] * *vr;
            }
            acc = acc * C::new(two_over, T::zero());
            for (r, vr) in v.iter().enumerate() {
                let delta = acc * vr.conj();
                h[(i, k + 1 + r)] = h[(i, k + 1 + r)] - delta;
            }
        }
        // clean the annihilated entries
        h[(k + 1, k)] = beta;
        for r in k + 2..n {
            h[(r, k)] = czero();
        }
    }
}

/// Eigenvalues of a 2x2 complex block.
fn eig2x2<T: Scalar>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> (C<T>, C<T>) {
    let half = C::new(from_f64::<T>(0.5), T::zero());
    let tr = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    (tr + disc, tr - disc)
}

/// Shifted QR with windowed deflation on an upper Hessenberg matrix.
/// Destroys `h`; returns the unordered eigenvalues.
fn qr_eigenvalues<T: Scalar>(
    h: &mut ComplexMatrix<T>,
    sweep_cap: usize,
) -> Result<Vec<C<T>>, LinalgError> {
    let n = h.dim();
    let mut eigs = vec![czero(); n];
    let mut hi = n; // active block is h[lo..hi, lo..hi]
    let mut sweeps = 0usize;
    let mut stagnation = 0usize;
    let eps = T::epsilon();
    let fro = h.norm_fro().max(T::min_positive_value());

    while hi > 0 {
        // deflation scan: zero negligible subdiagonals, find window start
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let thresh = if local > T::zero() { eps * local } else { eps * fro };
            if sub <= thresh {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }

        if lo == hi - 1 {
            eigs[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            stagnation = 0;
            continue;
        }
        if lo == hi - 2 {
            let (e1, e2) =
                eig2x2(h[(lo, lo)], h[(lo, lo + 1)], h[(lo + 1, lo)], h[(lo + 1, lo + 1)]);
            eigs[lo] = e1;
            eigs[lo + 1] = e2;
            hi -= 2;
            stagnation = 0;
            continue;
        }

        if sweeps >= sweep_cap {
            return Err(LinalgError::NonConvergence { failed: (0..hi).collect(), sweeps });
        }
        sweeps += 1;
        stagnation += 1;

        // Wilkinson shift from the trailing 2x2; occasional exceptional shift
        // breaks symmetry-induced stalls
        let a = h[(hi - 2, hi - 2)];
        let b = h[(hi - 2, hi - 1)];
        let c = h[(hi - 1, hi - 2)];
        let d = h[(hi - 1, hi - 1)];
        let shift = if stagnation % 12 == 0 {
            d + C::new(from_f64::<T>(0.75) * c.norm(), T::zero())
        } else {
            let (e1, e2) = eig2x2(a, b, c, d);
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };

        qr_step(h, lo, hi, shift);
    }
    Ok(eigs)
}

/// One explicit-shift QR step on the window `[lo, hi)` using Givens
/// rotations. Only the window is updated: deflated blocks no longer
/// influence the eigenvalues of the active block.
fn qr_step<T: Scalar>(h: &mut ComplexMatrix<T>, lo: usize, hi: usize, shift: C<T>) {
    for i in lo..hi {
        h[(i, i)] = h[(i, i)] - shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    // left sweep: annihilate the subdiagonal
    for i in lo..hi - 1 {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let (cth, sth) = givens(a, b);
        for j in i..hi {
            let x = h[(i, j)];
            let y = h[(i + 1, j)];
            h[(i, j)] = C::new(cth, T::zero()) * x + sth * y;
            h[(i + 1, j)] = -sth.conj() * x + C::new(cth, T::zero()) * y;
        }
        rotations.push((cth, sth));
    }
    // right sweep: multiply by the adjoints, restoring Hessenberg form
    for (idx, &(cth, sth)) in rotations.iter().enumerate() {
        let i = lo + idx;
        let row_end = (i + 2).min(hi - 1);
        for r in lo..=row_end {
            let x = h[(r, i)];
            let y = h[(r, i + 1)];
            h[(r, i)] = x * C::new(cth, T::zero()) + y * sth.conj();
            h[(r, i + 1)] = -(x * sth) + y * C::new(cth, T::zero());
        }
    }
    for i in lo..hi {
        h[(i, i)] = h[(i, i)] + shift;
    }
}

/// Complex Givens rotation: returns `(c, s)` with `c` real so that
/// `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn givens<T: Scalar>(a: C<T>, b: C<T>) -> (T, C<T>) {
    let an = a.norm();
    let bn = b.norm();
    if bn == T::zero() {
        return (T::one(), czero());
    }
    if an == T::zero() {
        return (T::zero(), b.conj() / C::new(bn, T::zero()));
    }
    let rho = (an * an + bn * bn).sqrt();
    let c = an / rho;
    // s = sign(a) * conj(b) / rho, with sign(a) = a/|a|
    let s = (a / C::new(an, T::zero())) * b.conj() / C::new(rho, T::zero());
    (c, s)
}

/// Inverse iteration on the original matrix with the converged eigenvalue.
/// Returns the normalized eigenvector and the absolute residual `||Mv-Ev||`.
fn inverse_iteration<T: Scalar>(
    m: &ComplexMatrix<T>,
    eigenvalue: C<T>,
    index: usize,
    tol: T,
) -> Option<(Vec<C<T>>, T)> {
    let n = m.dim();
    let norm = m.norm_fro().max(T::min_positive_value());
    let target = tol * norm;

    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] = shifted[(i, i)] - eigenvalue;
    }
    let factors =
        LuFactors::with_scale_floor(&shifted, PivotPolicy::PerturbTiny, norm).ok()?;

    // deterministic per-index start vector
    let mut v = seeded_vector::<T>(n, index as u64);
    canonicalize_vec(&mut v);
    let mut best: Option<(Vec<C<T>>, T)> = None;
    for _ in 0..8 {
        let mut w = factors.solve(&v);
        canonicalize_vec(&mut w);
        let resid = residual(m, eigenvalue, &w);
        let better = best.as_ref().map_or(true, |(_, r)| resid < *r);
        if better {
            best = Some((w.clone(), resid));
        }
        if resid <= target {
            return best;
        }
        v = w;
    }
    // accept whatever converged best only if it meets the contract
    match best {
        Some((w, r)) if r <= target => Some((w, r)),
        _ => None,
    }
}

fn residual<T: Scalar>(m: &ComplexMatrix<T>, ev: C<T>, v: &[C<T>]) -> T {
    let mv = m.matvec(v);
    let diff: Vec<C<T>> = mv.iter().zip(v).map(|(a, b)| *a - *b * ev).collect();
    norm2(&diff)
}

/// Small deterministic generator for start vectors (splitmix64).
fn seeded_vector<T: Scalar>(n: usize, index: u64) -> Vec<C<T>> {
    let mut state = 0x9e3779b97f4a7c15u64 ^ (index.wrapping_mul(0xbf58476d1ce4e5b9)).wrapping_add(n as u64);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    (0..n)
        .map(|_| {
            let re = ((next() >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            let im = ((next() >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            C::new(from_f64(re), from_f64(im))
        })
        .collect()
}

/// Largest backward-error residual of a spectrum against its source matrix.
pub fn max_pair_residual<T: Scalar>(
    m: &ComplexMatrix<T>,
    spec: &RawSpectrum<T>,
) -> T {
    let norm = m.norm_fro().max(T::min_positive_value());
    spec.eigenvalues
        .iter()
        .zip(&spec.right_vectors)
        .map(|(&e, v)| residual(m, e, v) / norm)
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    type M = ComplexMatrix<f64>;

    fn seeded_matrix(n: usize, seed: u64) -> M {
        let v = seeded_vector::<f64>(n * n, seed);
        let mut m = M::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i * n + j];
            }
        }
        m
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let spec = eigendecompose(&M::identity(3), 1e-12).unwrap();
        for e in &spec.eigenvalues {
            assert!((e - c64(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(max_pair_residual(&M::identity(3), &spec) < 1e-12);
    }

    #[test]
    fn dimer_eigenvalues_at_0p6() {
        let h = M::from_rows(2, &[c64(0.0, 0.6), c64(-1.0, 0.0), c64(-1.0, 0.0), c64(0.0, -0.6)]);
        let spec = eigendecompose(&h, 1e-12).unwrap();
        assert!((spec.eigenvalues[0] - c64(-0.8, 0.0)).norm() < 1e-12);
        assert!((spec.eigenvalues[1] - c64(0.8, 0.0)).norm() < 1e-12);
    }

    /// Durand-Kerner root finder on the characteristic polynomial: an
    /// independent oracle for the QR eigenvalues.
    fn char_poly_roots(m: &M) -> Vec<C<f64>> {
        let n = m.dim();
        // Faddeev-LeVerrier for characteristic polynomial coefficients
        // p(x) = x^n + c[1] x^(n-1) + ... + c[n]
        let mut coeffs = vec![c64(1.0, 0.0)];
        let mut am = m.clone();
        for k in 1..=n {
            let ck = am.trace() * c64(-1.0 / k as f64, 0.0);
            coeffs.push(ck);
            if k < n {
                let mut shifted = am.clone();
                for i in 0..n {
                    shifted[(i, i)] = shifted[(i, i)] + ck;
                }
                am = m.matmul(&shifted);
            }
        }
        // Durand-Kerner iteration
        let mut roots: Vec<C<f64>> = (0..n)
            .map(|i| c64(0.4, 0.9).powu(i as u32 + 1))
            .collect();
        let eval = |x: C<f64>| {
            coeffs.iter().fold(c64(0.0, 0.0), |acc, &c| acc * x + c)
        };
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let mut denom = c64(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let delta = eval(roots[i]) / denom;
                roots[i] -= delta;
                moved = moved.max(delta.norm());
            }
            if moved < 1e-14 {
                break;
            }
        }
        roots
    }

    #[test]
    fn seeded_6x6_matches_characteristic_polynomial_roots() {
        let m = seeded_matrix(6, 42);
        let spec = eigendecompose(&m, 1e-12).unwrap();
        let mut roots = char_poly_roots(&m);
        sort_canonical(&mut roots, m.norm_fro());
        for (e, r) in spec.eigenvalues.iter().zip(&roots) {
            assert!((e - r).norm() < 1e-9, "eig {e} vs root {r}");
        }
        assert!(max_pair_residual(&m, &spec) < 1e-12);
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        for seed in 0..5 {
            let m = seeded_matrix(7, seed);
            let spec = eigendecompose(&m, 1e-12).unwrap();
            let sum = spec.eigenvalues.iter().fold(c64(0.0, 0.0), |a, &b| a + b);
            assert!((sum - m.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_spectrum_is_conjugate() {
        let m = seeded_matrix(6, 7);
        let sa = eigendecompose(&m, 1e-12).unwrap();
        let sb = eigendecompose(&m.adjoint(), 1e-12).unwrap();
        let mut conj: Vec<C<f64>> = sb.eigenvalues.iter().map(|e| e.conj()).collect();
        sort_canonical(&mut conj, m.norm_fro());
        for (a, b) in sa.eigenvalues.iter().zip(&conj) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut m = M::identity(2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(eigendecompose(&m, 1e-12), Err(LinalgError::InvalidInput(_))));
    }

    #[test]
    fn large_tridiagonal_spectrum_matches_closed_form() {
        // open chain: eigenvalues -2 cos(pi k/(n+1))
        let n = 24;
        let mut m = M::zeros(n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = c64(-1.0, 0.0);
            m[(i + 1, i)] = c64(-1.0, 0.0);
        }
        let spec = eigendecompose(&m, 1e-12).unwrap();
        let mut expect: Vec<f64> =
            (1..=n).map(|k| -2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos()).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in spec.eigenvalues.iter().zip(&expect) {
            assert!((e.re - x).abs() < 1e-10 && e.im.abs() < 1e-10);
        }
    }
}
