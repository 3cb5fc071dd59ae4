//! Dense complex linear algebra for non-normal matrices: matrix arithmetic,
//! eigendecomposition (Hessenberg + shifted QR + inverse iteration) and LU
//! based inversion. Everything here is a pure function of its inputs and safe
//! to call concurrently.

mod eigen;
mod lu;

pub use eigen::{eigendecompose, max_pair_residual, RawSpectrum};
pub use lu::{invert, solve_lu, LuFactors, PivotPolicy};

use thiserror::Error;

use crate::scalar::{czero, C, Scalar};

/// Errors from the dense linear-algebra layer.
#[derive(Debug, Clone, Error)]
pub enum LinalgError {
    /// Input matrix contains NaN/Inf entries or has inconsistent shape.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// QR iteration hit the sweep cap before isolating all eigenvalues.
    #[error("eigensolver did not converge for indices {failed:?} after {sweeps} sweeps")]
    NonConvergence { failed: Vec<usize>, sweeps: usize },
    /// A pivot underflowed the singularity threshold during elimination.
    #[error("matrix is numerically singular (condition estimate {condition_estimate:e})")]
    SingularMatrix { condition_estimate: f64 },
}

/// Dense square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Zero matrix of size `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![czero(); dim * dim] }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::new(T::one(), T::zero());
        }
        m
    }

    /// Build from a row-major slice; panics if the length is not `dim*dim`.
    pub fn from_rows(dim: usize, entries: &[C<T>]) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        Self { dim, entries: entries.to_vec() }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All entries finite (no NaN/Inf in either component).
    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).map(|i| self[(i, i)]).fold(czero(), |a, b| a + b)
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![czero(); n];
        for i in 0..n {
            let mut acc: C<T> = czero();
            for j in 0..n {
                acc = acc + self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        let entries = self.entries.iter().map(|a| a * factor).collect();
        Self { dim: self.dim, entries }
    }

    /// Rank-one update `self += w * v v^H`.
    pub fn add_outer(&mut self, v: &[C<T>], weight: T) {
        let n = self.dim;
        assert_eq!(v.len(), n);
        for i in 0..n {
            for j in 0..n {
                self[(i, j)] = self[(i, j)] + v[i] * v[j].conj() * C::new(weight, T::zero());
            }
        }
    }

}

impl<T: Scalar> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.entries[i * self.dim + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        let n = self.dim;
        &mut self.entries[i * n + j]
    }
}

// ── vector helpers ──────────────────────────────────────────────────

/// Inner product `<a|b>` (conjugate-linear in the first argument).
pub fn dot_conj<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).fold(czero(), |acc, z| acc + z)
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Scalar>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

/// Scale a vector in place.
pub fn scale_vec<T: Scalar>(v: &mut [C<T>], factor: C<T>) {
    for z in v.iter_mut() {
        *z = *z * factor;
    }
}

/// Normalize to unit Euclidean norm and rotate so the largest-magnitude
/// component is real positive. The phase fix makes eigenvector output
/// reproducible across runs.
pub fn canonicalize_vec<T: Scalar>(v: &mut [C<T>]) {
    let n = norm2(v);
    if n > T::zero() {
        scale_vec(v, C::new(T::one() / n, T::zero()));
    }
    let mut best = 0usize;
    let mut best_mag = T::zero();
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > T::zero() {
        let phase = v[best] / C::new(best_mag, T::zero());
        scale_vec(v, phase.conj());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    type M = ComplexMatrix<f64>;

    #[test]
    fn adjoint_is_conjugate_transpose_entrywise() {
        // seeded "random" matrix via a small LCG so the oracle loop is exact
        let mut state = 0x12345678u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let n = 5;
        let mut m = M::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c64(next(), next());
            }
        }
        let a = m.adjoint();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a[(i, j)], m[(j, i)].conj());
            }
        }
        // involution is exact
        assert_eq!(a.adjoint(), m);
    }

    #[test]
    fn adjoint_of_hermitian_is_identity_map() {
        let h = M::from_rows(2, &[c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(2.0, 0.0)]);
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn matmul_identity() {
        let m = M::from_rows(2, &[c64(1.0, 2.0), c64(3.0, -1.0), c64(0.5, 0.0), c64(0.0, 4.0)]);
        let id = M::identity(2);
        assert_eq!(m.matmul(&id), m);
        assert_eq!(id.matmul(&m), m);
    }

    #[test]
    fn canonical_phase_makes_largest_entry_real() {
        let mut v = vec![c64(0.3, 0.4), c64(-0.6, 0.6)];
        canonicalize_vec(&mut v);
        assert!((norm2(&v) - 1.0).abs() < 1e-14);
        assert!(v[1].im.abs() < 1e-14);
        assert!(v[1].re > 0.0);
    }
}
