//! LU factorization with partial pivoting for dense complex matrices.
//! Backs `invert` and the inverse-iteration eigenvector refinement.

use super::{ComplexMatrix, LinalgError};
use crate::scalar::{czero, from_f64, C, Scalar};

/// What to do when a pivot underflows the singularity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotPolicy {
    /// Fail with `SingularMatrix`.
    ErrorOnSingular,
    /// Replace the pivot with a tiny value. Inverse iteration relies on this:
    /// (M - E I) is singular by construction at a converged eigenvalue.
    PerturbTiny,
}

/// Packed LU factors plus the row permutation.
pub struct LuFactors<T: Scalar> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
    min_pivot: T,
    max_pivot: T,
}

impl<T: Scalar> LuFactors<T> {
    /// Factorize with partial pivoting.
    pub fn new(m: &ComplexMatrix<T>, policy: PivotPolicy) -> Result<Self, LinalgError> {
        Self::with_scale_floor(m, policy, T::zero())
    }

    /// Factorize with an external problem scale. The tiny-pivot floor is
    /// taken relative to `max(||m||_F, scale_floor)`; shifted matrices
    /// `M - E I` can be exactly zero while the problem scale is `||M||`.
    pub fn with_scale_floor(
        m: &ComplexMatrix<T>,
        policy: PivotPolicy,
        scale_floor: T,
    ) -> Result<Self, LinalgError> {
        let n = m.dim();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.norm_fro().max(scale_floor).max(T::min_positive_value());
        // relative floor for pivot magnitudes
        let tiny = T::epsilon() * scale * from_f64(1e-3);
        let mut min_pivot = T::infinity();
        let mut max_pivot = T::zero();

        for k in 0..n {
            let mut p = k;
            let mut pmag = lu[(k, k)].norm();
            for r in (k + 1)..n {
                let mag = lu[(r, k)].norm();
                if mag > pmag {
                    pmag = mag;
                    p = r;
                }
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            if pmag < tiny {
                match policy {
                    PivotPolicy::ErrorOnSingular => {
                        let cond = if pmag > T::zero() {
                            (scale / pmag).to_f64().unwrap_or(f64::INFINITY)
                        } else {
                            f64::INFINITY
                        };
                        return Err(LinalgError::SingularMatrix { condition_estimate: cond });
                    }
                    PivotPolicy::PerturbTiny => {
                        lu[(k, k)] = C::new(tiny.max(T::min_positive_value()), T::zero());
                        pmag = tiny;
                    }
                }
            }
            min_pivot = min_pivot.min(pmag);
            max_pivot = max_pivot.max(pmag);
            let pivot = lu[(k, k)];
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / pivot;
                lu[(r, k)] = factor;
                for j in (k + 1)..n {
                    let delta = factor * lu[(k, j)];
                    lu[(r, j)] = lu[(r, j)] - delta;
                }
            }
        }
        Ok(Self { lu, perm, min_pivot, max_pivot })
    }

    /// Solve `A x = b` from the packed factors.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L y = Pb
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    /// Crude condition estimate from the pivot spread.
    pub fn pivot_condition(&self) -> T {
        if self.min_pivot > T::zero() {
            self.max_pivot / self.min_pivot
        } else {
            T::infinity()
        }
    }
}

/// Solve `A x = b` in one shot.
pub fn solve_lu<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &[C<T>],
    policy: PivotPolicy,
) -> Result<Vec<C<T>>, LinalgError> {
    Ok(LuFactors::new(a, policy)?.solve(b))
}

/// Matrix inverse via LU. Fails with `SingularMatrix` (carrying a condition
/// estimate) when a pivot underflows the threshold.
pub fn invert<T: Scalar>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::InvalidInput("non-finite entries".into()));
    }
    let n = m.dim();
    let factors = LuFactors::new(m, PivotPolicy::ErrorOnSingular)?;
    let mut out = ComplexMatrix::zeros(n);
    let mut e = vec![czero(); n];
    for col in 0..n {
        e[col] = C::new(T::one(), T::zero());
        let x = factors.solve(&e);
        e[col] = czero();
        for row in 0..n {
            out[(row, col)] = x[row];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    type M = ComplexMatrix<f64>;

    #[test]
    fn invert_identity() {
        let id = M::identity(3);
        let inv = invert(&id).unwrap();
        assert!(inv.sub(&id).norm_fro() < 1e-15);
    }

    #[test]
    fn invert_diagonal() {
        let d = M::from_diagonal(&[c64(2.0, 0.0), c64(0.0, 1.0)]);
        let inv = invert(&d).unwrap();
        assert!((inv[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((inv[(1, 1)] - c64(0.0, -1.0)).norm() < 1e-15);
        assert!(inv[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let s = M::from_rows(2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(4.0, 0.0)]);
        match invert(&s) {
            Err(LinalgError::SingularMatrix { condition_estimate }) => {
                assert!(condition_estimate > 1e10);
            }
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn double_inversion_returns_original() {
        let m = M::from_rows(
            3,
            &[
                c64(1.0, 0.5),
                c64(-0.3, 0.1),
                c64(0.0, 2.0),
                c64(0.7, -0.2),
                c64(2.0, 0.0),
                c64(0.1, 0.1),
                c64(-1.0, 0.0),
                c64(0.4, 0.9),
                c64(0.5, -1.5),
            ],
        );
        let inv = invert(&m).unwrap();
        let back = invert(&inv).unwrap();
        assert!(back.sub(&m).norm_fro() < 1e-11 * m.norm_fro());
        assert!(m.matmul(&inv).sub(&M::identity(3)).norm_fro() < 1e-12);
    }
}
