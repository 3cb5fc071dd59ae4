//! Catalog of discrete Hamiltonian families H(λ): the PT-symmetric two-level
//! dimer, the four-level chain with alternating gain/loss, and the open
//! tight-binding lattices with a central gain/loss pair or a staggered
//! gain/loss window. Each family knows its exact ∂H/∂λ and, where available,
//! closed-form eigenvalue branches, critical couplings and reference metric
//! data.

use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::scalar::{c64, cre, from_f64, C, Scalar};

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidInput(String),
    #[error("unsupported for this model: {0}")]
    Unsupported(String),
}

/// Discrete model family. λ is supplied per call, so one value describes the
/// whole parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `[[iλ, -1], [-1, -iλ]]`.
    TwoLevel,
    /// Open 4-chain with alternating `±iλ` on every site.
    FourLevel,
    /// Open chain of even length with `+iλ` at site L/2 and `-iλ` at L/2+1
    /// (1-based).
    LatticePt { sites: usize },
    /// Open chain with alternating `±iλ` on the centered window of 2r sites,
    /// 1-based sites `L/2-(r-1) ..= L/2+r`.
    LatticeStaggered { sites: usize, span: usize },
}

impl Model {
    pub fn dim(&self) -> usize {
        match *self {
            Model::TwoLevel => 2,
            Model::FourLevel => 4,
            Model::LatticePt { sites } | Model::LatticeStaggered { sites, .. } => sites,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Model::TwoLevel | Model::FourLevel => Ok(()),
            Model::LatticePt { sites } => {
                if sites < 2 || sites % 2 != 0 {
                    Err(ModelError::InvalidInput(format!("lattice size must be even and >= 2, got {sites}")))
                } else {
                    Ok(())
                }
            }
            Model::LatticeStaggered { sites, span } => {
                if sites < 2 || sites % 2 != 0 {
                    Err(ModelError::InvalidInput(format!("lattice size must be even and >= 2, got {sites}")))
                } else if span == 0 || span > sites / 2 {
                    Err(ModelError::InvalidInput(format!("span must satisfy 1 <= r <= L/2, got r={span}, L={sites}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// CLI selector plus geometry.
    pub fn from_cli(name: &str, sites: Option<usize>, span: Option<usize>) -> Result<Self, ModelError> {
        let model = match name {
            "two-level" => Model::TwoLevel,
            "four-level" => Model::FourLevel,
            "lattice-pt" => Model::LatticePt {
                sites: sites.ok_or_else(|| ModelError::InvalidInput("lattice-pt requires --size".into()))?,
            },
            "lattice-staggered" => Model::LatticeStaggered {
                sites: sites.ok_or_else(|| ModelError::InvalidInput("lattice-staggered requires --size".into()))?,
                span: span.ok_or_else(|| ModelError::InvalidInput("lattice-staggered requires --r".into()))?,
            },
            other => {
                return Err(ModelError::InvalidInput(format!(
                    "unknown model '{other}' (expected two-level, four-level, lattice-pt, lattice-staggered)"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::TwoLevel => "two-level",
            Model::FourLevel => "four-level",
            Model::LatticePt { .. } => "lattice-pt",
            Model::LatticeStaggered { .. } => "lattice-staggered",
        }
    }

    /// Build H(λ): hopping -1 on the open chain plus the family's imaginary
    /// gain/loss diagonal.
    pub fn hamiltonian<T: Scalar>(&self, lambda: T) -> ComplexMatrix<T> {
        let n = self.dim();
        let mut h = ComplexMatrix::zeros(n);
        for j in 0..n.saturating_sub(1) {
            h[(j, j + 1)] = c64(-1.0, 0.0);
            h[(j + 1, j)] = c64(-1.0, 0.0);
        }
        for (site, sign) in self.gain_loss_pattern() {
            h[(site, site)] = C::new(T::zero(), lambda * from_f64(sign));
        }
        h
    }

    /// Exact ∂H/∂λ. H is affine in λ for every family, so this is the
    /// gain/loss pattern itself.
    pub fn d_dlambda<T: Scalar>(&self) -> ComplexMatrix<T> {
        let n = self.dim();
        let mut dh = ComplexMatrix::zeros(n);
        for (site, sign) in self.gain_loss_pattern() {
            dh[(site, site)] = C::new(T::zero(), from_f64(sign));
        }
        dh
    }

    /// (0-based site, sign) pairs of the `iλ` diagonal.
    fn gain_loss_pattern(&self) -> Vec<(usize, f64)> {
        match *self {
            Model::TwoLevel => vec![(0, 1.0), (1, -1.0)],
            Model::FourLevel => vec![(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)],
            Model::LatticePt { sites } => vec![(sites / 2 - 1, 1.0), (sites / 2, -1.0)],
            Model::LatticeStaggered { sites, span } => {
                // 1-based window L/2-(r-1) ..= L/2+r with alternating signs;
                // the sign convention is fixed so that the four-level chain is
                // the L=4, r=2 member and the diagonal is PT-antisymmetric
                (sites / 2 - span..sites / 2 + span)
                    .map(|j0| (j0, if j0 % 2 == 0 { 1.0 } else { -1.0 }))
                    .collect()
            }
        }
    }

    /// Closed-form spectral data (two-level and four-level families only).
    pub fn closed_form<T: Scalar>(&self) -> Option<ClosedForm<T>> {
        match self {
            Model::TwoLevel => Some(ClosedForm {
                model: *self,
                critical_points: vec![T::one()],
            }),
            Model::FourLevel => {
                let s5 = from_f64::<T>(5.0).sqrt();
                let half = from_f64::<T>(0.5);
                Some(ClosedForm {
                    model: *self,
                    critical_points: vec![
                        ((from_f64::<T>(3.0) - s5) * half).sqrt(),
                        ((from_f64::<T>(3.0) + s5) * half).sqrt(),
                    ],
                })
            }
            _ => None,
        }
    }
}

/// Closed-form eigenvalue branches, their λ-derivatives, critical couplings,
/// and reference metric data, continued across phase boundaries with the
/// principal square root (matching the branch listing continuity).
#[derive(Debug, Clone)]
pub struct ClosedForm<T: Scalar> {
    model: Model,
    pub critical_points: Vec<T>,
}

impl<T: Scalar> ClosedForm<T> {
    pub fn branches(&self) -> usize {
        self.model.dim()
    }

    /// Branch eigenvalue, continued into broken regions.
    pub fn eigenvalue(&self, branch: usize, lambda: T) -> C<T> {
        match self.model {
            Model::TwoLevel => {
                let root = cre(T::one() - lambda * lambda).sqrt();
                match branch {
                    0 => -root,
                    _ => root,
                }
            }
            Model::FourLevel => {
                let (minus, plus) = four_level_roots(lambda);
                let inv_rt2 = cre(from_f64::<T>(0.5).sqrt());
                match branch {
                    0 => -minus * inv_rt2,
                    1 => minus * inv_rt2,
                    2 => -plus * inv_rt2,
                    _ => plus * inv_rt2,
                }
            }
            _ => unreachable!("closed form only exists for two/four-level"),
        }
    }

    /// Analytic branch derivative dE/dλ.
    pub fn d_eigenvalue(&self, branch: usize, lambda: T) -> C<T> {
        match self.model {
            Model::TwoLevel => {
                let root = cre(T::one() - lambda * lambda).sqrt();
                let v = cre(lambda) / root;
                match branch {
                    0 => v,
                    _ => -v,
                }
            }
            Model::FourLevel => {
                let (minus, plus) = four_level_roots(lambda);
                let rt2 = cre(from_f64::<T>(2.0).sqrt());
                let v_minus = rt2 * cre(lambda) / minus;
                let v_plus = rt2 * cre(lambda) / plus;
                match branch {
                    0 => v_minus,
                    1 => -v_minus,
                    2 => v_plus,
                    _ => -v_plus,
                }
            }
            _ => unreachable!(),
        }
    }

    /// Branch whose eigenvalue at `lambda` is nearest to `e`.
    pub fn nearest_branch(&self, e: C<T>, lambda: T) -> usize {
        (0..self.branches())
            .min_by(|&a, &b| {
                let da = (self.eigenvalue(a, lambda) - e).norm();
                let db = (self.eigenvalue(b, lambda) - e).norm();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    }

    pub fn near_critical(&self, lambda: T, radius: T) -> bool {
        self.critical_points.iter().any(|&c| (lambda - c).abs() < radius)
    }

    /// Published closed-form G for the phase region containing `lambda`,
    /// where available. The four-level matrices correspond to the published
    /// eigenvector scalings (see [`ClosedForm::reference_rights`]); the
    /// two-level one coincides with the norm-balanced construction.
    pub fn g_matrix(&self, lambda: T) -> Option<ComplexMatrix<T>> {
        match self.model {
            Model::TwoLevel => {
                if lambda.abs() >= T::one() {
                    return None;
                }
                let c = (T::one() - lambda * lambda).sqrt();
                let mut g = ComplexMatrix::zeros(2);
                g[(0, 0)] = cre(T::one() / c);
                g[(1, 1)] = cre(T::one() / c);
                g[(0, 1)] = C::new(T::zero(), lambda / c);
                g[(1, 0)] = C::new(T::zero(), -lambda / c);
                Some(g)
            }
            Model::FourLevel => Some(four_level_g(lambda, &self.critical_points)),
            _ => None,
        }
    }

    /// The published eigenvector scalings (components continued with the
    /// principal root), ordered by branch. `inv(Σ|R><R|)` over these
    /// reproduces [`ClosedForm::g_matrix`] entrywise.
    pub fn reference_rights(&self, lambda: T) -> Option<Vec<Vec<C<T>>>> {
        match self.model {
            Model::FourLevel => Some(four_level_reference_rights(lambda)),
            _ => None,
        }
    }
}

/// `sqrt(3 - √5 - 2λ²)` and `sqrt(3 + √5 - 2λ²)` as principal complex roots.
fn four_level_roots<T: Scalar>(lambda: T) -> (C<T>, C<T>) {
    let s5 = from_f64::<T>(5.0).sqrt();
    let three = from_f64::<T>(3.0);
    let two = from_f64::<T>(2.0);
    let minus = cre(three - s5 - two * lambda * lambda).sqrt();
    let plus = cre(three + s5 - two * lambda * lambda).sqrt();
    (minus, plus)
}

fn four_level_reference_rights<T: Scalar>(lambda: T) -> Vec<Vec<C<T>>> {
    let s5 = from_f64::<T>(5.0).sqrt();
    let quarter = cre(from_f64::<T>(0.25));
    let (rt_minus, rt_plus) = four_level_roots(lambda);
    let il = C::new(T::zero(), lambda);
    let rt2 = from_f64::<T>(2.0).sqrt();
    let rt10 = from_f64::<T>(10.0).sqrt();
    let u1 = |sign: T| quarter * (il * cre(from_f64::<T>(2.0) * (T::one() + s5)) + cre(sign * (rt2 + rt10)) * rt_minus);
    let u2 = |sign: T| quarter * (il * cre(from_f64::<T>(2.0) * (T::one() - s5)) + cre(sign * (rt2 - rt10)) * rt_plus);
    let v1 = cre((T::one() - s5) / from_f64::<T>(2.0));
    let v2 = cre((T::one() + s5) / from_f64::<T>(2.0));
    let w1 = |sign: T| -il + cre(sign / rt2) * rt_minus;
    let w2 = |sign: T| -il + cre(sign / rt2) * rt_plus;
    let one = cre(T::one());
    vec![
        vec![u1(-T::one()), v1, w1(T::one()), one],
        vec![u1(T::one()), v1, w1(-T::one()), one],
        vec![u2(-T::one()), v2, w2(T::one()), one],
        vec![u2(T::one()), v2, w2(-T::one()), one],
    ]
}

/// Published four-level G matrices, one closed form per phase region.
fn four_level_g<T: Scalar>(lambda: T, critical: &[T]) -> ComplexMatrix<T> {
    let l = lambda;
    let l2 = l * l;
    let l3 = l2 * l;
    let l4 = l2 * l2;
    let s5 = from_f64::<T>(5.0).sqrt();
    let f = |x: f64| from_f64::<T>(x);
    let pref = T::one() / (f(10.0) * (T::one() - f(3.0) * l2 + l4));
    let re = |x: T| C::new(x * pref, T::zero());
    let im = |x: T| C::new(T::zero(), x * pref);

    let mut g = ComplexMatrix::zeros(4);
    if l.abs() < critical[0] {
        // all eigenvalues real
        g[(0, 0)] = re(f(3.0) - f(2.0) * l2);
        g[(0, 1)] = im(l * (f(3.0) - f(2.0) * l2));
        g[(0, 2)] = re(-(l2 + T::one()));
        g[(0, 3)] = im(l * (l2 - f(4.0)));
        g[(1, 1)] = re(f(2.0) - f(3.0) * l2);
        g[(1, 2)] = im(l3 + l);
        g[(1, 3)] = re(-(l2 + T::one()));
        g[(2, 2)] = re(f(2.0) - f(3.0) * l2);
        g[(2, 3)] = im(l * (f(3.0) - f(2.0) * l2));
        g[(3, 3)] = re(f(3.0) - f(2.0) * l2);
    } else if l.abs() < critical[1] {
        // two real, one conjugate pair
        let g24 = -T::one() + (f(3.0) + f(2.0) * s5) * l2 - (T::one() + s5) * l4;
        g[(0, 0)] = re(-s5);
        g[(0, 1)] = im(-l * s5);
        g[(0, 2)] = re(-s5 * (l2 - T::one()));
        g[(0, 3)] = im(-l * s5 * (l2 - f(2.0)));
        g[(1, 1)] = re(f(2.0) - (f(6.0) + s5) * l2 + f(2.0) * l4);
        g[(1, 2)] = im(l * (l2 - T::one()));
        g[(1, 3)] = re(g24);
        g[(2, 2)] = re(-s5 * l2);
        g[(2, 3)] = im(-l * s5);
        g[(3, 3)] = re(f(3.0) + (f(3.0) + s5) * l2 * (l2 - f(3.0)));
    } else {
        // fully complex spectrum
        g[(0, 0)] = re(-f(3.0) + f(2.0) * l2);
        g[(0, 1)] = im(l * (-f(3.0) + f(2.0) * l2));
        g[(0, 2)] = re(l2 + T::one());
        g[(0, 3)] = im(-l * (l2 - f(4.0)));
        g[(1, 1)] = re(f(2.0) - f(9.0) * l2 + f(4.0) * l4);
        g[(1, 2)] = im(-(l3 + l));
        g[(1, 3)] = re(-T::one() + f(7.0) * l2 - f(2.0) * l4);
        g[(2, 2)] = re(-f(2.0) + f(3.0) * l2);
        g[(2, 3)] = im(l * (-f(3.0) + f(2.0) * l2));
        g[(3, 3)] = re(f(3.0) - f(16.0) * l2 + f(6.0) * l4);
    }
    // fill the lower triangle from Hermiticity
    for i in 0..4usize {
        for j in (i + 1)..4 {
            g[(j, i)] = g[(i, j)].conj();
        }
    }
    g
}

/// PT-invariance residual `||P conj(H) P - H||_F` with P the antidiagonal
/// site reversal.
pub fn pt_invariance_residual<T: Scalar>(h: &ComplexMatrix<T>) -> T {
    let n = h.dim();
    let mut dev = T::zero();
    for i in 0..n {
        for j in 0..n {
            let transformed = h[(n - 1 - i, n - 1 - j)].conj();
            dev = dev + (transformed - h[(i, j)]).norm_sqr();
        }
    }
    dev.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigendecompose;
    fn c64(re: f64, im: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(re, im)
    }

    #[test]
    fn two_level_matrix() {
        let h = Model::TwoLevel.hamiltonian(0.7f64);
        assert_eq!(h[(0, 0)], c64(0.0, 0.7));
        assert_eq!(h[(0, 1)], c64(-1.0, 0.0));
        assert_eq!(h[(1, 0)], c64(-1.0, 0.0));
        assert_eq!(h[(1, 1)], c64(0.0, -0.7));
    }

    #[test]
    fn lattice_pt_hermitian_limit_is_real_tridiagonal() {
        let h = Model::LatticePt { sites: 4 }.hamiltonian(0.0f64);
        for i in 0..4usize {
            for j in 0..4 {
                let expect = if i.abs_diff(j) == 1 { c64(-1.0, 0.0) } else { c64(0.0, 0.0) };
                assert_eq!(h[(i, j)], expect);
            }
        }
    }

    #[test]
    fn lattice_pt_l2_equals_two_level() {
        let a = Model::LatticePt { sites: 2 }.hamiltonian(0.37f64);
        let b = Model::TwoLevel.hamiltonian(0.37f64);
        assert_eq!(a, b);
    }

    #[test]
    fn staggered_l8_r2_diagonal() {
        // window is 1-based sites 3..=6 with alternating signs starting +
        let h = Model::LatticeStaggered { sites: 8, span: 2 }.hamiltonian(0.3f64);
        let expect = [0.0, 0.0, 0.3, -0.3, 0.3, -0.3, 0.0, 0.0];
        for (i, &im) in expect.iter().enumerate() {
            assert_eq!(h[(i, i)], c64(0.0, im));
        }
    }

    #[test]
    fn four_level_is_staggered_l4_r2() {
        let a = Model::FourLevel.hamiltonian(0.3f64);
        let b = Model::LatticeStaggered { sites: 4, span: 2 }.hamiltonian(0.3f64);
        assert_eq!(a, b);
    }

    #[test]
    fn pt_invariance_of_all_families() {
        let models = [
            Model::TwoLevel,
            Model::FourLevel,
            Model::LatticePt { sites: 8 },
            Model::LatticeStaggered { sites: 8, span: 2 },
            Model::LatticeStaggered { sites: 12, span: 3 },
        ];
        for m in models {
            let h = m.hamiltonian(0.4f64);
            assert!(pt_invariance_residual(&h) == 0.0, "{m:?} not PT invariant");
        }
    }

    #[test]
    fn d_dlambda_is_exact_difference_pattern() {
        for m in [Model::TwoLevel, Model::FourLevel, Model::LatticeStaggered { sites: 8, span: 2 }] {
            let dh = m.d_dlambda::<f64>();
            let diff = m.hamiltonian(1.0f64).sub(&m.hamiltonian(0.0f64));
            assert_eq!(dh, diff);
            // pure imaginary diagonal
            for i in 0..m.dim() {
                assert_eq!(dh[(i, i)].re, 0.0);
            }
        }
        assert_eq!(Model::TwoLevel.d_dlambda::<f64>()[(0, 0)], c64(0.0, 1.0));
        let dh4 = Model::FourLevel.d_dlambda::<f64>();
        for i in 0..4usize {
            assert_eq!(dh4[(i, i)], c64(0.0, if i % 2 == 0 { 1.0 } else { -1.0 }));
        }
    }

    #[test]
    fn d_dlambda_matches_finite_difference_exactly() {
        // H is affine in λ, so any step gives the exact derivative
        let m = Model::LatticeStaggered { sites: 8, span: 2 };
        for h_step in [0.5f64, 1e-3] {
            let lam = 0.3f64;
            let num = m
                .hamiltonian(lam + h_step)
                .sub(&m.hamiltonian(lam - h_step))
                .scale(c64(1.0 / (2.0 * h_step), 0.0));
            assert!(num.sub(&m.d_dlambda()).norm_fro() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Model::LatticePt { sites: 5 }.validate().is_err());
        assert!(Model::LatticeStaggered { sites: 8, span: 5 }.validate().is_err());
        assert!(Model::LatticeStaggered { sites: 8, span: 0 }.validate().is_err());
        assert!(Model::from_cli("bogus", None, None).is_err());
    }

    #[test]
    fn two_level_closed_form_branches() {
        let cf = Model::TwoLevel.closed_form::<f64>().unwrap();
        assert_eq!(cf.critical_points, vec![1.0]);
        let e = cf.eigenvalue(1, 0.6);
        assert!((e - c64(0.8, 0.0)).norm() < 1e-15);
        // broken branch: continuity-fixed sign, E_+ = +i sqrt(λ²-1)
        let eb = cf.eigenvalue(1, 1.25);
        assert!((eb - c64(0.0, 0.75)).norm() < 1e-15);
        let d = cf.d_eigenvalue(1, 0.6);
        assert!((d - c64(-0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn four_level_closed_form_matches_eigensolver_across_regions() {
        let cf = Model::FourLevel.closed_form::<f64>().unwrap();
        assert!((cf.critical_points[0] - 0.6180339887498949).abs() < 1e-15);
        assert!((cf.critical_points[1] - 1.618033988749895).abs() < 1e-15);
        for &lam in &[0.1, 0.3, 0.5, 0.8, 1.0, 1.4, 1.8, 2.0, 2.2] {
            if cf.near_critical(lam, 1e-3) {
                continue;
            }
            let spec = eigendecompose(&Model::FourLevel.hamiltonian(lam), 1e-12).unwrap();
            for &e in &spec.eigenvalues {
                let b = cf.nearest_branch(e, lam);
                assert!(
                    (cf.eigenvalue(b, lam) - e).norm() < 1e-10,
                    "lam={lam}, e={e}, branch={b}"
                );
            }
        }
    }

    #[test]
    fn four_level_broken_branch_value() {
        // E1 continued past the first critical coupling: -i sqrt((-3+√5+2λ²)/2)
        let cf = Model::FourLevel.closed_form::<f64>().unwrap();
        let e = cf.eigenvalue(0, 1.0);
        let expect = -((5.0f64.sqrt() - 1.0) / 2.0).sqrt();
        assert!((e - c64(0.0, expect)).norm() < 1e-15, "got {e}, expect {expect}i");
    }
}
