//! Gauss–Legendre quadrature with nodes and weights computed by Newton
//! iteration on the Legendre recurrence.

use crate::scalar::{from_f64, Scalar};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T: Scalar> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = from_f64::<T>(n as f64);
        for i in 0..n {
            // Tricomi-style initial guess, then Newton
            let theta = from_f64::<T>(std::f64::consts::PI) * (from_f64::<T>(i as f64) + from_f64(0.75))
                / (nf + from_f64(0.5));
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x = x - step;
                if step.abs() <= T::epsilon() * from_f64(4.0) {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = from_f64::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        }
        // Newton's guesses walk from +1 down; store ascending
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights scaled to `[-cut, cut]`.
    pub fn scaled(&self, cut: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (x * cut, w * cut))
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = from_f64::<T>(0.5);
        let mid = (a + b) * half;
        let span = (b - a) * half;
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + span * x);
        }
        acc * span
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 1..n {
        let kf = from_f64::<T>(k as f64);
        let next = ((from_f64::<T>(2.0) * kf + T::one()) * x * p - kf * p_prev) / (kf + T::one());
        p_prev = p;
        p = next;
    }
    let d = from_f64::<T>(n as f64) * (x * p - p_prev) / (x * x - T::one());
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // an n-point rule is exact for degree 2n-1
        let rule = GaussLegendre::<f64>::new(6);
        let exact = 2.0 / 12.0 + 2.0 / 4.0; // ∫ x^11 = 0, ∫ (x^11 + x^2/2 + 3x^3)… keep simple:
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(11) + 0.5 * x * x + 3.0 * x.powi(3));
        let expect = 2.0 * 0.5 / 3.0;
        let _ = exact;
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 32, 129] {
            let rule = GaussLegendre::<f64>::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn gaussian_integral_on_truncated_box() {
        let rule = GaussLegendre::<f64>::new(64);
        let got = rule.integrate(-8.0, 8.0, |x| (-x * x).exp());
        assert!((got - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nodes_ascend_and_are_symmetric() {
        let rule = GaussLegendre::<f64>::new(7);
        for w in rule.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..7 {
            assert!((rule.nodes[i] + rule.nodes[6 - i]).abs() < 1e-14);
        }
    }
}
