//! Gauss-Legendre quadrature on the reference interval [-1, 1].
//!
//! Rules are computed once by Newton iteration on the Legendre polynomial
//! and cached for the lifetime of the process. An n-point rule integrates
//! polynomials of degree 2n - 1 exactly.

use std::sync::OnceLock;

use crate::basis::legendre_with_deriv;
use crate::error::{OvdgError, Result};

/// Largest tabulated rule.
pub const MAX_POINTS: usize = 16;

#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Nodes in ascending order, symmetric about 0.
    pub nodes: Vec<f64>,
    /// Positive weights summing to 2.
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to `f` on [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// The n-point Gauss-Legendre rule, 1 <= n <= 16.
pub fn gauss_rule(n: usize) -> Result<&'static QuadRule> {
    if n == 0 || n > MAX_POINTS {
        return Err(OvdgError::UnsupportedQuadrature(n));
    }
    static TABLE: OnceLock<Vec<QuadRule>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (1..=MAX_POINTS).map(compute_rule).collect());
    Ok(&table[n - 1])
}

fn compute_rule(n: usize) -> QuadRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; compute the upper half and mirror.
    for i in 0..n.div_ceil(2) {
        // Standard asymptotic initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (_, d) = legendre_with_deriv(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in 1..=MAX_POINTS {
            let rule = gauss_rule(n).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        for n in 1..=MAX_POINTS {
            let rule = gauss_rule(n).unwrap();
            for i in 0..n {
                assert_relative_eq!(rule.nodes[i], -rule.nodes[n - 1 - i], epsilon = 1e-15);
                if i > 0 {
                    assert!(rule.nodes[i] > rule.nodes[i - 1]);
                }
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=MAX_POINTS {
            let rule = gauss_rule(n).unwrap();
            for deg in 0..2 * n {
                let got = rule.integrate(|x| x.powi(deg as i32));
                let want = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert_relative_eq!(got, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn three_points_integrate_quartic_two_points_do_not() {
        let three = gauss_rule(3).unwrap().integrate(|x| x.powi(4));
        assert_relative_eq!(three, 0.4, epsilon = 1e-14);
        let two = gauss_rule(2).unwrap().integrate(|x| x.powi(4));
        assert!((two - 0.4).abs() > 1e-2);
    }

    #[test]
    fn rejects_out_of_range_point_counts() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(MAX_POINTS + 1).is_err());
    }
}
