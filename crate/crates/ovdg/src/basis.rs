//! Legendre polynomials and the orthonormal modal basis used on each cell.
//!
//! On a cell of width h the basis functions are
//!
//! ```text
//! phi_m(x) = sqrt(2/h) * psi_m(xi),    psi_m(xi) = sqrt(m + 1/2) * P_m(xi),
//! ```
//!
//! with xi in [-1, 1] the cell-local coordinate. The psi_m are orthonormal
//! on the reference interval, so the cell mass matrix is the identity and
//! L2 inner products of fields reduce to dot products of coefficients.

use crate::error::Result;
use crate::quad::{gauss_rule, QuadRule};

/// P_n(x) and its derivative by the Bonnet recurrences.
pub fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut d0) = (1.0, 0.0);
    if n == 0 {
        return (p0, d0);
    }
    let (mut p1, mut d1) = (x, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
        let d2 = d0 + (2.0 * mf + 1.0) * p1;
        (p0, d0) = (p1, d1);
        (p1, d1) = (p2, d2);
    }
    (p1, d1)
}

/// psi_0..psi_degree at xi, written into `out` (length degree + 1).
pub fn eval_orthonormal(degree: usize, xi: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), degree + 1);
    let mut p0 = 1.0;
    out[0] = norm_factor(0);
    if degree == 0 {
        return;
    }
    let mut p1 = xi;
    out[1] = norm_factor(1) * p1;
    for m in 1..degree {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * xi * p1 - mf * p0) / (mf + 1.0);
        out[m + 1] = norm_factor(m + 1) * p2;
        (p0, p1) = (p1, p2);
    }
}

/// psi_m and psi_m' at xi, written into `vals` and `derivs`.
pub fn eval_orthonormal_with_deriv(degree: usize, xi: f64, vals: &mut [f64], derivs: &mut [f64]) {
    debug_assert_eq!(vals.len(), degree + 1);
    debug_assert_eq!(derivs.len(), degree + 1);
    let (mut p0, mut d0) = (1.0, 0.0);
    vals[0] = norm_factor(0);
    derivs[0] = 0.0;
    if degree == 0 {
        return;
    }
    let (mut p1, mut d1) = (xi, 1.0);
    vals[1] = norm_factor(1) * p1;
    derivs[1] = norm_factor(1) * d1;
    for m in 1..degree {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * xi * p1 - mf * p0) / (mf + 1.0);
        let d2 = d0 + (2.0 * mf + 1.0) * p1;
        vals[m + 1] = norm_factor(m + 1) * p2;
        derivs[m + 1] = norm_factor(m + 1) * d2;
        (p0, d0) = (p1, d1);
        (p1, d1) = (p2, d2);
    }
}

fn norm_factor(m: usize) -> f64 {
    (m as f64 + 0.5).sqrt()
}

/// Reference trace values (psi_m(-1), psi_m(+1)).
pub fn end_values(degree: usize) -> (Vec<f64>, Vec<f64>) {
    let right: Vec<f64> = (0..=degree).map(norm_factor).collect();
    let left: Vec<f64> = right
        .iter()
        .enumerate()
        .map(|(m, &v)| if m % 2 == 0 { v } else { -v })
        .collect();
    (left, right)
}

/// d[m][n] = integral of psi_n * psi_m' over [-1, 1], row-major.
///
/// The entry is sqrt((2m+1)(2n+1)) when m > n and m + n is odd, else 0,
/// so the matrix is strictly lower triangular.
pub fn deriv_inner(degree: usize) -> Vec<f64> {
    let w = degree + 1;
    let mut d = vec![0.0; w * w];
    for m in 0..=degree {
        for n in 0..m {
            if (m + n) % 2 == 1 {
                d[m * w + n] = ((2 * m + 1) as f64 * (2 * n + 1) as f64).sqrt();
            }
        }
    }
    d
}

/// Coefficients of the reference antiderivative.
///
/// Given psi-coefficients of U (degree d), returns psi-coefficients of
/// A(xi) = integral of U from -1 to xi (degree d + 1). Uses the Legendre
/// identity (2m+1) * P_m = P_{m+1}' - P_{m-1}'.
pub fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    // Rescale to standard Legendre coefficients.
    let std: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(m, &c)| c * norm_factor(m))
        .collect();
    let mut b = vec![0.0; deg + 2];
    // integral of P_0 from -1 is xi + 1 = P_0 + P_1; for m >= 1 the lower
    // limit drops out because P_{m+1}(-1) = P_{m-1}(-1).
    b[0] += std[0];
    b[1] += std[0];
    for (m, &a) in std.iter().enumerate().skip(1) {
        let inv = 1.0 / (2.0 * m as f64 + 1.0);
        b[m + 1] += a * inv;
        b[m - 1] -= a * inv;
    }
    b.iter()
        .enumerate()
        .map(|(m, &v)| v / norm_factor(m))
        .collect()
}

/// Values (and derivatives) of psi_0..psi_degree tabulated at the nodes
/// of a quadrature rule, indexed `[q * (degree + 1) + m]`.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub degree: usize,
    pub rule: &'static QuadRule,
    pub vals: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl BasisTable {
    pub fn new(degree: usize, n_points: usize) -> Result<Self> {
        let rule = gauss_rule(n_points)?;
        let w = degree + 1;
        let mut vals = vec![0.0; rule.len() * w];
        let mut derivs = vec![0.0; rule.len() * w];
        for (q, &xi) in rule.nodes.iter().enumerate() {
            eval_orthonormal_with_deriv(
                degree,
                xi,
                &mut vals[q * w..(q + 1) * w],
                &mut derivs[q * w..(q + 1) * w],
            );
        }
        Ok(BasisTable {
            degree,
            rule,
            vals,
            derivs,
        })
    }

    pub fn n_points(&self) -> usize {
        self.rule.len()
    }

    pub fn row(&self, q: usize) -> &[f64] {
        let w = self.degree + 1;
        &self.vals[q * w..(q + 1) * w]
    }

    pub fn deriv_row(&self, q: usize) -> &[f64] {
        let w = self.degree + 1;
        &self.derivs[q * w..(q + 1) * w]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn orthonormal_on_reference_interval() {
        let rule = gauss_rule(16).unwrap();
        let deg = 5;
        for m in 0..=deg {
            for n in 0..=deg {
                let mut vm = vec![0.0; deg + 1];
                let mut vn = vec![0.0; deg + 1];
                let got = rule.integrate(|x| {
                    eval_orthonormal(deg, x, &mut vm);
                    eval_orthonormal(deg, x, &mut vn);
                    vm[m] * vn[n]
                });
                let want = if m == n { 1.0 } else { 0.0 };
                assert_relative_eq!(got, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn end_values_match_direct_evaluation() {
        let deg = 4;
        let (left, right) = end_values(deg);
        let mut v = vec![0.0; deg + 1];
        eval_orthonormal(deg, -1.0, &mut v);
        for m in 0..=deg {
            assert_relative_eq!(left[m], v[m], epsilon = 1e-14);
        }
        eval_orthonormal(deg, 1.0, &mut v);
        for m in 0..=deg {
            assert_relative_eq!(right[m], v[m], epsilon = 1e-14);
        }
    }

    #[test]
    fn deriv_inner_matches_quadrature() {
        let deg = 4;
        let rule = gauss_rule(10).unwrap();
        let d = deriv_inner(deg);
        let w = deg + 1;
        for m in 0..=deg {
            for n in 0..=deg {
                let mut vals = vec![0.0; w];
                let mut ders = vec![0.0; w];
                let got = rule.integrate(|x| {
                    eval_orthonormal_with_deriv(deg, x, &mut vals, &mut ders);
                    vals[n] * ders[m]
                });
                assert_relative_eq!(got, d[m * w + n], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn derivative_recurrence_matches_finite_differences() {
        let deg = 6;
        let mut vals = vec![0.0; deg + 1];
        let mut ders = vec![0.0; deg + 1];
        for &x in &[-0.9, -0.3, 0.1, 0.77] {
            eval_orthonormal_with_deriv(deg, x, &mut vals, &mut ders);
            let h = 1e-6;
            let mut lo = vec![0.0; deg + 1];
            let mut hi = vec![0.0; deg + 1];
            eval_orthonormal(deg, x - h, &mut lo);
            eval_orthonormal(deg, x + h, &mut hi);
            for m in 0..=deg {
                let fd = (hi[m] - lo[m]) / (2.0 * h);
                assert_relative_eq!(ders[m], fd, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn antiderivative_of_constant_is_affine() {
        // U = 1 has psi-coefficients [sqrt(2)]; its antiderivative from -1
        // is xi + 1.
        let c = antiderivative(&[std::f64::consts::SQRT_2]);
        let mut v = vec![0.0; c.len()];
        for &xi in &[-1.0, -0.25, 0.5, 1.0] {
            eval_orthonormal(c.len() - 1, xi, &mut v);
            let got: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert_relative_eq!(got, xi + 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn antiderivative_matches_quadrature_for_random_polynomial() {
        let coeffs = [0.3, -1.2, 0.7, 0.05];
        let anti = antiderivative(&coeffs);
        let deg = coeffs.len() - 1;
        let rule = gauss_rule(12).unwrap();
        let mut v = vec![0.0; deg + 2];
        for &xi in &[-0.6, 0.0, 0.4, 1.0] {
            // Map the rule from [-1, 1] onto [-1, xi].
            let half = (xi + 1.0) / 2.0;
            let want = half
                * rule.integrate(|z| {
                    let s = -1.0 + half * (z + 1.0);
                    let mut vv = vec![0.0; deg + 1];
                    eval_orthonormal(deg, s, &mut vv);
                    coeffs.iter().zip(&vv).map(|(a, b)| a * b).sum()
                });
            eval_orthonormal(deg + 1, xi, &mut v);
            let got: f64 = anti.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert_relative_eq!(got, want, epsilon = 1e-13);
        }
    }
}
