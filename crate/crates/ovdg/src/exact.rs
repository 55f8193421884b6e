//! Closed-form reference solutions.
//!
//! Three families are used to validate the solvers:
//!
//! * a forced smooth wave u = sin(x + t) for convergence tables,
//! * a periodic corner wave (peakon) advecting with speed 1/36,
//! * soliton solutions of the hodograph-transformed system, built from
//!   exponential-sum tau functions.
//!
//! The tau-function solutions are evaluated through the log-derivatives of
//! f(y, s) = sum_a exp(p_a s + r_a y + d_a). Those log-derivatives are joint
//! cumulants of the discrete distribution that puts weight proportional to
//! exp(theta_a) on the pair (p_a, r_a), which gives stable closed forms for
//! every partial derivative needed here; exponents are shifted by their
//! running maximum so no intermediate overflows.

use crate::error::{OvdgError, Result};

/// Smooth reference solution u = sin(x + t) on [0, 2*pi], for gamma = +1.
pub fn manufactured(x: f64, t: f64) -> f64 {
    (x + t).sin()
}

/// Zero-mean primitive of the smooth solution: v = -cos(x + t).
pub fn manufactured_primitive(x: f64, t: f64) -> f64 {
    -(x + t).cos()
}

/// Forcing that makes u = sin(x + t) solve
/// u_t + (u^2/2)_x + v = g with v_x = u, v zero-mean.
pub fn manufactured_source(x: f64, t: f64) -> f64 {
    0.5 * (2.0 * (x + t)).sin()
}

/// Advection period of the corner wave on [0, 1].
pub const PEAKON_PERIOD: f64 = 36.0;

/// Piecewise quadratic corner wave for gamma = -1 on [0, 1], periodic,
/// travelling with speed 1/36.
pub fn peakon(x: f64, t: f64) -> f64 {
    let s = (x - t / PEAKON_PERIOD).rem_euclid(1.0);
    let z = s - 0.5;
    if s <= 0.5 {
        z * z / 6.0 + z / 6.0 + 1.0 / 36.0
    } else {
        z * z / 6.0 - z / 6.0 + 1.0 / 36.0
    }
}

/// Initial data for the shock-forming run on [0, 1], gamma = -1.
pub fn shock_initial(x: f64) -> f64 {
    -0.05 * (2.0 * std::f64::consts::PI * x).cos()
}

/// Parameters of a one- or two-soliton tau function.
///
/// Phases are eta_i = k_i * s + 3 k_i / (k_i^2 - c) * y + eta_i0.
#[derive(Debug, Clone, Copy)]
pub struct SolitonParams {
    pub k1: f64,
    pub k2: Option<f64>,
    pub c: f64,
    pub eta10: f64,
    pub eta20: f64,
}

impl SolitonParams {
    pub fn one(k1: f64, c: f64, eta10: f64) -> Self {
        SolitonParams {
            k1,
            k2: None,
            c,
            eta10,
            eta20: 0.0,
        }
    }

    pub fn two(k1: f64, k2: f64, c: f64, eta10: f64, eta20: f64) -> Self {
        SolitonParams {
            k1,
            k2: Some(k2),
            c,
            eta10,
            eta20,
        }
    }
}

/// Interaction coefficient of the two-soliton tau function.
pub fn interaction_coefficient(k1: f64, k2: f64, c: f64) -> f64 {
    let num = (k1 - k2).powi(2) * (k1 * k1 - k1 * k2 + k2 * k2 - 3.0 * c);
    let den = (k1 + k2).powi(2) * (k1 * k1 + k1 * k2 + k2 * k2 - 3.0 * c);
    num / den
}

#[derive(Debug, Clone, Copy)]
struct TauTerm {
    p: f64,
    r: f64,
    log_coeff: f64,
}

/// Tau function f(y, s) = sum_a exp(p_a s + r_a y + d_a) with positive
/// coefficients.
#[derive(Debug, Clone)]
pub struct ExpSumTau {
    terms: Vec<TauTerm>,
}

/// Build the tau function for a soliton parameter set.
pub fn build_tau(params: &SolitonParams) -> Result<ExpSumTau> {
    let phase_slope = |k: f64| -> Result<f64> {
        let den = k * k - params.c;
        if den.abs() < 1e-12 {
            return Err(OvdgError::InvalidConfig(format!(
                "soliton wavenumber k = {k} makes k^2 - c vanish"
            )));
        }
        Ok(3.0 * k / den)
    };
    if !(params.k1 > 0.0) {
        return Err(OvdgError::InvalidConfig(format!(
            "soliton wavenumber k1 = {} must be positive",
            params.k1
        )));
    }
    let r1 = phase_slope(params.k1)?;
    let mut terms = vec![
        TauTerm {
            p: 0.0,
            r: 0.0,
            log_coeff: 0.0,
        },
        TauTerm {
            p: params.k1,
            r: r1,
            log_coeff: params.eta10,
        },
    ];
    if let Some(k2) = params.k2 {
        if !(k2 > 0.0) {
            return Err(OvdgError::InvalidConfig(format!(
                "soliton wavenumber k2 = {k2} must be positive"
            )));
        }
        let r2 = phase_slope(k2)?;
        let b12 = interaction_coefficient(params.k1, k2, params.c);
        if !b12.is_finite() || b12 <= 0.0 {
            return Err(OvdgError::InvalidConfig(format!(
                "soliton parameters k1 = {}, k2 = {k2}, c = {} give a \
                 non-positive interaction coefficient {b12:.3e}; the \
                 two-soliton tau function requires positive coefficients",
                params.k1, params.c,
            )));
        }
        terms.push(TauTerm {
            p: k2,
            r: r2,
            log_coeff: params.eta20,
        });
        terms.push(TauTerm {
            p: params.k1 + k2,
            r: r1 + r2,
            log_coeff: params.eta10 + params.eta20 + b12.ln(),
        });
    }
    Ok(ExpSumTau { terms })
}

/// Centered joint moments of (p, r) under the tilted weights.
struct Moments {
    ep: f64,
    m20: f64,
    m11: f64,
    m30: f64,
    m21: f64,
    m12: f64,
    m31: f64,
}

impl ExpSumTau {
    /// log f(y, s), shifted-exponent evaluation.
    pub fn ln_tau(&self, y: f64, s: f64) -> f64 {
        let theta_max = self
            .terms
            .iter()
            .map(|t| t.p * s + t.r * y + t.log_coeff)
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self
            .terms
            .iter()
            .map(|t| (t.p * s + t.r * y + t.log_coeff - theta_max).exp())
            .sum();
        theta_max + total.ln()
    }

    fn moments(&self, y: f64, s: f64) -> Moments {
        let theta_max = self
            .terms
            .iter()
            .map(|t| t.p * s + t.r * y + t.log_coeff)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut ep = 0.0;
        let mut er = 0.0;
        let weights: Vec<f64> = self
            .terms
            .iter()
            .map(|t| {
                let w = (t.p * s + t.r * y + t.log_coeff - theta_max).exp();
                total += w;
                ep += w * t.p;
                er += w * t.r;
                w
            })
            .collect();
        ep /= total;
        er /= total;
        let mut m = Moments {
            ep,
            m20: 0.0,
            m11: 0.0,
            m30: 0.0,
            m21: 0.0,
            m12: 0.0,
            m31: 0.0,
        };
        for (t, &w) in self.terms.iter().zip(&weights) {
            let wn = w / total;
            let dp = t.p - ep;
            let dr = t.r - er;
            m.m20 += wn * dp * dp;
            m.m11 += wn * dp * dr;
            m.m30 += wn * dp * dp * dp;
            m.m21 += wn * dp * dp * dr;
            m.m12 += wn * dp * dr * dr;
            m.m31 += wn * dp * dp * dp * dr;
        }
        m
    }
}

/// Exact solution values of the coupled-dispersion system at one point of
/// the transformed (y, s) plane.
#[derive(Debug, Clone, Copy)]
pub struct CdPoint {
    pub u: f64,
    /// q = 1 / rho; crosses zero for loop solitons.
    pub q: f64,
    /// omega = u_y.
    pub omega: f64,
    /// Physical coordinate of the point: x = y - 2 (ln f)_s.
    pub x: f64,
}

/// s-derivatives of the exact solution, used for residual checks.
#[derive(Debug, Clone, Copy)]
pub struct CdSlope {
    pub u_s: f64,
    pub q_s: f64,
    pub omega_s: f64,
}

/// Evaluate the exact soliton solution.
///
/// u = -2 (ln f)_ss, q = 1 - 2 (ln f)_ys, omega = -2 (ln f)_ssy,
/// x = y - 2 (ln f)_s; the log-derivatives are cumulants of the tilted
/// two-point distribution, see the module docs.
pub fn cd_exact(tau: &ExpSumTau, y: f64, s: f64) -> CdPoint {
    let m = tau.moments(y, s);
    CdPoint {
        u: -2.0 * m.m20,
        q: 1.0 - 2.0 * m.m11,
        omega: -2.0 * m.m21,
        x: y - 2.0 * m.ep,
    }
}

/// s-derivatives of (u, q, omega) from fourth-order cumulants.
pub fn cd_exact_s_derivatives(tau: &ExpSumTau, y: f64, s: f64) -> CdSlope {
    let m = tau.moments(y, s);
    CdSlope {
        u_s: -2.0 * m.m30,
        q_s: -2.0 * m.m21,
        omega_s: -2.0 * (m.m31 - 3.0 * m.m20 * m.m11),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn manufactured_solves_the_split_system() {
        // Closed-form residual of u_t + (u^2/2)_x + v - g, v the zero-mean
        // primitive of u.
        for i in 0..50 {
            let x = 0.13 * i as f64;
            let t = 0.37 * (i % 7) as f64;
            let res = (x + t).cos() + (x + t).sin() * (x + t).cos()
                + manufactured_primitive(x, t)
                - manufactured_source(x, t);
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn manufactured_residual_by_finite_differences() {
        let d = 1e-5;
        for i in 0..40 {
            let x = 0.16 * i as f64;
            let t = 0.1 + 0.05 * i as f64;
            let u_t = (manufactured(x, t + d) - manufactured(x, t - d)) / (2.0 * d);
            let flux_x = (manufactured(x + d, t).powi(2) - manufactured(x - d, t).powi(2))
                / (2.0 * 2.0 * d);
            let res = u_t + flux_x + manufactured_primitive(x, t) - manufactured_source(x, t);
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn manufactured_primitive_is_consistent() {
        let d = 1e-6;
        for i in 0..20 {
            let x = 0.3 * i as f64;
            let dv = (manufactured_primitive(x + d, 0.4) - manufactured_primitive(x - d, 0.4))
                / (2.0 * d);
            assert_abs_diff_eq!(dv, manufactured(x, 0.4), epsilon = 1e-9);
        }
    }

    #[test]
    fn peakon_values_and_continuity() {
        assert_relative_eq!(peakon(0.5, 0.0), 1.0 / 36.0, epsilon = 1e-15);
        assert_relative_eq!(peakon(0.0, 0.0), -1.0 / 72.0, epsilon = 1e-15);
        // Continuous at the corner and across the periodic wrap.
        assert_abs_diff_eq!(
            peakon(0.5 - 1e-12, 0.0),
            peakon(0.5 + 1e-12, 0.0),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(peakon(1.0 - 1e-12, 0.0), peakon(0.0, 0.0), epsilon = 1e-9);
        // Advects with period 36.
        for &x in &[0.1, 0.42, 0.8] {
            assert_abs_diff_eq!(peakon(x, PEAKON_PERIOD), peakon(x, 0.0), epsilon = 1e-15);
            assert_abs_diff_eq!(peakon(x, 9.0), peakon(x - 0.25, 0.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn peakon_residual_away_from_corners() {
        // (u_t + u u_x)_x - u = 0 pointwise off the corner set (gamma = -1).
        let d = 1e-5;
        let g = |x: f64, t: f64| {
            let u_t = (peakon(x, t + d) - peakon(x, t - d)) / (2.0 * d);
            let u_x = (peakon(x + d, t) - peakon(x - d, t)) / (2.0 * d);
            u_t + peakon(x, t) * u_x
        };
        for &x in &[0.12, 0.3, 0.62, 0.88] {
            for &t in &[0.0, 1.0, 7.3] {
                // Skip points whose stencil straddles a corner.
                let s = (x - t / PEAKON_PERIOD).rem_euclid(1.0);
                if (s - 0.5).abs() < 0.05 || s < 0.05 || s > 0.95 {
                    continue;
                }
                let res = (g(x + d, t) - g(x - d, t)) / (2.0 * d) - peakon(x, t);
                assert_abs_diff_eq!(res, 0.0, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn shock_initial_has_zero_mean_and_expected_amplitude() {
        assert_relative_eq!(shock_initial(0.0), -0.05, epsilon = 1e-15);
        assert_relative_eq!(shock_initial(0.5), 0.05, epsilon = 1e-15);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|i| shock_initial((i as f64 + 0.5) / n as f64))
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn interaction_coefficient_for_cuspon_parameters() {
        // Frozen from the closed form: (k1 - k2)^2 (k1^2 - k1 k2 + k2^2 - 3c)
        // over (k1 + k2)^2 (k1^2 + k1 k2 + k2^2 - 3c) at (2.0, 2.6, -2.0).
        let b12 = interaction_coefficient(2.0, 2.6, -2.0);
        assert_relative_eq!(b12, 8.956e-3, max_relative = 1e-3);
        assert!(interaction_coefficient(1.2, 1.5, 0.0) > 0.0);
    }

    #[test]
    fn build_tau_rejects_degenerate_parameter_sets() {
        assert!(build_tau(&SolitonParams::one(1.0, 1.0, 0.0)).is_err()); // k^2 = c
        assert!(build_tau(&SolitonParams::one(-1.0, 2.0, 0.0)).is_err());
        assert!(build_tau(&SolitonParams::two(1.3, 1.3, -1.0, 0.0, 0.0)).is_err()); // b12 = 0
        assert!(build_tau(&SolitonParams::two(1.0, 2.0, 7.0 / 3.0, 0.0, 0.0)).is_err());
        assert!(build_tau(&SolitonParams::one(1.0, 2.0, 0.0)).is_ok());
        assert!(build_tau(&SolitonParams::two(2.0, 2.6, -2.0, -40.0, -52.0)).is_ok());
    }

    #[test]
    fn one_soliton_amplitude_and_far_field() {
        // k1 = 1, c = 2 gives phase slope r1 = -3 and trough depth k1^2 / 2.
        let tau = build_tau(&SolitonParams::one(1.0, 2.0, 0.0)).unwrap();
        let mut umin = f64::MAX;
        for i in 0..4000 {
            let y = -20.0 + 40.0 * i as f64 / 4000.0;
            umin = umin.min(cd_exact(&tau, y, 0.0).u);
        }
        assert_relative_eq!(umin, -0.5, epsilon = 1e-5);
        let far = cd_exact(&tau, 15.0, 0.0);
        assert_abs_diff_eq!(far.u, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(far.q, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn large_phases_do_not_overflow() {
        let tau = build_tau(&SolitonParams::two(2.0, 2.6, -2.0, -40.0, -52.0)).unwrap();
        for &(y, s) in &[(1e3, 0.0), (-1e3, 0.0), (0.0, 1e3), (-500.0, 800.0)] {
            let p = cd_exact(&tau, y, s);
            assert!(p.u.is_finite() && p.q.is_finite() && p.omega.is_finite() && p.x.is_finite());
        }
    }

    #[test]
    fn tau_log_derivatives_match_finite_differences() {
        let tau = build_tau(&SolitonParams::two(1.2, 1.5, 0.0, -24.0, -30.0)).unwrap();
        let d = 1e-5;
        for &(y, s) in &[(3.0, 10.0), (7.5, 20.0), (-2.0, 18.0), (12.0, 24.0)] {
            let p = cd_exact(&tau, y, s);
            // u = -2 d^2/ds^2 ln f; a wider step keeps the second
            // difference of the large log values out of roundoff.
            let d2 = 1e-3;
            let u_fd = -2.0
                * (tau.ln_tau(y, s + d2) - 2.0 * tau.ln_tau(y, s) + tau.ln_tau(y, s - d2))
                / (d2 * d2);
            assert_abs_diff_eq!(p.u, u_fd, epsilon = 1e-5);
            // omega = u_y, q_y-consistency of x, and x_s = u.
            let om_fd = (cd_exact(&tau, y + d, s).u - cd_exact(&tau, y - d, s).u) / (2.0 * d);
            assert_abs_diff_eq!(p.omega, om_fd, epsilon = 1e-7);
            let xy_fd = (cd_exact(&tau, y + d, s).x - cd_exact(&tau, y - d, s).x) / (2.0 * d);
            assert_abs_diff_eq!(p.q, xy_fd, epsilon = 1e-7);
            let xs_fd = (cd_exact(&tau, y, s + d).x - cd_exact(&tau, y, s - d).x) / (2.0 * d);
            assert_abs_diff_eq!(p.u, xs_fd, epsilon = 1e-7);
            // s-derivatives.
            let sl = cd_exact_s_derivatives(&tau, y, s);
            let us_fd = (cd_exact(&tau, y, s + d).u - cd_exact(&tau, y, s - d).u) / (2.0 * d);
            assert_abs_diff_eq!(sl.u_s, us_fd, epsilon = 1e-7);
            let qs_fd = (cd_exact(&tau, y, s + d).q - cd_exact(&tau, y, s - d).q) / (2.0 * d);
            assert_abs_diff_eq!(sl.q_s, qs_fd, epsilon = 1e-7);
            let os_fd =
                (cd_exact(&tau, y, s + d).omega - cd_exact(&tau, y, s - d).omega) / (2.0 * d);
            assert_abs_diff_eq!(sl.omega_s, os_fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn soliton_solutions_satisfy_the_cd_system() {
        // q_s = u_y and u_ys + gamma q u + c (1 - q) = 0 with gamma = -3.
        let gamma = -3.0;
        let cases = [
            (SolitonParams::one(1.0, 2.0, 0.0), 2.0),
            (SolitonParams::two(2.0, 2.6, -2.0, -40.0, -52.0), -2.0),
            (SolitonParams::two(1.2, 1.5, 0.0, -24.0, -30.0), 0.0),
        ];
        for (params, c) in cases {
            let tau = build_tau(&params).unwrap();
            for i in 0..40 {
                let y = -19.0 + 38.0 * i as f64 / 39.0;
                for &s in &[0.0, 5.0, 20.0, 33.0] {
                    let p = cd_exact(&tau, y, s);
                    let sl = cd_exact_s_derivatives(&tau, y, s);
                    let scale = 1.0 + p.u.abs() + p.q.abs();
                    assert_abs_diff_eq!(sl.q_s, p.omega, epsilon = 1e-12 * scale);
                    let res = sl.omega_s + gamma * p.q * p.u + c * (1.0 - p.q);
                    assert_abs_diff_eq!(res, 0.0, epsilon = 1e-9 * scale);
                    // Same residual with a finite-difference omega_s.
                    let d = 1e-5;
                    let os_fd = (cd_exact(&tau, y, s + d).omega
                        - cd_exact(&tau, y, s - d).omega)
                        / (2.0 * d);
                    let res_fd = os_fd + gamma * p.q * p.u + c * (1.0 - p.q);
                    assert_abs_diff_eq!(res_fd, 0.0, epsilon = 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn cuspon_and_loop_regimes_differ_in_q_sign() {
        let cuspon_tau = build_tau(&SolitonParams::two(2.0, 2.6, -2.0, -40.0, -52.0)).unwrap();
        let loop_tau = build_tau(&SolitonParams::two(1.2, 1.5, 0.0, -24.0, -30.0)).unwrap();
        let (mut qmin_c, mut qmin_l) = (f64::MAX, f64::MAX);
        for i in 0..8000 {
            let y = -20.0 + 40.0 * i as f64 / 8000.0;
            qmin_c = qmin_c.min(cd_exact(&cuspon_tau, y, 40.0).q);
            qmin_l = qmin_l.min(cd_exact(&loop_tau, y, 10.0).q);
        }
        assert!(qmin_c >= -1e-9, "cuspon q dipped to {qmin_c}");
        assert!(qmin_l < -0.3, "loop q min {qmin_l} not negative");
    }
}
