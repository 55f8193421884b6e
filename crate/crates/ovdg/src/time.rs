//! Strong-stability-preserving third-order Runge-Kutta time stepping.

use crate::error::{OvdgError, Result};
use crate::field::DGField;

/// State vectors the Runge-Kutta loop can combine linearly.
pub trait RkState: Clone {
    fn scale(&mut self, a: f64);
    fn scaled_add(&mut self, a: f64, other: &Self);
    fn is_finite(&self) -> bool;
}

impl RkState for DGField {
    fn scale(&mut self, a: f64) {
        DGField::scale(self, a);
    }
    fn scaled_add(&mut self, a: f64, other: &Self) {
        DGField::scaled_add(self, a, other);
    }
    fn is_finite(&self) -> bool {
        DGField::is_finite(self)
    }
}

impl RkState for f64 {
    fn scale(&mut self, a: f64) {
        *self *= a;
    }
    fn scaled_add(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl RkState for Vec<f64> {
    fn scale(&mut self, a: f64) {
        for x in self {
            *x *= a;
        }
    }
    fn scaled_add(&mut self, a: f64, other: &Self) {
        assert_eq!(self.len(), other.len());
        for (x, y) in self.iter_mut().zip(other) {
            *x += a * y;
        }
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

/// Time-step selection rule dt = cfl * h^pow on the smallest cell.
///
/// The default pow = 1 matches the spatial schemes up to third order; runs
/// with fourth-order spatial accuracy need pow > 1 so the O(dt^3) stepping
/// error stays below the spatial error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub cfl: f64,
    pub h_pow: f64,
}

impl StepPlan {
    pub fn new(cfl: f64) -> Self {
        StepPlan { cfl, h_pow: 1.0 }
    }

    pub fn with_power(cfl: f64, h_pow: f64) -> Self {
        StepPlan { cfl, h_pow }
    }

    pub fn dt(&self, h_min: f64) -> f64 {
        self.cfl * h_min.powf(self.h_pow)
    }
}

/// One step of the Shu-Osher SSP-RK3 scheme.
///
/// `rhs(u, t)` evaluates the semi-discrete right-hand side; `hook` runs
/// after every stage combination with the time level that stage
/// approximates (t + dt, t + dt/2, t + dt) and may modify the stage
/// (limiting, constraint re-solves).
pub fn ssp_rk3_step<S, F, H>(u: &S, t: f64, dt: f64, rhs: &mut F, hook: &mut H) -> Result<S>
where
    S: RkState,
    F: FnMut(&S, f64) -> Result<S>,
    H: FnMut(&mut S, f64) -> Result<()>,
{
    let mut s1 = u.clone();
    s1.scaled_add(dt, &rhs(u, t)?);
    hook(&mut s1, t + dt)?;

    let mut s2 = u.clone();
    s2.scale(0.75);
    s2.scaled_add(0.25, &s1);
    s2.scaled_add(0.25 * dt, &rhs(&s1, t + dt)?);
    hook(&mut s2, t + 0.5 * dt)?;

    let mut s3 = u.clone();
    s3.scale(1.0 / 3.0);
    s3.scaled_add(2.0 / 3.0, &s2);
    s3.scaled_add(2.0 / 3.0 * dt, &rhs(&s2, t + 0.5 * dt)?);
    hook(&mut s3, t + dt)?;
    Ok(s3)
}

/// March `state` from t0 to t1 with nominal step dt.
///
/// The final step is shortened so the integration lands on t1 exactly.
/// `observer` runs after every completed step with (state, t, step index);
/// a non-finite state aborts with the step that produced it. Returns the
/// number of steps taken.
pub fn integrate<S, F, H, O>(
    state: &mut S,
    t0: f64,
    t1: f64,
    dt: f64,
    rhs: &mut F,
    hook: &mut H,
    observer: &mut O,
) -> Result<usize>
where
    S: RkState,
    F: FnMut(&S, f64) -> Result<S>,
    H: FnMut(&mut S, f64) -> Result<()>,
    O: FnMut(&S, f64, usize) -> Result<()>,
{
    if t1 <= t0 {
        return Ok(0);
    }
    assert!(dt > 0.0, "time step must be positive");
    let span = t1 - t0;
    let n_steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
    let mut t = t0;
    for step in 0..n_steps {
        let t_next = if step + 1 == n_steps {
            t1
        } else {
            t0 + (step + 1) as f64 * dt
        };
        *state = ssp_rk3_step(state, t, t_next - t, rhs, hook)?;
        t = t_next;
        if !state.is_finite() {
            return Err(OvdgError::NonFinite { step, time: t });
        }
        observer(state, t, step)?;
    }
    Ok(n_steps)
}
