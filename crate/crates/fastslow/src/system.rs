//! Fast-slow system abstraction: states, trajectories, and derivative access.
//!
//! A [`FastSlowSystem`] is the pair of fields `(f, g)` of
//!
//! ```text
//! u' = f(u, v, t, eps),      eps * v' = g(u, v, t, eps),
//! ```
//!
//! with `u` the slow block (dimension `n`) and `v` the fast block
//! (dimension `m`). Both fields take `eps` explicitly so that the
//! eps-dependence of `g` is first-class; `eps = 0` is a legal evaluation
//! point even though the ODE itself is singular there.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A point on a trajectory: slow block `u`, fast block `v`, slow time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Self {
        State { t, u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.u.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
    }

    /// Concatenated `[u, v]` vector, the layout used by the integrators.
    pub fn flat(&self) -> Vec<f64> {
        let mut y = self.u.clone();
        y.extend_from_slice(&self.v);
        y
    }
}

/// Which first-derivative block of the model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianOf {
    /// dg/dv, m x m
    Gv,
    /// dg/du, m x n
    Gu,
    /// df/du, n x n
    Fu,
    /// df/dv, n x m
    Fv,
    /// dg/dt, m x 1
    Gt,
}

pub type FieldFn = dyn Fn(&[f64], &[f64], f64, f64) -> Vec<f64> + Send + Sync;
pub type JacFn = dyn Fn(&[f64], &[f64], f64, f64) -> Matrix + Send + Sync;
pub type SeedFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;
pub type SlowFieldFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;

/// A registered fast-slow ODE pair with optional analytic Jacobians and
/// model metadata used by the audits.
pub struct FastSlowSystem {
    pub name: String,
    /// Slow dimension.
    pub n: usize,
    /// Fast dimension.
    pub m: usize,
    /// Largest admissible eps.
    pub eps_max: f64,
    f: Box<FieldFn>,
    g: Box<FieldFn>,
    jac_gv: Option<Box<JacFn>>,
    jac_gu: Option<Box<JacFn>>,
    jac_fu: Option<Box<JacFn>>,
    jac_fv: Option<Box<JacFn>>,
    jac_gt: Option<Box<JacFn>>,
    /// Smoothness is declared by the model author, not machine-checked.
    pub declared_smooth: bool,
    /// Closed-form seed for the quasi-steady-state Newton solve, if known.
    qss_seed: Option<Box<SeedFn>>,
    /// Declared equilibria of the reduced flow, if any.
    pub slow_equilibria: Vec<Vec<f64>>,
    /// Replacement slow field for the reduced equation. Used by models that
    /// expose a literal transcription of a published reduced system next to
    /// the one derived from `f` and the quasi steady state.
    reduced_override: Option<Box<SlowFieldFn>>,
}

impl FastSlowSystem {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        eps_max: f64,
        f: Box<FieldFn>,
        g: Box<FieldFn>,
    ) -> Self {
        assert!(
            n >= 1 && m >= 1,
            "need at least one slow and one fast variable"
        );
        assert!(eps_max > 0.0);
        FastSlowSystem {
            name: name.into(),
            n,
            m,
            eps_max,
            f,
            g,
            jac_gv: None,
            jac_gu: None,
            jac_fu: None,
            jac_fv: None,
            jac_gt: None,
            declared_smooth: true,
            qss_seed: None,
            slow_equilibria: Vec::new(),
            reduced_override: None,
        }
    }

    pub fn with_jacobian(mut self, which: JacobianOf, j: Box<JacFn>) -> Self {
        match which {
            JacobianOf::Gv => self.jac_gv = Some(j),
            JacobianOf::Gu => self.jac_gu = Some(j),
            JacobianOf::Fu => self.jac_fu = Some(j),
            JacobianOf::Fv => self.jac_fv = Some(j),
            JacobianOf::Gt => self.jac_gt = Some(j),
        }
        self
    }

    pub fn with_qss_seed(mut self, seed: Box<SeedFn>) -> Self {
        self.qss_seed = Some(seed);
        self
    }

    pub fn with_slow_equilibria(mut self, eq: Vec<Vec<f64>>) -> Self {
        self.slow_equilibria = eq;
        self
    }

    pub fn with_reduced_override(mut self, field: Box<SlowFieldFn>) -> Self {
        self.reduced_override = Some(field);
        self
    }

    pub fn with_declared_smooth(mut self, smooth: bool) -> Self {
        self.declared_smooth = smooth;
        self
    }

    /// Slow field `f(u, v, t, eps)` with a finiteness check.
    pub fn f(&self, u: &[f64], v: &[f64], t: f64, eps: f64) -> Result<Vec<f64>> {
        let out = (self.f)(u, v, t, eps);
        debug_assert_eq!(out.len(), self.n);
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteOutput { t });
        }
        Ok(out)
    }

    /// Fast field `g(u, v, t, eps)` with a finiteness check.
    pub fn g(&self, u: &[f64], v: &[f64], t: f64, eps: f64) -> Result<Vec<f64>> {
        let out = (self.g)(u, v, t, eps);
        debug_assert_eq!(out.len(), self.m);
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteOutput { t });
        }
        Ok(out)
    }

    pub fn qss_seed(&self, u: &[f64], t: f64) -> Option<Vec<f64>> {
        self.qss_seed.as_ref().map(|s| s(u, t))
    }

    pub fn reduced_override(&self, u: &[f64], t: f64) -> Option<Vec<f64>> {
        self.reduced_override.as_ref().map(|s| s(u, t))
    }

    pub fn has_reduced_override(&self) -> bool {
        self.reduced_override.is_some()
    }
}

/// Time derivatives of the full system at `eps > 0`:
/// `du = f(u, v, t, eps)`, `dv = g(u, v, t, eps) / eps`.
pub fn eval_rhs(sys: &FastSlowSystem, s: &State, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(eps > 0.0 && eps <= sys.eps_max) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} outside (0, {}]",
            sys.eps_max
        )));
    }
    if !s.is_finite() {
        return Err(Error::NonFiniteState { t: s.t });
    }
    let du = sys.f(&s.u, &s.v, s.t, eps)?;
    let mut dv = sys.g(&s.u, &s.v, s.t, eps)?;
    for x in dv.iter_mut() {
        *x /= eps;
    }
    Ok((du, dv))
}

/// Central finite-difference step for coordinate value `x`.
#[inline]
fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// Jacobian block of the model: the registered analytic closure if present,
/// otherwise a central finite difference with per-column relative step 1e-6.
/// Rows index output components, columns input components.
pub fn jacobian(sys: &FastSlowSystem, which: JacobianOf, s: &State, eps: f64) -> Result<Matrix> {
    if !s.is_finite() {
        return Err(Error::NonFiniteState { t: s.t });
    }
    let analytic = match which {
        JacobianOf::Gv => &sys.jac_gv,
        JacobianOf::Gu => &sys.jac_gu,
        JacobianOf::Fu => &sys.jac_fu,
        JacobianOf::Fv => &sys.jac_fv,
        JacobianOf::Gt => &sys.jac_gt,
    };
    if let Some(j) = analytic {
        return Ok(j(&s.u, &s.v, s.t, eps));
    }
    finite_difference_jacobian(sys, which, s, eps)
}

/// Always-finite-difference variant; the consistency check between this and
/// the analytic registrations is a model test.
pub fn finite_difference_jacobian(
    sys: &FastSlowSystem,
    which: JacobianOf,
    s: &State,
    eps: f64,
) -> Result<Matrix> {
    let (out_dim, in_dim) = match which {
        JacobianOf::Gv => (sys.m, sys.m),
        JacobianOf::Gu => (sys.m, sys.n),
        JacobianOf::Fu => (sys.n, sys.n),
        JacobianOf::Fv => (sys.n, sys.m),
        JacobianOf::Gt => (sys.m, 1),
    };
    let eval = |u: &[f64], v: &[f64], t: f64| -> Result<Vec<f64>> {
        match which {
            JacobianOf::Gv | JacobianOf::Gu | JacobianOf::Gt => sys.g(u, v, t, eps),
            JacobianOf::Fu | JacobianOf::Fv => sys.f(u, v, t, eps),
        }
    };
    let mut jac = Matrix::zeros(out_dim, in_dim);
    for j in 0..in_dim {
        let (plus, minus, h) = match which {
            JacobianOf::Gv | JacobianOf::Fv => {
                let h = fd_step(s.v[j]);
                let mut vp = s.v.clone();
                let mut vm = s.v.clone();
                vp[j] += h;
                vm[j] -= h;
                (eval(&s.u, &vp, s.t)?, eval(&s.u, &vm, s.t)?, h)
            }
            JacobianOf::Gu | JacobianOf::Fu => {
                let h = fd_step(s.u[j]);
                let mut up = s.u.clone();
                let mut um = s.u.clone();
                up[j] += h;
                um[j] -= h;
                (eval(&up, &s.v, s.t)?, eval(&um, &s.v, s.t)?, h)
            }
            JacobianOf::Gt => {
                let h = fd_step(s.t);
                (eval(&s.u, &s.v, s.t + h)?, eval(&s.u, &s.v, s.t - h)?, h)
            }
        };
        for i in 0..out_dim {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Integration metadata carried by every trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajMeta {
    pub integrator: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// eps used for full-system runs; None for reduced or layer runs where
    /// it does not apply.
    pub eps: Option<f64>,
}

impl Default for TrajMeta {
    fn default() -> Self {
        TrajMeta {
            integrator: String::new(),
            rel_tol: 0.0,
            abs_tol: 0.0,
            eps: None,
        }
    }
}

/// Time-indexed samples with linear interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    pub meta: TrajMeta,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, meta: TrajMeta) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidArgument(
                "trajectory needs at least 2 samples".into(),
            ));
        }
        if times.len() != states.len() {
            return Err(Error::InvalidArgument(
                "times/states length mismatch".into(),
            ));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "time stamps not strictly increasing at t = {}",
                    w[0]
                )));
            }
        }
        for (t, s) in times.iter().zip(&states) {
            if !t.is_finite() || s.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteState { t: *t });
            }
        }
        Ok(Trajectory {
            times,
            states,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 2 samples
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Index of the last sample with time <= t.
    pub fn bracket(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Linear interpolation at `t` inside `[t_first, t_last]`; a convex
    /// combination of the bracketing samples.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        if t < self.first_time() || t > self.last_time() {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside trajectory span [{}, {}]",
                self.first_time(),
                self.last_time()
            )));
        }
        let i = self.bracket(t).min(self.len() - 2);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.states[i]
            .iter()
            .zip(&self.states[i + 1])
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect())
    }
}
