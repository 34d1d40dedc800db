//! Localization of the fast field around the slow curve.
//!
//! A smooth bump profile over the squared distance to the moving tube
//! centre weights a decomposition of `g` into its linearization at the
//! curve plus an exact remainder:
//!
//! ```text
//! g_loc = psi_d * g_u (u - ubar) + g_v (v - phi) + Psi_d * R,
//! R     = g - g_u (u - ubar) - g_v (v - phi),
//! ```
//!
//! with all Jacobians frozen at `(vbar(t), 0)`. Inside the inner tube
//! (both weights on their plateau) the terms telescope and `g_loc = g`
//! exactly; far outside, only the stable linear part
//! `g_v (v - phi)` survives. The remainder realizes the higher-order term
//! of the construction without any Taylor bookkeeping: the two fields
//! coincide wherever the cutoffs are 1, which is what the coincidence test
//! checks on trajectories.

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::reduction::{manifold_at, ManifoldPoint, SlowSolution};
use crate::system::{FastSlowSystem, State, Trajectory};

/// Smooth cutoff profile on `[0, inf)`: 1 on `[0, 1/4]`, 0 on `[1, inf)`,
/// monotone in between, all derivatives vanishing at both junctions.
///
/// Built from the standard `exp(-1/x)` mollifier step.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    /// Measured bound on |psi'|; enters the gradient bound `C / delta` of
    /// the weighted cutoffs.
    pub max_deriv: f64,
}

fn mollifier(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step rising from 0 at y = 0 to 1 at y = 1.
fn smooth_step(y: f64) -> f64 {
    let a = mollifier(y);
    let b = mollifier(1.0 - y);
    if a == 0.0 && b == 0.0 {
        return if y >= 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile::standard()
    }
}

impl BumpProfile {
    pub fn standard() -> Self {
        let mut max_deriv = 0.0f64;
        for i in 0..=20_000 {
            let x = 0.25 + 0.75 * i as f64 / 20_000.0;
            max_deriv = max_deriv.max(Self::eval_deriv(x).abs());
        }
        BumpProfile { max_deriv }
    }

    /// psi(x): plateau on [0, 1/4], support [0, 1).
    pub fn eval(&self, x: f64) -> f64 {
        Self::eval_static(x)
    }

    fn eval_static(x: f64) -> f64 {
        if x <= 0.25 {
            1.0
        } else if x >= 1.0 {
            0.0
        } else {
            smooth_step((1.0 - x) / 0.75)
        }
    }

    /// Analytic derivative psi'(x).
    pub fn deriv(&self, x: f64) -> f64 {
        Self::eval_deriv(x)
    }

    fn eval_deriv(x: f64) -> f64 {
        if !(0.25..1.0).contains(&x) {
            return 0.0;
        }
        let y = (1.0 - x) / 0.75;
        let a = mollifier(y);
        let b = mollifier(1.0 - y);
        if a + b == 0.0 {
            return 0.0;
        }
        // d/dy [a / (a + b)] with a' = a / y^2, b' = b / (1 - y)^2.
        let da = a / (y * y);
        let db = b / ((1.0 - y) * (1.0 - y));
        let step_dy = (da * b + a * db) / ((a + b) * (a + b));
        step_dy * (-1.0 / 0.75)
    }
}

/// The moving tube of radius `delta` around a slow solution: the union over
/// `t` of products of `delta`-balls around `ubar(t)` and `phi(ubar(t), t)`.
#[derive(Debug, Clone)]
pub struct Tube {
    pub slow: SlowSolution,
    pub delta: f64,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Tube {
    pub fn new(slow: SlowSolution, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(
                "tube radius must be positive".into(),
            ));
        }
        Ok(Tube { slow, delta })
    }

    /// Default radius: twice the product-ball distance from the initial state
    /// to the slow curve (so the state sits on the inner-tube boundary),
    /// clamped to [0.05, 1.0].
    pub fn default_delta(sys: &FastSlowSystem, slow: &SlowSolution, init: &State) -> Result<f64> {
        let point = manifold_at(sys, slow, init.t)?;
        let du = norm2(&diff(&init.u, &point.ubar));
        let dv = norm2(&diff(&init.v, &point.vbar));
        Ok((2.0 * du.max(dv)).clamp(0.05, 1.0))
    }

    pub fn center(&self, sys: &FastSlowSystem, t: f64) -> Result<ManifoldPoint> {
        manifold_at(sys, &self.slow, t)
    }

    /// Product-ball membership at radius `r`.
    pub fn contains_radius(
        &self,
        sys: &FastSlowSystem,
        u: &[f64],
        v: &[f64],
        t: f64,
        r: f64,
    ) -> Result<bool> {
        let point = self.center(sys, t)?;
        Ok(norm2(&diff(u, &point.ubar)) <= r && norm2(&diff(v, &point.vbar)) <= r)
    }

    pub fn contains(&self, sys: &FastSlowSystem, u: &[f64], v: &[f64], t: f64) -> Result<bool> {
        self.contains_radius(sys, u, v, t, self.delta)
    }
}

/// The three cutoff weights at `(u, v, t)`: the slow-block weight
/// `psi(|u - ubar|^2 / delta^2)`, the fast-block weight
/// `psi(|v - phi|^2 / delta^2)`, and their product.
pub fn bump_weights(
    profile: &BumpProfile,
    tube: &Tube,
    sys: &FastSlowSystem,
    u: &[f64],
    v: &[f64],
    t: f64,
) -> Result<(f64, f64, f64)> {
    let point = tube.center(sys, t)?;
    let d2 = tube.delta * tube.delta;
    let pu = profile.eval(norm2(&diff(u, &point.ubar)).powi(2) / d2);
    let pv = profile.eval(norm2(&diff(v, &point.vbar)).powi(2) / d2);
    Ok((pu, pv, pu * pv))
}

/// The localized fast field.
pub fn localized_g(
    profile: &BumpProfile,
    tube: &Tube,
    sys: &FastSlowSystem,
    u: &[f64],
    v: &[f64],
    t: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    let point = tube.center(sys, t)?;
    let d2 = tube.delta * tube.delta;
    let du = diff(u, &point.ubar);
    let dv = diff(v, &point.vbar);
    let pu = profile.eval(norm2(&du).powi(2) / d2);
    let pv = profile.eval(norm2(&dv).powi(2) / d2);
    let weight = pu * pv;
    let term_u = point.qss.g_u.matvec(&du);
    let term_v = point.qss.g_v.matvec(&dv);
    let g = sys.g(u, v, t, eps)?;
    let out: Vec<f64> = (0..sys.m)
        .map(|i| {
            let remainder = g[i] - term_u[i] - term_v[i];
            pu * term_u[i] + term_v[i] + weight * remainder
        })
        .collect();
    Ok(out)
}

/// Result of running the original and localized flows side by side.
#[derive(Debug, Clone)]
pub struct CoincidenceResult {
    /// First grid time at which the localized flow leaves the inner tube
    /// (radius delta / 2); `None` if it never does.
    pub first_exit: Option<f64>,
    /// Sup over components and grid times, while inside, of the gap
    /// between the two flows.
    pub max_gap_inside: f64,
    /// Sup over the whole horizon, for negative controls.
    pub max_gap_total: f64,
}

/// Integrate the original and localized full systems from the same initial
/// state and measure their gap while the localized flow stays in the inner
/// tube.
pub fn coincidence_test(
    profile: &BumpProfile,
    tube: &Tube,
    sys: &FastSlowSystem,
    eps: f64,
    init: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
    n_out: usize,
) -> Result<CoincidenceResult> {
    let n = sys.n;
    let rhs_orig = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let f = sys.f(&y[..n], &y[n..], t, eps)?;
        let g = sys.g(&y[..n], &y[n..], t, eps)?;
        dy[..n].copy_from_slice(&f);
        for (slot, gi) in dy[n..].iter_mut().zip(&g) {
            *slot = gi / eps;
        }
        Ok(())
    };
    let rhs_loc = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let f = sys.f(&y[..n], &y[n..], t, eps)?;
        let g = localized_g(profile, tube, sys, &y[..n], &y[n..], t, eps)?;
        dy[..n].copy_from_slice(&f);
        for (slot, gi) in dy[n..].iter_mut().zip(&g) {
            *slot = gi / eps;
        }
        Ok(())
    };
    let mut run_cfg = cfg.clone();
    run_cfg.max_step = run_cfg.max_step.min(eps / 2.0);
    let grid: Vec<f64> = (0..=n_out)
        .map(|i| init.t + (t_end - init.t) * i as f64 / n_out as f64)
        .collect();
    let y0 = init.flat();
    let orig: Trajectory = integrate(rhs_orig, &y0, (init.t, t_end), &run_cfg, Some(&grid))?;
    let loc: Trajectory = integrate(rhs_loc, &y0, (init.t, t_end), &run_cfg, Some(&grid))?;

    let mut first_exit = None;
    let mut max_gap_inside = 0.0f64;
    let mut max_gap_total = 0.0f64;
    for ((t, yo), yl) in orig.times().iter().zip(orig.states()).zip(loc.states()) {
        let gap = yo
            .iter()
            .zip(yl)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_gap_total = max_gap_total.max(gap);
        if first_exit.is_none() {
            let inside = tube.contains_radius(sys, &yl[..n], &yl[n..], *t, tube.delta / 2.0)?;
            if inside {
                max_gap_inside = max_gap_inside.max(gap);
            } else {
                first_exit = Some(*t);
            }
        }
    }
    Ok(CoincidenceResult {
        first_exit,
        max_gap_inside,
        max_gap_total,
    })
}
