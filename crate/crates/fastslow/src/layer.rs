//! Initial-layer equation in fast time, decay-rate estimation, and the
//! basin-of-attraction audit.
//!
//! The layer equation freezes the slow arguments at their initial values:
//!
//! ```text
//! d vhat0 / d tau = g(u_hat, vhat0(tau), 0, 0),    vhat0(0) = v_hat,
//! ```
//!
//! with `tau = t / eps`. Its correction `vtilde(tau) = vhat0(tau) -
//! phi(u_hat, 0)` is what the composite approximation adds to the quasi
//! steady state. When the fast initial value lies in the basin of
//! attraction of the root, the correction decays like `C exp(-kappa tau)`;
//! the fit here measures `(C, kappa)` by log-linear regression.

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::linalg::spectral_bound;
use crate::reduction::solve_qss_seeded;
use crate::system::{jacobian, FastSlowSystem, JacobianOf, State, Trajectory};

/// Layer solutions above this norm are declared divergent: the fast initial
/// value is outside the basin of attraction.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Relative fit window: samples with correction norm inside
/// `[1e-8, 1e-1] * |vtilde(0)|` enter the decay regression, excluding the
/// pre-asymptotic transient and the floating-point floor.
pub const FIT_WINDOW_REL: (f64, f64) = (1e-8, 1e-1);

/// Exponential envelope fitted to the correction decay.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub c: f64,
    pub kappa: f64,
    /// Fast-time window the regression used.
    pub window: (f64, f64),
}

/// Solution of the frozen-argument layer equation.
#[derive(Debug, Clone)]
pub struct LayerSolution {
    /// `vhat0(tau)` sampled in fast time.
    pub traj: Trajectory,
    /// The targeted root `phi(u_hat, 0)`.
    pub phi_hat: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub converged: bool,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl LayerSolution {
    /// Correction `vtilde(tau) = vhat0(tau) - phi(u_hat, 0)`, extrapolated
    /// as its limit 0 beyond the computed span.
    pub fn correction_at(&self, tau: f64) -> Vec<f64> {
        if tau > self.traj.last_time() {
            return vec![0.0; self.phi_hat.len()];
        }
        let v = self
            .traj
            .interpolate(tau.max(self.traj.first_time()))
            .expect("tau inside span");
        v.iter().zip(&self.phi_hat).map(|(a, b)| a - b).collect()
    }

    pub fn correction_norm_at(&self, tau: f64) -> f64 {
        norm2(&self.correction_at(tau))
    }

    pub fn initial_correction_norm(&self) -> f64 {
        self.correction_norm_at(self.traj.first_time())
    }

    /// First fast time at which the correction norm falls to `rho` (linear
    /// interpolation between samples); `None` if it never does within the
    /// span. Monotone: smaller `rho` gives larger `tau`.
    pub fn tau_rho(&self, rho: f64) -> Option<f64> {
        let mut prev: Option<(f64, f64)> = None;
        for (t, v) in self.traj.times().iter().zip(self.traj.states()) {
            let norm = norm2(
                &v.iter()
                    .zip(&self.phi_hat)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            );
            if norm <= rho {
                return Some(match prev {
                    None => *t,
                    Some((tp, np)) => {
                        if np <= rho {
                            tp
                        } else {
                            tp + (t - tp) * (np - rho) / (np - norm)
                        }
                    }
                });
            }
            prev = Some((*t, norm));
        }
        None
    }
}

/// Integrate the layer equation over `[0, tau_max]`.
///
/// The targeted root is solved from the model's quasi-steady-state seed.
/// Divergence (norm above [`DIVERGENCE_NORM`]) reports the initial value as
/// outside the basin.
pub fn integrate_layer(
    sys: &FastSlowSystem,
    u_hat: &[f64],
    v_hat: &[f64],
    tau_max: f64,
    cfg: &IntegratorConfig,
    n_out: Option<usize>,
) -> Result<LayerSolution> {
    if !(tau_max > 0.0) {
        return Err(Error::InvalidArgument("tau_max must be positive".into()));
    }
    let phi_hat = solve_qss_seeded(sys, u_hat, 0.0)?.v_root;
    let rhs = |tau: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
        let norm = norm2(v);
        if norm > DIVERGENCE_NORM {
            return Err(Error::Divergence { tau, norm });
        }
        let g = sys.g(u_hat, v, 0.0, 0.0)?;
        dv.copy_from_slice(&g);
        Ok(())
    };
    let count = n_out.unwrap_or(2000).max(8);
    let grid: Vec<f64> = (0..=count)
        .map(|i| tau_max * i as f64 / count as f64)
        .collect();
    let traj = integrate(rhs, v_hat, (0.0, tau_max), cfg, Some(&grid))?;

    let corr0: Vec<f64> = v_hat.iter().zip(&phi_hat).map(|(a, b)| a - b).collect();
    let scale = norm2(&corr0);
    let final_corr = norm2(
        &traj
            .last_state()
            .iter()
            .zip(&phi_hat)
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    let converged = final_corr <= 1e-8 * (1.0 + norm2(v_hat));

    // Log-linear decay fit inside the relative window.
    let mut fit = None;
    if scale > 0.0 {
        let (lo, hi) = (FIT_WINDOW_REL.0 * scale, FIT_WINDOW_REL.1 * scale);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (t, v) in traj.times().iter().zip(traj.states()) {
            let norm = norm2(
                &v.iter()
                    .zip(&phi_hat)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            );
            if norm >= lo && norm <= hi {
                pts.push((*t, norm.ln()));
            }
        }
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let denom = n * sxx - sx * sx;
            if denom > 0.0 {
                let slope = (n * sxy - sx * sy) / denom;
                let intercept = (sy - slope * sx) / n;
                fit = Some(DecayFit {
                    c: intercept.exp(),
                    kappa: -slope,
                    window: (pts[0].0, pts[pts.len() - 1].0),
                });
            }
        }
    }
    Ok(LayerSolution {
        traj,
        phi_hat,
        fit,
        converged,
    })
}

/// Verdict of the basin-of-attraction audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinVerdict {
    Inside,
    Outside,
    Inconclusive,
}

/// Check whether `v_hat` lies in the basin of attraction of the root
/// `phi(u_hat, 0)` by integrating the layer equation for a fast-time budget
/// of `200 / kappa`, with `kappa` the local spectral margin at the root
/// (budget 200 when the margin is not positive).
pub fn basin_check(sys: &FastSlowSystem, u_hat: &[f64], v_hat: &[f64]) -> Result<BasinVerdict> {
    Ok(basin_check_with_layer(sys, u_hat, v_hat)?.0)
}

/// [`basin_check`] that also returns the layer solution (absent on
/// divergence) so callers can report the fitted decay constants.
pub fn basin_check_with_layer(
    sys: &FastSlowSystem,
    u_hat: &[f64],
    v_hat: &[f64],
) -> Result<(BasinVerdict, Option<LayerSolution>)> {
    let phi_hat = solve_qss_seeded(sys, u_hat, 0.0)?.v_root;
    let s = State::new(0.0, u_hat.to_vec(), phi_hat.clone());
    let kappa = -spectral_bound(&jacobian(sys, JacobianOf::Gv, &s, 0.0)?)?;
    let tau_max = if kappa > 0.0 { 200.0 / kappa } else { 200.0 };
    let cfg = IntegratorConfig::default();
    let layer = match integrate_layer(sys, u_hat, v_hat, tau_max, &cfg, None) {
        Ok(l) => l,
        Err(Error::Divergence { .. }) => return Ok((BasinVerdict::Outside, None)),
        Err(e) => return Err(e),
    };
    let v_end = layer.traj.last_state();
    let gap = norm2(
        &v_end
            .iter()
            .zip(&phi_hat)
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    if gap <= 1e-6 {
        return Ok((BasinVerdict::Inside, Some(layer)));
    }
    // Converged somewhere else? A vanishing g residual at the final point
    // flags a competing equilibrium.
    let g_end = sys.g(u_hat, v_end, 0.0, 0.0)?;
    if norm2(&g_end) <= 1e-8 {
        return Ok((BasinVerdict::Outside, Some(layer)));
    }
    Ok((BasinVerdict::Inconclusive, Some(layer)))
}
