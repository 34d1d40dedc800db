//! Quasi-steady-state solve, manifold derivatives, the reduced slow system,
//! the composite approximation, and error curves against the full solution.
//!
//! The quasi steady state is the root `v = phi(u, t)` of `g(u, v, t, 0) = 0`.
//! Substituting it into the slow field gives the reduced equation
//! `u' = f(u, phi(u, t), t, 0)`; adding the decaying initial-layer
//! correction `vtilde(t / eps)` to `phi(ubar(t), t)` gives the composite
//! approximation of the fast variable, accurate uniformly in time when the
//! audited hypotheses hold.

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::layer::LayerSolution;
use crate::linalg::{lu_solve_matrix, Lu, Matrix};
use crate::system::{jacobian, FastSlowSystem, JacobianOf, State, TrajMeta, Trajectory};
use std::cell::RefCell;

pub const QSS_TOL_DEFAULT: f64 = 1e-12;
pub const QSS_MAX_ITERS_DEFAULT: usize = 50;

/// A solved quasi-steady-state root with its manifold derivatives.
///
/// `phi_u` solves `g_v phi_u = -g_u` and `phi_t` solves `g_v phi_t = -g_t`,
/// the implicit-function derivatives of the root. `min_pivot` is the
/// smallest LU pivot of `g_v` at the root; it certifies that the root is
/// isolated.
#[derive(Debug, Clone)]
pub struct QssResult {
    pub v_root: Vec<f64>,
    pub g_v: Matrix,
    pub g_u: Matrix,
    pub phi_u: Matrix,
    pub phi_t: Vec<f64>,
    pub newton_iters: usize,
    pub residual: f64,
    pub min_pivot: f64,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Newton solve of `g(u, v, t, 0) = 0` from `v_seed`.
pub fn solve_qss(
    sys: &FastSlowSystem,
    u: &[f64],
    t: f64,
    v_seed: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<QssResult> {
    let mut v = v_seed.to_vec();
    let mut iters = 0;
    let mut residual = norm2(&sys.g(u, &v, t, 0.0)?);
    while residual > tol {
        if iters >= max_iters {
            return Err(Error::NoConvergence { iters, residual });
        }
        let s = State::new(t, u.to_vec(), v.clone());
        let gv = jacobian(sys, JacobianOf::Gv, &s, 0.0)?;
        let lu = Lu::new(&gv).map_err(|e| match e {
            Error::SingularMatrix { pivot, .. } => Error::SingularJacobian { pivot },
            other => other,
        })?;
        let g = sys.g(u, &v, t, 0.0)?;
        let step = lu.solve(&g);
        for (vi, si) in v.iter_mut().zip(&step) {
            *vi -= si;
        }
        iters += 1;
        residual = norm2(&sys.g(u, &v, t, 0.0)?);
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iters, residual });
        }
    }
    // Derivatives at the root; the LU here also provides the isolation
    // measurable.
    let s = State::new(t, u.to_vec(), v.clone());
    let g_v = jacobian(sys, JacobianOf::Gv, &s, 0.0)?;
    let g_u = jacobian(sys, JacobianOf::Gu, &s, 0.0)?;
    let g_t = jacobian(sys, JacobianOf::Gt, &s, 0.0)?;
    let lu = Lu::new(&g_v).map_err(|e| match e {
        Error::SingularMatrix { pivot, .. } => Error::SingularJacobian { pivot },
        other => other,
    })?;
    let phi_u = lu_solve_matrix(&g_v, &g_u.scale(-1.0))?;
    let gt_col: Vec<f64> = (0..sys.m).map(|i| -g_t[(i, 0)]).collect();
    let phi_t = lu.solve(&gt_col);
    Ok(QssResult {
        v_root: v,
        g_v,
        g_u,
        phi_u,
        phi_t,
        newton_iters: iters,
        residual,
        min_pivot: lu.min_pivot,
    })
}

/// Quasi-steady-state solve seeded from the model's closed form.
pub fn solve_qss_seeded(sys: &FastSlowSystem, u: &[f64], t: f64) -> Result<QssResult> {
    let seed = sys.qss_seed(u, t).ok_or_else(|| {
        Error::InvalidArgument("model provides no quasi-steady-state seed".into())
    })?;
    solve_qss(sys, u, t, &seed, QSS_TOL_DEFAULT, QSS_MAX_ITERS_DEFAULT)
}

/// Right-hand side of the reduced equation: `f(u, phi(u, t), t, 0)`.
///
/// Models carrying a reduced override (the literal published field) use it
/// instead; the quasi steady state is still solved so failures surface.
pub fn reduced_rhs(sys: &FastSlowSystem, u: &[f64], t: f64, v_seed: &[f64]) -> Result<Vec<f64>> {
    let qss = solve_qss(sys, u, t, v_seed, QSS_TOL_DEFAULT, QSS_MAX_ITERS_DEFAULT)?;
    match sys.reduced_override(u, t) {
        Some(field) => Ok(field),
        None => sys.f(u, &qss.v_root, t, 0.0),
    }
}

/// Configuration for [`integrate_reduced`].
#[derive(Debug, Clone)]
pub struct ReducedConfig {
    pub integrator: IntegratorConfig,
    pub qss_tol: f64,
    pub qss_max_iters: usize,
    /// Bound on the norm of the slow curve `(ubar, phi)`; exceeding it is a
    /// boundedness violation of the isolated-root assumption.
    pub curve_bound: f64,
}

impl Default for ReducedConfig {
    fn default() -> Self {
        ReducedConfig {
            integrator: IntegratorConfig::default(),
            qss_tol: QSS_TOL_DEFAULT,
            qss_max_iters: QSS_MAX_ITERS_DEFAULT,
            curve_bound: 1e6,
        }
    }
}

/// The reduced solution `ubar(t)` together with the slow curve
/// `vbar(t) = (ubar(t), phi(ubar(t), t))` and the per-sample root data.
#[derive(Debug, Clone)]
pub struct SlowSolution {
    pub traj: Trajectory,
    pub vbar: Vec<Vec<f64>>,
    pub qss_chain: Vec<QssResult>,
}

impl SlowSolution {
    /// Smallest isolation pivot along the chain.
    pub fn min_pivot(&self) -> f64 {
        self.qss_chain
            .iter()
            .map(|q| q.min_pivot)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the sample closest to `t`.
    pub fn nearest_sample(&self, t: f64) -> usize {
        let i = self.traj.bracket(t);
        if i + 1 < self.traj.len() {
            let (t0, t1) = (self.traj.times()[i], self.traj.times()[i + 1]);
            if (t - t0).abs() <= (t1 - t).abs() {
                i
            } else {
                i + 1
            }
        } else {
            i
        }
    }
}

/// A point of the slow curve with fresh manifold data, for queries between
/// stored samples: `ubar(t)` is interpolated, then the root and Jacobians
/// are re-solved exactly at the interpolated point.
#[derive(Debug, Clone)]
pub struct ManifoldPoint {
    pub t: f64,
    pub ubar: Vec<f64>,
    pub vbar: Vec<f64>,
    pub qss: QssResult,
}

/// Evaluate the slow curve at an arbitrary `t` inside the solution span.
pub fn manifold_at(sys: &FastSlowSystem, slow: &SlowSolution, t: f64) -> Result<ManifoldPoint> {
    let ubar = slow.traj.interpolate(t)?;
    let seed = &slow.qss_chain[slow.nearest_sample(t)].v_root;
    let qss = solve_qss(sys, &ubar, t, seed, QSS_TOL_DEFAULT, QSS_MAX_ITERS_DEFAULT)?;
    Ok(ManifoldPoint {
        t,
        ubar,
        vbar: qss.v_root.clone(),
        qss,
    })
}

/// Integrate the reduced equation, re-solving the quasi steady state at
/// every field evaluation, warm-started from the previous root.
pub fn integrate_reduced(
    sys: &FastSlowSystem,
    u0: &[f64],
    t_span: (f64, f64),
    cfg: &ReducedConfig,
    output_grid: Option<&[f64]>,
) -> Result<SlowSolution> {
    let seed0 = match sys.qss_seed(u0, t_span.0) {
        Some(s) => s,
        None => {
            return Err(Error::InvalidArgument(
                "reduced integration needs a quasi-steady-state seed".into(),
            ))
        }
    };
    let first = solve_qss(sys, u0, t_span.0, &seed0, cfg.qss_tol, cfg.qss_max_iters)?;
    let warm = RefCell::new(first.v_root.clone());
    let rhs = |t: f64, u: &[f64], du: &mut [f64]| -> Result<()> {
        let seed = warm.borrow().clone();
        let qss = solve_qss(sys, u, t, &seed, cfg.qss_tol, cfg.qss_max_iters)?;
        let curve_norm = norm2(u).hypot(norm2(&qss.v_root));
        if curve_norm > cfg.curve_bound {
            return Err(Error::BoundednessViolation {
                t,
                bound: cfg.curve_bound,
                norm: curve_norm,
            });
        }
        let field = match sys.reduced_override(u, t) {
            Some(f) => f,
            None => sys.f(u, &qss.v_root, t, 0.0)?,
        };
        du.copy_from_slice(&field);
        *warm.borrow_mut() = qss.v_root;
        Ok(())
    };
    let traj = integrate(rhs, u0, t_span, &cfg.integrator, output_grid)?;

    // Rebuild the root chain at the stored samples, warm-started along the
    // trajectory.
    let mut vbar = Vec::with_capacity(traj.len());
    let mut chain: Vec<QssResult> = Vec::with_capacity(traj.len());
    let mut seed = first.v_root.clone();
    for (t, u) in traj.times().iter().zip(traj.states()) {
        let qss = solve_qss(sys, u, *t, &seed, cfg.qss_tol, cfg.qss_max_iters)?;
        seed = qss.v_root.clone();
        vbar.push(qss.v_root.clone());
        chain.push(qss);
    }
    Ok(SlowSolution {
        traj,
        vbar,
        qss_chain: chain,
    })
}

/// Composite approximation of the fast variable at slow time `t`:
/// `phi(ubar(t), t) + vtilde(t / eps)`, with the layer correction
/// extrapolated as its limit 0 beyond the layer span.
pub fn composite_v(
    sys: &FastSlowSystem,
    slow: &SlowSolution,
    layer: &LayerSolution,
    eps: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let point = manifold_at(sys, slow, t)?;
    let corr = layer.correction_at(t / eps);
    Ok(point.vbar.iter().zip(&corr).map(|(a, b)| a + b).collect())
}

/// Pointwise and supremum error measurements of a full stiff solution
/// against the reduced/composite approximation.
#[derive(Debug, Clone)]
pub struct ErrorCurves {
    pub t: Vec<f64>,
    /// `|u_eps(t) - ubar(t)|`
    pub err_u: Vec<f64>,
    /// `|v_eps(t) - phi(ubar(t), t)|`
    pub err_v: Vec<f64>,
    /// `|v_eps(t) - phi(ubar(t), t) - vtilde(t/eps)|`
    pub err_composite: Vec<f64>,
    /// End of the initial layer used for the restricted suprema.
    pub t_rho: f64,
    pub sup_u_all: f64,
    pub sup_u_after_layer: f64,
    pub sup_v_after_layer: f64,
    pub sup_composite_all: f64,
}

/// Fraction of the initial layer-correction size used to declare the layer
/// over when computing `t_rho`.
pub const LAYER_RHO_REL: f64 = 1e-2;

/// Compare a full trajectory against the slow solution and layer correction
/// on a grid. The grid must lie inside the spans of both solutions.
pub fn error_curves(
    sys: &FastSlowSystem,
    full: &Trajectory,
    slow: &SlowSolution,
    layer: &LayerSolution,
    eps: f64,
    grid: &[f64],
) -> Result<ErrorCurves> {
    let n = sys.n;
    let rho = LAYER_RHO_REL * layer.initial_correction_norm();
    let tau_rho = layer.tau_rho(rho).unwrap_or(0.0);
    let t_rho = eps * tau_rho;

    let mut err_u = Vec::with_capacity(grid.len());
    let mut err_v = Vec::with_capacity(grid.len());
    let mut err_c = Vec::with_capacity(grid.len());
    for &t in grid {
        let yf = full.interpolate(t)?;
        let point = manifold_at(sys, slow, t)?;
        let du: f64 = norm2(
            &yf[..n]
                .iter()
                .zip(&point.ubar)
                .map(|(a, b)| a - b)
                .collect::<Vec<f64>>(),
        );
        let dvv: Vec<f64> = yf[n..]
            .iter()
            .zip(&point.vbar)
            .map(|(a, b)| a - b)
            .collect();
        let corr = layer.correction_at(t / eps);
        let dc: Vec<f64> = dvv.iter().zip(&corr).map(|(a, b)| a - b).collect();
        err_u.push(du);
        err_v.push(norm2(&dvv));
        err_c.push(norm2(&dc));
    }
    let sup = |vals: &[f64], pred: &dyn Fn(usize) -> bool| -> f64 {
        vals.iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let all = |_: usize| true;
    let after = |i: usize| grid[i] >= t_rho;
    Ok(ErrorCurves {
        sup_u_all: sup(&err_u, &all),
        sup_u_after_layer: sup(&err_u, &after),
        sup_v_after_layer: sup(&err_v, &after),
        sup_composite_all: sup(&err_c, &all),
        t: grid.to_vec(),
        err_u,
        err_v,
        err_composite: err_c,
        t_rho,
    })
}

/// Integrate the full stiff system at `eps` with the step cap `eps / 2`
/// that resolves the layer time scale.
pub fn integrate_full(
    sys: &FastSlowSystem,
    init: &State,
    eps: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_grid: Option<&[f64]>,
) -> Result<Trajectory> {
    if !(eps > 0.0 && eps <= sys.eps_max) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} outside (0, {}]",
            sys.eps_max
        )));
    }
    let n = sys.n;
    let mut cfg = cfg.clone();
    cfg.max_step = cfg.max_step.min(eps / 2.0);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let f = sys.f(&y[..n], &y[n..], t, eps)?;
        let g = sys.g(&y[..n], &y[n..], t, eps)?;
        dy[..n].copy_from_slice(&f);
        for (slot, gi) in dy[n..].iter_mut().zip(&g) {
            *slot = gi / eps;
        }
        Ok(())
    };
    let mut traj = integrate(rhs, &init.flat(), (init.t, t_end), &cfg, output_grid)?;
    traj.meta = TrajMeta {
        eps: Some(eps),
        ..traj.meta
    };
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::integrate_layer;
    use crate::models::{allee_system, predprey_system, AlleeParams, PredPreyParams};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Hand-solvable linear fast-slow model: u' = -u, eps v' = -(v - u).
    fn linear_model() -> FastSlowSystem {
        FastSlowSystem::new(
            "linear-relax",
            1,
            1,
            0.5,
            Box::new(|u, _v, _t, _e| vec![-u[0]]),
            Box::new(|u, v, _t, _e| vec![u[0] - v[0]]),
        )
        .with_qss_seed(Box::new(|u, _t| vec![u[0]]))
        .with_slow_equilibria(vec![vec![0.0]])
    }

    #[test]
    fn qss_predprey_closed_form() {
        let p = PredPreyParams::default();
        let sys = predprey_system(p);
        // Linear g: Newton lands on M1 * n from any seed in one step.
        for seed in [0.0, 5.0, -3.0] {
            let q = solve_qss(&sys, &[3.0, 1.0], 0.0, &[seed], 1e-12, 50).unwrap();
            assert_relative_eq!(q.v_root[0], 2.0, max_relative = 1e-12);
            assert!(q.newton_iters <= 1, "iters = {}", q.newton_iters);
        }
    }

    #[test]
    fn qss_allee_closed_form() {
        let sys = allee_system(AlleeParams::default());
        let q = solve_qss(&sys, &[1.0], 0.0, &[0.1], 1e-12, 50).unwrap();
        assert_relative_eq!(q.v_root[0], 0.25, max_relative = 1e-11);
        // phi_u = -g_u / g_v = (1 - xiK y) / (1 + xiK z) at the root.
        let expect = (1.0 - 3.0 * 0.25) / 4.0;
        assert_relative_eq!(q.phi_u[(0, 0)], expect, max_relative = 1e-9);
        assert_relative_eq!(q.phi_t[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qss_newton_matches_closed_forms_randomly() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pp = PredPreyParams::default();
        let ap = AlleeParams::default();
        let sys_p = predprey_system(pp);
        let sys_a = allee_system(ap);
        for _ in 0..100 {
            let n = rng.gen_range(0.1..6.0);
            let p = rng.gen_range(0.1..8.0);
            let q = solve_qss(&sys_p, &[n, p], 0.0, &[0.3], 1e-12, 50).unwrap();
            assert!((q.v_root[0] - pp.patch1_share() * n).abs() <= 1e-11);

            let z = rng.gen_range(0.0..3.0);
            let q = solve_qss(&sys_a, &[z], 0.0, &[0.9 * ap.qss(z) + 0.01], 1e-12, 50).unwrap();
            assert!((q.v_root[0] - ap.qss(z)).abs() <= 1e-11);
        }
    }

    #[test]
    fn qss_idempotent_at_root() {
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        let root = ap.qss(0.7);
        let q = solve_qss(&sys, &[0.7], 0.0, &[root], 1e-12, 50).unwrap();
        assert!(q.newton_iters <= 1);
        assert_relative_eq!(q.v_root[0], root, max_relative = 1e-13);
    }

    #[test]
    fn qss_singular_jacobian_reported() {
        // g = v - v^3 has g_v = 1 - 3 v^2; the seed 1/sqrt(3) is exactly
        // critical.
        let sys = FastSlowSystem::new(
            "bistable",
            1,
            1,
            1.0,
            Box::new(|_, _, _, _| vec![0.0]),
            Box::new(|_u, v, _t, _e| vec![v[0] - v[0] * v[0] * v[0]]),
        );
        let seed = 1.0 / 3.0_f64.sqrt();
        match solve_qss(&sys, &[0.0], 0.0, &[seed], 1e-12, 50) {
            Err(Error::SingularJacobian { .. }) => {}
            other => panic!("expected SingularJacobian, got {other:?}"),
        }
    }

    #[test]
    fn reduced_rhs_allee_formula() {
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        for z in [0.05, 0.2, 0.525783, 1.0] {
            let r = reduced_rhs(&sys, &[z], 0.0, &[ap.qss(z)]).unwrap();
            assert_relative_eq!(
                r[0],
                ap.reduced_field(z),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
        // z3 is an equilibrium of the reduced flow.
        let (_, z3) = ap.positive_equilibria().unwrap();
        let r = reduced_rhs(&sys, &[z3], 0.0, &[ap.qss(z3)]).unwrap();
        assert!(r[0].abs() < 1e-12, "reduced field at z3: {}", r[0]);
    }

    #[test]
    fn reduced_rhs_predprey_formula() {
        // Substituting n2 = M1 n must give the aggregated Lotka-Volterra
        // field n(rbar - a M2 p), p(b M2 n - d).
        let pp = PredPreyParams::default();
        let sys = predprey_system(pp);
        let (m2s, rbar) = (pp.patch2_share(), pp.aggregated_growth());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(0.2..6.0);
            let p = rng.gen_range(0.2..8.0);
            let r = reduced_rhs(&sys, &[n, p], 0.0, &[0.5]).unwrap();
            assert_relative_eq!(r[0], n * (rbar - pp.a * m2s * p), max_relative = 1e-11);
            assert_relative_eq!(
                r[1],
                p * (pp.b * m2s * n - pp.d),
                max_relative = 1e-11,
                epsilon = 1e-13
            );
        }
        // Reduced equilibrium (10/3, 5) annihilates the field.
        let r = reduced_rhs(&sys, &[10.0 / 3.0, 5.0], 0.0, &[2.0]).unwrap();
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn reduced_allee_bistability() {
        let sys = allee_system(AlleeParams::default());
        let cfg = ReducedConfig::default();
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.5).collect();
        let below = integrate_reduced(&sys, &[0.1], (0.0, 200.0), &cfg, Some(&grid)).unwrap();
        assert!(below.traj.last_state()[0].abs() < 1e-3);
        let above = integrate_reduced(&sys, &[0.2], (0.0, 200.0), &cfg, Some(&grid)).unwrap();
        let z3 = 0.5257834230632085;
        assert!((above.traj.last_state()[0] - z3).abs() < 1e-3);
    }

    #[test]
    fn reduced_linear_model_exponential() {
        // phi(u) = u, reduced u' = -u: closed-form exponential.
        let sys = linear_model();
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.25).collect();
        let cfg = ReducedConfig::default();
        let slow = integrate_reduced(&sys, &[1.0], (0.0, 5.0), &cfg, Some(&grid)).unwrap();
        for (t, (u, vb)) in slow
            .traj
            .times()
            .iter()
            .zip(slow.traj.states().iter().zip(&slow.vbar))
        {
            assert_relative_eq!(u[0], (-t).exp(), max_relative = 1e-7);
            assert_relative_eq!(vb[0], u[0], max_relative = 1e-11);
        }
    }

    #[test]
    fn manifold_time_derivative_identity() {
        // d/dt phi(ubar(t), t) from finite differences of the stored chain
        // matches phi_u ubar' + phi_t within 1e-4.
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        let grid: Vec<f64> = (0..=600).map(|i| i as f64 * 0.02).collect();
        let cfg = ReducedConfig::default();
        let slow = integrate_reduced(&sys, &[0.2], (0.0, 12.0), &cfg, Some(&grid)).unwrap();
        for i in 1..slow.traj.len() - 1 {
            let dt = slow.traj.times()[i + 1] - slow.traj.times()[i - 1];
            let fd = (slow.vbar[i + 1][0] - slow.vbar[i - 1][0]) / dt;
            let u = &slow.traj.states()[i];
            let t = slow.traj.times()[i];
            let udot = sys.f(u, &slow.vbar[i], t, 0.0).unwrap();
            let q = &slow.qss_chain[i];
            let ident = q.phi_u[(0, 0)] * udot[0] + q.phi_t[0];
            assert!((fd - ident).abs() < 1e-4, "t = {t}: {fd} vs {ident}");
        }
    }

    #[test]
    fn composite_equals_initial_value_at_zero() {
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        let cfg = ReducedConfig::default();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let slow = integrate_reduced(&sys, &[0.2], (0.0, 10.0), &cfg, Some(&grid)).unwrap();
        let layer = integrate_layer(
            &sys,
            &[0.2],
            &[0.0],
            30.0,
            &IntegratorConfig::default(),
            None,
        )
        .unwrap();
        let eps = 0.02;
        let c0 = composite_v(&sys, &slow, &layer, eps, 0.0).unwrap();
        // phi(u_hat, 0) + (v_hat - phi(u_hat, 0)) telescopes to v_hat.
        assert_relative_eq!(c0[0], 0.0, epsilon = 1e-12);
        // Far beyond the layer the composite is the quasi steady state.
        let t_late = 5.0;
        let c = composite_v(&sys, &slow, &layer, eps, t_late).unwrap();
        let point = manifold_at(&sys, &slow, t_late).unwrap();
        assert_relative_eq!(c[0], point.vbar[0], epsilon = 1e-10);
    }

    #[test]
    fn composite_matches_closed_form_for_allee() {
        // The frozen-argument layer equation is linear, so the composite has
        // the closed form phi(zbar(t)) + (y0 - phi(z0)) exp(-(1 + xiK z0) t / eps).
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        let cfg = ReducedConfig {
            integrator: IntegratorConfig::default().with_tols(1e-10, 1e-12),
            ..ReducedConfig::default()
        };
        let grid: Vec<f64> = (0..=500).map(|i| i as f64 * 0.02).collect();
        let (z0, y0) = (0.2, 0.0);
        let slow = integrate_reduced(&sys, &[z0], (0.0, 10.0), &cfg, Some(&grid)).unwrap();
        let lcfg = IntegratorConfig::default().with_tols(1e-10, 1e-12);
        let layer = integrate_layer(&sys, &[z0], &[y0], 40.0, &lcfg, None).unwrap();
        let eps = 0.05;
        let rate = ap.layer_rate(z0);
        for &t in &[0.0, 0.01, 0.05, 0.2, 1.0, 8.0] {
            let c = composite_v(&sys, &slow, &layer, eps, t).unwrap()[0];
            let zbar = slow.traj.interpolate(t).unwrap()[0];
            let closed = ap.qss(zbar) + (y0 - ap.qss(z0)) * (-rate * t / eps).exp();
            assert!((c - closed).abs() < 1e-7, "t = {t}: {c} vs {closed}");
        }
    }

    #[test]
    fn error_curves_linear_model_closed_form() {
        // For u' = -u, eps v' = -(v - u) from (1, v0):
        // u_eps = ubar exactly and the composite error is
        // eps/(1 - eps) * (exp(-t) - exp(-t/eps)).
        let sys = linear_model();
        let tight = IntegratorConfig::default().with_tols(1e-11, 1e-13);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let cfg = ReducedConfig {
            integrator: tight.clone(),
            ..ReducedConfig::default()
        };
        let slow = integrate_reduced(&sys, &[1.0], (0.0, 20.0), &cfg, Some(&grid)).unwrap();
        let v0 = 2.0;
        // Dense layer sampling keeps the interpolation error of the
        // correction below the closed-form comparison tolerance.
        let layer = integrate_layer(&sys, &[1.0], &[v0], 60.0, &tight, Some(40_000)).unwrap();
        let mut sups = Vec::new();
        for &eps in &[0.1, 0.05] {
            let full = integrate_full(
                &sys,
                &State::new(0.0, vec![1.0], vec![v0]),
                eps,
                20.0,
                &tight,
                Some(&grid),
            )
            .unwrap();
            let curves = error_curves(&sys, &full, &slow, &layer, eps, &grid).unwrap();
            // u decouples from v in this model: reduced u is exact.
            assert!(curves.sup_u_all < 1e-8, "sup_u {}", curves.sup_u_all);
            assert!(curves.err_composite[0] < 1e-9, "composite error at t = 0");
            for (i, &t) in grid.iter().enumerate() {
                let closed = eps / (1.0 - eps) * ((-t).exp() - (-t / eps).exp()).abs();
                assert!(
                    (curves.err_composite[i] - closed).abs() < 1e-6,
                    "eps = {eps}, t = {t}: {} vs {closed}",
                    curves.err_composite[i]
                );
            }
            sups.push(curves.sup_composite_all);
        }
        // Halving eps roughly halves the uniform error.
        let ratio = sups[1] / sups[0];
        assert!((0.3..=0.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn fast_time_form_consistent() {
        // Integrating u' = f, eps v' = g for dt equals integrating the
        // fast-time form du/dtau = eps f, dv/dtau = g (with t = eps tau)
        // for dtau = dt / eps.
        let ap = AlleeParams::default();
        let sys = allee_system(ap);
        let eps = 0.04;
        let dt = 0.5;
        let y0 = [0.2, 0.7];
        let cfg = IntegratorConfig::default().with_tols(1e-11, 1e-13);

        let slow_form = |t: f64, y: &[f64], dy: &mut [f64]| -> crate::error::Result<()> {
            let f = sys.f(&y[..1], &y[1..], t, eps)?;
            let g = sys.g(&y[..1], &y[1..], t, eps)?;
            dy[0] = f[0];
            dy[1] = g[0] / eps;
            Ok(())
        };
        let fast_form = |tau: f64, y: &[f64], dy: &mut [f64]| -> crate::error::Result<()> {
            let t = eps * tau;
            let f = sys.f(&y[..1], &y[1..], t, eps)?;
            let g = sys.g(&y[..1], &y[1..], t, eps)?;
            dy[0] = eps * f[0];
            dy[1] = g[0];
            Ok(())
        };
        let a = integrate(slow_form, &y0, (0.0, dt), &cfg, None).unwrap();
        let b = integrate(fast_form, &y0, (0.0, dt / eps), &cfg, None).unwrap();
        for (x, y) in a.last_state().iter().zip(b.last_state()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn boundedness_violation_detected() {
        // u' = 1 with phi(u) = u grows past any bound.
        let sys = FastSlowSystem::new(
            "runaway",
            1,
            1,
            0.5,
            Box::new(|_u, _v, _t, _e| vec![1.0]),
            Box::new(|u, v, _t, _e| vec![u[0] - v[0]]),
        )
        .with_qss_seed(Box::new(|u, _t| vec![u[0]]));
        let cfg = ReducedConfig {
            curve_bound: 10.0,
            ..ReducedConfig::default()
        };
        match integrate_reduced(&sys, &[0.0], (0.0, 100.0), &cfg, None) {
            Err(Error::BoundednessViolation { .. }) => {}
            other => panic!("expected BoundednessViolation, got {:?}", other.map(|_| ())),
        }
    }
}
