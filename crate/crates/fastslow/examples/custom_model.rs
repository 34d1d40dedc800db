//! Registering your own fast-slow system and running the whole pipeline:
//! reduction, layer, composite error, hypothesis audit.
//!
//! The model here is the hand-solvable linear relaxation
//! u' = -u, eps v' = -(v - u), whose composite error has the closed form
//! eps/(1-eps) * (exp(-t) - exp(-t/eps)).
//!
//! Run: cargo run --example custom_model

use fastslow::hypotheses::{full_report, AuditConfig};
use fastslow::integrate::IntegratorConfig;
use fastslow::layer::integrate_layer;
use fastslow::reduction::{error_curves, integrate_full, integrate_reduced, ReducedConfig};
use fastslow::system::{FastSlowSystem, State};

fn main() -> fastslow::Result<()> {
    let sys = FastSlowSystem::new(
        "linear-relax",
        1, // slow dimension
        1, // fast dimension
        0.5,
        Box::new(|u, _v, _t, _eps| vec![-u[0]]),
        Box::new(|u, v, _t, _eps| vec![u[0] - v[0]]),
    )
    // A seed inside the Newton basin of g(u, ., t, 0) = 0; here the root
    // itself is known.
    .with_qss_seed(Box::new(|u, _t| vec![u[0]]))
    .with_slow_equilibria(vec![vec![0.0]]);

    let (u0, v0) = (1.0, 2.0);
    let eps = 0.05;
    let t_end = 15.0;
    let grid: Vec<f64> = (0..=600).map(|i| t_end * i as f64 / 600.0).collect();

    let tight = IntegratorConfig::default().with_tols(1e-10, 1e-12);
    let cfg = ReducedConfig {
        integrator: tight.clone(),
        ..ReducedConfig::default()
    };
    let slow = integrate_reduced(&sys, &[u0], (0.0, t_end), &cfg, Some(&grid))?;
    let layer = integrate_layer(&sys, &[u0], &[v0], 45.0, &tight, Some(20_000))?;
    let full = integrate_full(
        &sys,
        &State::new(0.0, vec![u0], vec![v0]),
        eps,
        t_end,
        &IntegratorConfig::default(),
        Some(&grid),
    )?;
    let curves = error_curves(&sys, &full, &slow, &layer, eps, &grid)?;

    println!("linear relaxation model, eps = {eps}");
    println!(
        "sup |u - ubar|        = {:.3e} (reduced u is exact here)",
        curves.sup_u_all
    );
    println!("sup |v - composite|   = {:.3e}", curves.sup_composite_all);
    let closed = eps / (1.0 - eps)
        * grid
            .iter()
            .map(|t| ((-t).exp() - (-t / eps).exp()).abs())
            .fold(0.0, f64::max);
    println!("closed-form prediction = {closed:.3e}");

    let report = full_report(&sys, &[u0], &[v0], (0.0, t_end), &AuditConfig::default())?;
    println!(
        "audit: classical pass = {}, uniform pass = {} (kappa' = {})",
        report.pass,
        report.uniform_pass,
        report
            .a3
            .as_ref()
            .map(|a| a.kappa_prime)
            .unwrap_or(f64::NAN)
    );
    Ok(())
}
