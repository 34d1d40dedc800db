//! Initial-layer corrections in fast time and their fitted decay rates.
//!
//! Both built-in models have linear layer equations, so the fitted rates
//! match the closed forms exactly: 1 + xiK*z for the Allee model and
//! m1 + m2 for the predator-prey migration.
//!
//! Run: cargo run --example layer_decay

use fastslow::integrate::IntegratorConfig;
use fastslow::layer::{basin_check, integrate_layer};
use fastslow::models::{allee_system, predprey_system, AlleeParams, PredPreyParams};

fn main() -> fastslow::Result<()> {
    let cfg = IntegratorConfig::default().with_tols(1e-10, 1e-12);

    let ap = AlleeParams::default();
    let allee = allee_system(ap);
    let (z0, y0) = (0.2, 0.0);
    let layer = integrate_layer(&allee, &[z0], &[y0], 25.0, &cfg, None)?;
    let fit = layer.fit.expect("decay fit");
    println!("allee layer from (z, y) = ({z0}, {y0}):");
    println!(
        "  correction(0) = {:+.6} -> 0, fitted C = {:.4}, kappa = {:.6} (closed form {})",
        layer.correction_at(0.0)[0],
        fit.c,
        fit.kappa,
        ap.layer_rate(z0)
    );
    println!(
        "  tau to reach 1e-3 of the root: {:.3} (so t ~ {:.3} eps)",
        layer.tau_rho(1e-3).unwrap(),
        layer.tau_rho(1e-3).unwrap()
    );
    println!(
        "  basin verdict for y = 5: {:?}",
        basin_check(&allee, &[z0], &[5.0])?
    );

    let pp = PredPreyParams::default();
    let pred = predprey_system(pp);
    let layer = integrate_layer(&pred, &[3.0, 1.0], &[0.5], 15.0, &cfg, None)?;
    let fit = layer.fit.expect("decay fit");
    println!();
    println!("predprey layer from n2 = 0.5 (root M1 n = 2):");
    println!(
        "  fitted kappa = {:.6} (closed form m1 + m2 = {})",
        fit.kappa,
        pp.m1 + pp.m2
    );
    println!("  converged: {}", layer.converged);
    Ok(())
}
