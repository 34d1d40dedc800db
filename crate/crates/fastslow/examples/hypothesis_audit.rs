//! Audit the reduction hypotheses on both built-in models.
//!
//! The predator-prey model passes the classical assumptions (isolated
//! root, spectral margin, basin) but fails reduced stability: its reduced
//! system is a centre, which is exactly why its reduction degrades at
//! large times. The Allee model passes everything, so its reduction is
//! valid uniformly in time.
//!
//! Run: cargo run --example hypothesis_audit

use fastslow::hypotheses::{full_report, AuditConfig};
use fastslow::models::{allee_system, predprey_system, AlleeParams, PredPreyParams};

fn main() -> fastslow::Result<()> {
    let cfg = AuditConfig::default();

    for (sys, u0, v0) in [
        (
            predprey_system(PredPreyParams::default()),
            vec![3.0, 1.0],
            vec![2.0],
        ),
        (allee_system(AlleeParams::default()), vec![0.2], vec![0.0]),
    ] {
        let report = full_report(&sys, &u0, &v0, (0.0, 40.0), &cfg)?;
        println!("=== {} ===", report.model);
        println!(
            "  A1 smoothness (declared):   {}",
            report.a1_declared_smooth
        );
        println!(
            "  A2 isolated root:           {} (min pivot {:.3e})",
            report.a2.isolated, report.a2.min_pivot
        );
        if let Some(a3) = &report.a3 {
            println!(
                "  A3 spectral margin:         kappa' = {:.6} (worst t = {:.2})",
                a3.kappa_prime, a3.worst_t
            );
        }
        if let Some(tube) = &report.a3_tube {
            println!(
                "  A3 tube (delta = {}, eps0 = {}): kappa = {:.6}",
                tube.delta, tube.eps0, tube.kappa
            );
        }
        if let Some(a4) = &report.a4 {
            println!(
                "  A4 basin:                   {:?} (layer rate {:?})",
                a4.verdict,
                a4.kappa_est.map(|k| (k * 1e6).round() / 1e6)
            );
        }
        if let Some(eq) = &report.a5_equilibrium {
            println!(
                "  A5 equilibrium route:       pass = {} (margin {:.4})",
                eq.pass, eq.alpha1
            );
        }
        if let Some(prop) = &report.a5_propagator {
            println!(
                "  A5 propagator route:        pass = {} (alpha1 = {:.4}, K1 = {:.3})",
                prop.pass,
                prop.alpha1,
                prop.k1.unwrap_or(f64::NAN)
            );
        }
        println!(
            "  classical PASS = {}, uniform-in-time PASS = {}",
            report.pass, report.uniform_pass
        );
        println!();
    }
    Ok(())
}
