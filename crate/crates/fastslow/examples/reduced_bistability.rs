//! Bistability of the reduced Allee equation: extinction below the
//! threshold, carrying capacity above it.
//!
//! Run: cargo run --example reduced_bistability

use fastslow::models::{allee_system, AlleeParams, AlleeRegime};
use fastslow::reduction::{integrate_reduced, ReducedConfig};

fn main() -> fastslow::Result<()> {
    let params = AlleeParams::default();
    println!(
        "params: beta = {}, mu = {}, lambda = {}, xiK = {}",
        params.beta, params.mu, params.lambda, params.xi_k
    );
    println!(
        "threshold ratio = {:.6}, parabola max = {:.6}, regime = {:?}",
        params.threshold_ratio(),
        params.parabola_max(),
        params.regime()
    );
    let (z2, z3) = params.positive_equilibria().expect("allee regime");
    println!("equilibria: 0 (stable), z2 = {z2:.6} (threshold), z3 = {z3:.6} (capacity)");
    assert_eq!(params.regime(), AlleeRegime::Allee);

    let sys = allee_system(params);
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.5).collect();
    println!();
    println!("{:>8} {:>12} {:>12}", "t", "z from 0.1", "z from 0.2");
    let below = integrate_reduced(
        &sys,
        &[0.1],
        (0.0, 200.0),
        &ReducedConfig::default(),
        Some(&grid),
    )?;
    let above = integrate_reduced(
        &sys,
        &[0.2],
        (0.0, 200.0),
        &ReducedConfig::default(),
        Some(&grid),
    )?;
    for &t in &[0.0, 2.0, 5.0, 10.0, 20.0, 50.0, 200.0] {
        println!(
            "{t:>8.1} {:>12.6} {:>12.6}",
            below.traj.interpolate(t)?[0],
            above.traj.interpolate(t)?[0]
        );
    }
    println!();
    println!("0.1 < z2 dies out; 0.2 in (z2, z3) climbs to the carrying capacity.");
    Ok(())
}
