//! Localizing the fast field around the slow curve.
//!
//! The localized field equals the original one on the inner tube and
//! degrades to a stable linear field far away. Trajectories of the two
//! systems coincide to integrator accuracy as long as the localized flow
//! stays in the inner tube; an outside start is the negative control.
//!
//! Run: cargo run --example localization_coincidence

use fastslow::integrate::IntegratorConfig;
use fastslow::localization::{bump_weights, coincidence_test, localized_g, BumpProfile, Tube};
use fastslow::models::{allee_system, AlleeParams};
use fastslow::reduction::{integrate_reduced, ReducedConfig};
use fastslow::system::State;

fn main() -> fastslow::Result<()> {
    let params = AlleeParams::default();
    let sys = allee_system(params);
    let grid: Vec<f64> = (0..=500).map(|i| i as f64 * 0.1).collect();
    let slow = integrate_reduced(
        &sys,
        &[0.5],
        (0.0, 50.0),
        &ReducedConfig::default(),
        Some(&grid),
    )?;
    let profile = BumpProfile::standard();
    println!("bump profile: max |psi'| = {:.4}", profile.max_deriv);

    let tube = Tube::new(slow.clone(), 0.5)?;
    let c = tube.center(&sys, 10.0)?;
    println!(
        "tube centre at t = 10: z = {:.6}, phi = {:.6}",
        c.ubar[0], c.vbar[0]
    );
    for off in [0.0, 0.3, 0.6, 1.2] {
        let u = vec![c.ubar[0] + off * tube.delta];
        let v = vec![c.vbar[0]];
        let (pu, pv, both) = bump_weights(&profile, &tube, &sys, &u, &v, 10.0)?;
        let gl = localized_g(&profile, &tube, &sys, &u, &v, 10.0, 0.05)?[0];
        let g = sys.g(&u, &v, 10.0, 0.05)?[0];
        println!(
            "  |u - ubar| = {:.2} delta: weights ({pu:.3}, {pv:.3}, {both:.3}), g_loc - g = {:+.3e}",
            off,
            gl - g
        );
    }

    println!();
    let init = State::new(0.0, vec![0.5], vec![params.qss(0.5)]);
    let res = coincidence_test(
        &profile,
        &tube,
        &sys,
        0.05,
        &init,
        50.0,
        &IntegratorConfig::default(),
        500,
    )?;
    println!(
        "in-tube start (on the manifold): exit = {:?}, sup gap = {:.3e}",
        res.first_exit, res.max_gap_inside
    );

    let narrow = Tube::new(slow, 0.1)?;
    let outside = State::new(0.0, vec![0.9], vec![params.qss(0.9) + 0.5]);
    let res = coincidence_test(
        &profile,
        &narrow,
        &sys,
        0.05,
        &outside,
        1.0,
        &IntegratorConfig::default(),
        200,
    )?;
    println!(
        "outside start (negative control): flows differ by {:.3e} within t = 1",
        res.max_gap_total
    );
    Ok(())
}
