//! Propagator-norm bounds for eps Y' = D(t) Y.
//!
//! For a matrix function whose eigenvalues stay left of -2 sigma, the
//! propagator satisfies |Y(t) Y^-1(s)| <= c exp(-sigma (t-s)/eps) with c
//! independent of eps. The fit measures c on a pair grid, checks stability
//! under doubling the horizon, and reports the measured decay rate, which
//! scales like 1/eps. The modulus of continuity delta(eps) - the worst
//! variation of D over sqrt(eps) windows - is the quantity that controls
//! the perturbation argument behind the bound.
//!
//! Run: cargo run --release --example dichotomy_fit

use fastslow::dichotomy::{continuity_modulus, fit_dichotomy};
use fastslow::linalg::Matrix;

fn main() -> fastslow::Result<()> {
    let d_diag = |_t: f64| Matrix::diagonal(&[-1.0, -2.0]);
    let d_tri = |t: f64| Matrix::from_rows(&[&[-1.0, t.sin()], &[0.0, -1.0]]);

    println!("constant diag(-1, -2), sigma = 0.5:");
    for &eps in &[0.1, 0.05] {
        let fit = fit_dichotomy(&d_diag, eps, 4.0, None, Some(0.5))?;
        println!(
            "  eps = {eps:<6} c = {:.8} (doubled horizon: {:.8}) rate = {:.2} pass = {}",
            fit.c,
            fit.c_doubled,
            fit.decay_rate.unwrap_or(f64::NAN),
            fit.pass
        );
    }

    println!();
    println!("upper-triangular with sinusoidal coupling, sigma = 0.25:");
    for &eps in &[0.1, 0.05, 0.025] {
        let fit = fit_dichotomy(&d_tri, eps, 4.0, None, Some(0.25))?;
        println!(
            "  eps = {eps:<6} c = {:.8} rate = {:.2} ({} pairs) pass = {}",
            fit.c,
            fit.decay_rate.unwrap_or(f64::NAN),
            fit.pairs,
            fit.pass
        );
    }

    println!();
    println!("modulus of continuity of the sinusoidal D over sqrt(eps) windows:");
    for &eps in &[0.1, 0.05, 0.025, 0.0125] {
        let delta = continuity_modulus(&d_tri, eps, 8.0, 512, 32);
        println!(
            "  delta({eps:<6}) = {delta:.5}   (sqrt eps = {:.5})",
            eps.sqrt()
        );
    }
    Ok(())
}
