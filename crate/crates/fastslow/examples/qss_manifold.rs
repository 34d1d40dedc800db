//! Quasi-steady-state solve and manifold derivatives.
//!
//! Newton on g(u, v, t, 0) = 0 returns the root together with the
//! implicit-function derivatives phi_u = -g_v^-1 g_u and
//! phi_t = -g_v^-1 g_t, plus the smallest LU pivot certifying the root is
//! isolated.
//!
//! Run: cargo run --example qss_manifold

use fastslow::models::{allee_system, predprey_system, AlleeParams, PredPreyParams};
use fastslow::reduction::{reduced_rhs, solve_qss};

fn main() -> fastslow::Result<()> {
    let ap = AlleeParams::default();
    let allee = allee_system(ap);
    println!("allee: g(z, y, 0) = -xiK y z + z - y, root y = z / (1 + xiK z)");
    for z in [0.2, 0.5, 1.0] {
        let q = solve_qss(&allee, &[z], 0.0, &[0.0], 1e-12, 50)?;
        println!(
            "  z = {z}: y = {:.10} (closed form {:.10}), {} Newton steps, phi_u = {:+.6}, pivot {:.3}",
            q.v_root[0],
            ap.qss(z),
            q.newton_iters,
            q.phi_u[(0, 0)],
            q.min_pivot
        );
    }

    let pp = PredPreyParams::default();
    let pred = predprey_system(pp);
    println!();
    println!(
        "predprey: g linear in n2, root n2 = M1 n with M1 = {:.4}",
        pp.patch1_share()
    );
    let q = solve_qss(&pred, &[3.0, 1.0], 0.0, &[0.0], 1e-12, 50)?;
    println!(
        "  n = 3: n2 = {:.10}, phi_u = [{:+.4}, {:+.4}]",
        q.v_root[0],
        q.phi_u[(0, 0)],
        q.phi_u[(0, 1)]
    );

    // Substituting the root into the slow field gives the reduced equation;
    // at the reduced equilibrium it vanishes.
    let [ne, pe] = pp.reduced_equilibrium();
    let r = reduced_rhs(&pred, &[ne, pe], 0.0, &[2.0])?;
    println!(
        "  reduced field at the centre ({ne:.4}, {pe:.4}): [{:+.2e}, {:+.2e}]",
        r[0], r[1]
    );
    Ok(())
}
