//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Criterion 4 follows its stated eps list {0.08, 0.04, 0.02, 0.01} and
//! ratio band [0.35, 0.7] exactly. At the large-eps end of that list the
//! Allee model is outside its asymptotic regime (the initial value sits
//! near a slow bottleneck and the measured constants are still bending), so
//! the first ratio checks fail with the criterion as written; the
//! `convergence` test target shows the same quantities obeying the band
//! once eps <= 0.02. The numbers printed here are the measured record.

use fastslow::dichotomy::{continuity_modulus, fit_dichotomy};
use fastslow::hypotheses::{check_a3, check_a3_tube, full_report, AuditConfig};
use fastslow::integrate::IntegratorConfig;
use fastslow::layer::integrate_layer;
use fastslow::linalg::{char_poly, eigenvalues, hurwitz_cubic, Matrix};
use fastslow::localization::{coincidence_test, BumpProfile, Tube};
use fastslow::models::{
    allee_system, predprey_system, predprey_system_literal, AlleeParams, PredPreyParams,
};
use fastslow::reduction::{
    error_curves, integrate_full, integrate_reduced, solve_qss, ReducedConfig, SlowSolution,
};
use fastslow::system::{FastSlowSystem, State};

fn fmt_vec(v: &[f64]) -> String {
    let inner: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", inner.join(", "))
}

fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

fn tight() -> IntegratorConfig {
    IntegratorConfig::default().with_tols(1e-10, 1e-12)
}

fn reduced_tight() -> ReducedConfig {
    ReducedConfig {
        integrator: tight(),
        ..ReducedConfig::default()
    }
}

fn slow_on(sys: &FastSlowSystem, u0: &[f64], t_end: f64, grid: &[f64]) -> SlowSolution {
    integrate_reduced(sys, u0, (0.0, t_end), &reduced_tight(), Some(grid)).unwrap()
}

/// Simple deterministic LCG so the acceptance suite does not depend on rand.
struct Lcg(u64);
impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[test]
fn criterion_01_qss_matches_closed_forms() {
    let pp = PredPreyParams::default();
    let ap = AlleeParams::default();
    let sys_p = predprey_system(pp);
    let sys_a = allee_system(ap);
    let mut rng = Lcg(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.range(0.1, 6.0);
        let p = rng.range(0.1, 8.0);
        let q = solve_qss(&sys_p, &[n, p], 0.0, &[0.25 * n], 1e-12, 50).unwrap();
        worst = worst.max((q.v_root[0] - pp.patch1_share() * n).abs());

        let z = rng.range(0.0, 3.0);
        let q = solve_qss(&sys_a, &[z], 0.0, &[0.5 * ap.qss(z) + 0.05], 1e-12, 50).unwrap();
        worst = worst.max((q.v_root[0] - ap.qss(z)).abs());
    }
    let ok = worst <= 1e-11;
    println!(
        "criterion 01 (qss closed forms): {} - worst |newton - closed| = {worst:.3e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_02_characteristic_cubic() {
    let pp = PredPreyParams::default();
    let eps = 0.05;
    let scaled = pp.star_jacobian(eps).unwrap().scale(eps);
    let coeffs = char_poly(&scaled);
    let expected = [
        3.1222222222222222,
        0.013611111111111114,
        0.012250000000000002,
    ];
    let gaps: Vec<f64> = coeffs
        .iter()
        .zip(&expected)
        .map(|(c, e)| (c - e).abs())
        .collect();
    let hurwitz = hurwitz_cubic(coeffs[0], coeffs[1], coeffs[2]);
    let all_left = eigenvalues(&scaled).unwrap().spectral_bound < 0.0;
    let ok = gaps.iter().all(|g| *g <= 1e-10) && hurwitz && all_left;
    println!(
        "criterion 02 (characteristic cubic): {} - coeffs {coeffs:?}, gaps {gaps:?}, hurwitz {hurwitz}, stable {all_left}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_03_long_time_split() {
    // Full system spirals into its interior equilibrium while the corrected
    // reduced system is a genuine centre conserving its first integral.
    let pp = PredPreyParams::default();
    let sys = predprey_system(pp);
    let eps = 0.05;
    let grid = uniform_grid(300.0, 3000);
    let init = State::new(0.0, vec![3.0, 1.0], vec![2.0]);
    let full = integrate_full(
        &sys,
        &init,
        eps,
        300.0,
        &IntegratorConfig::default(),
        Some(&grid),
    )
    .unwrap();
    let [n_star, n2_star, p_star] = pp.full_equilibrium(eps).unwrap();
    let eq = [n_star, p_star, n2_star]; // flat layout is (u, v) = (n, p, n2)
    let mut means = Vec::new();
    for w in 0..10 {
        let (lo, hi) = (50.0 + 25.0 * w as f64, 50.0 + 25.0 * (w + 1) as f64);
        let mut acc = 0.0;
        let mut count = 0usize;
        for (t, y) in full.times().iter().zip(full.states()) {
            if *t >= lo && *t < hi {
                acc += y
                    .iter()
                    .zip(&eq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                count += 1;
            }
        }
        means.push(acc / count as f64);
    }
    let monotone = means.windows(2).all(|w| w[1] < w[0]);

    let red_grid = uniform_grid(100.0, 1000);
    let slow = slow_on(&sys, &[3.0, 1.0], 100.0, &red_grid);
    let v0 = pp.lotka_volterra_integral(3.0, 1.0);
    let drift = slow
        .traj
        .states()
        .iter()
        .map(|s| (pp.lotka_volterra_integral(s[0], s[1]) - v0).abs())
        .fold(0.0, f64::max);
    let ok = monotone && drift < 1e-6;
    println!(
        "criterion 03 (long-time split): {} - windowed means {} monotone {monotone}, LV drift {drift:.3e}",
        if ok { "PASS" } else { "FAIL" },
        fmt_vec(&means)
    );
    assert!(ok);
}

#[test]
fn criterion_04_uniform_convergence_sweep() {
    let ap = AlleeParams::default();
    let sys = allee_system(ap);
    let t_end = 200.0;
    let grid = uniform_grid(t_end, 4000);
    let slow = slow_on(&sys, &[0.2], t_end, &grid);
    let layer = integrate_layer(&sys, &[0.2], &[0.0], 45.0 / 1.6, &tight(), Some(8000)).unwrap();

    let eps_list = [0.08, 0.04, 0.02, 0.01];
    let mut sup_u = Vec::new();
    let mut sup_c = Vec::new();
    let mut window_ok = true;
    for &eps in &eps_list {
        let init = State::new(0.0, vec![0.2], vec![0.0]);
        let full = integrate_full(
            &sys,
            &init,
            eps,
            t_end,
            &IntegratorConfig::default(),
            Some(&grid),
        )
        .unwrap();
        let curves = error_curves(&sys, &full, &slow, &layer, eps, &grid).unwrap();
        sup_u.push(curves.sup_u_after_layer);
        sup_c.push(curves.sup_composite_all);
        // No error growth at large time: sup over [100, 200] within 1.5x of
        // sup over [5, 20], for both error kinds.
        let wsup = |vals: &[f64], lo: f64, hi: f64| -> f64 {
            grid.iter()
                .zip(vals)
                .filter(|(t, _)| **t >= lo && **t <= hi)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        };
        for vals in [&curves.err_u, &curves.err_composite] {
            let early = wsup(vals, 5.0, 20.0);
            let late = wsup(vals, 100.0, 200.0);
            if late > 1.5 * early {
                window_ok = false;
            }
        }
    }
    let ratios = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| w[1] / w[0]).collect() };
    let ru = ratios(&sup_u);
    let rc = ratios(&sup_c);
    let in_band = |r: &[f64]| r.iter().all(|x| (0.35..=0.7).contains(x));
    let mono = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let u_ok = mono(&sup_u) && in_band(&ru);
    let c_ok = mono(&sup_c) && in_band(&rc);
    let ok = u_ok && c_ok && window_ok;
    println!(
        "criterion 04 (uniform-in-time sweep): {} - sup_u {} ratios {} | sup_comp {} ratios {} | no-late-growth {window_ok}",
        if ok { "PASS" } else { "FAIL" },
        fmt_vec(&sup_u),
        fmt_vec(&ru),
        fmt_vec(&sup_c),
        fmt_vec(&rc)
    );
    assert!(
        window_ok,
        "late-time growth detected: the infinite-interval claim failed"
    );
    assert!(u_ok, "u-error sweep outside the stated band: {ru:?}");
    assert!(c_ok, "composite sweep outside the stated band: {rc:?}");
}

#[test]
fn criterion_05_layer_decay_rates() {
    let ap = AlleeParams::default();
    let sys_a = allee_system(ap);
    let layer_a = integrate_layer(&sys_a, &[0.2], &[0.0], 25.0, &tight(), None).unwrap();
    let ka = layer_a.fit.unwrap().kappa;

    let sys_p = predprey_system(PredPreyParams::default());
    let layer_p = integrate_layer(&sys_p, &[3.0, 1.0], &[0.5], 15.0, &tight(), None).unwrap();
    let kp = layer_p.fit.unwrap().kappa;

    let ok = (ka - 1.6).abs() <= 0.016 && (kp - 3.0).abs() <= 0.03;
    println!(
        "criterion 05 (layer decay): {} - allee kappa {ka:.6} (want 1.6 +/- 1%), predprey kappa {kp:.6} (want 3 +/- 1%)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_06_allee_bistability() {
    let ap = AlleeParams::default();
    let sys = allee_system(ap);
    let grid = uniform_grid(200.0, 800);
    let below = slow_on(&sys, &[0.1], 200.0, &grid).traj.last_state()[0];
    let above = slow_on(&sys, &[0.2], 200.0, &grid).traj.last_state()[0];
    let (z2, z3) = ap.positive_equilibria().unwrap();

    // Independent oracle: bisect (1 - z)(1 + xiK z) - ratio on both sides
    // of the parabola vertex.
    let ratio = ap.threshold_ratio();
    let h = |z: f64| (1.0 - z) * (1.0 + ap.xi_k * z) - ratio;
    let bisect = |mut lo: f64, mut hi: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(lo) * h(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let vertex = (ap.xi_k - 1.0) / (2.0 * ap.xi_k);
    let z2_oracle = bisect(0.0, vertex);
    let z3_oracle = bisect(vertex, 1.0);

    let ok = below.abs() < 1e-3
        && (above - z3).abs() < 1e-3
        && (z2 - z2_oracle).abs() <= 1e-10
        && (z3 - z3_oracle).abs() <= 1e-10;
    println!(
        "criterion 06 (bistability): {} - z(200) from 0.1: {below:.2e}; from 0.2: {above:.8} vs z3 {z3:.8}; |z2 - oracle| {:.2e}, |z3 - oracle| {:.2e}",
        if ok { "PASS" } else { "FAIL" },
        (z2 - z2_oracle).abs(),
        (z3 - z3_oracle).abs()
    );
    assert!(ok);
}

#[test]
fn criterion_07_dichotomy_suite() {
    let d_diag = |_t: f64| Matrix::diagonal(&[-1.0, -2.0]);
    let d_tri = |t: f64| Matrix::from_rows(&[&[-1.0, t.sin()], &[0.0, -1.0]]);

    let mut diag_ok = true;
    for &eps in &[0.1, 0.05] {
        let fit = fit_dichotomy(&d_diag, eps, 4.0, None, Some(0.5)).unwrap();
        if (fit.c - 1.0).abs() > 1e-6 || !fit.pass {
            diag_ok = false;
        }
    }

    let mut cs = Vec::new();
    let mut rates = Vec::new();
    for &eps in &[0.1, 0.05, 0.025] {
        let fit = fit_dichotomy(&d_tri, eps, 4.0, None, Some(0.25)).unwrap();
        cs.push(fit.c);
        rates.push(fit.decay_rate.unwrap());
    }
    let cmax = cs.iter().cloned().fold(0.0, f64::max);
    let cmin = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_stable = (cmax - cmin) / cmax < 0.05;
    let rate_ratios: Vec<f64> = rates.windows(2).map(|w| w[1] / w[0]).collect();
    let rate_ok = rate_ratios.iter().all(|r| (r - 2.0).abs() <= 0.1);

    let mut deltas = Vec::new();
    for &eps in &[0.1, 0.05, 0.025] {
        deltas.push(continuity_modulus(&d_tri, eps, 8.0, 512, 32));
    }
    let delta_monotone = deltas.windows(2).all(|w| w[1] < w[0]);

    let ok = diag_ok && c_stable && rate_ok && delta_monotone;
    println!(
        "criterion 07 (dichotomy suite): {} - diag c exact {diag_ok}; c values {} stable {c_stable}; rate ratios {}; deltas {} monotone {delta_monotone}",
        if ok { "PASS" } else { "FAIL" },
        fmt_vec(&cs),
        fmt_vec(&rate_ratios),
        fmt_vec(&deltas)
    );
    assert!(ok);
}

#[test]
fn criterion_08_localization_coincidence() {
    let ap = AlleeParams::default();
    let sys = allee_system(ap);
    let grid = uniform_grid(50.0, 500);
    let slow = slow_on(&sys, &[0.5], 50.0, &grid);
    let profile = BumpProfile::standard();

    let tube = Tube::new(slow.clone(), 0.5).unwrap();
    let init = State::new(0.0, vec![0.5], vec![ap.qss(0.5)]);
    let inside = coincidence_test(
        &profile,
        &tube,
        &sys,
        0.05,
        &init,
        50.0,
        &IntegratorConfig::default(),
        500,
    )
    .unwrap();

    let narrow = Tube::new(slow, 0.1).unwrap();
    let outside_init = State::new(0.0, vec![0.9], vec![ap.qss(0.9) + 0.5]);
    let control = coincidence_test(
        &profile,
        &narrow,
        &sys,
        0.05,
        &outside_init,
        1.0,
        &IntegratorConfig::default(),
        200,
    )
    .unwrap();

    let ok =
        inside.first_exit.is_none() && inside.max_gap_inside < 1e-6 && control.max_gap_total > 1e-2;
    println!(
        "criterion 08 (localization coincidence): {} - in-tube gap {:.3e} (exit {:?}); control gap {:.3e}",
        if ok { "PASS" } else { "FAIL" },
        inside.max_gap_inside,
        inside.first_exit,
        control.max_gap_total
    );
    assert!(ok);
}

#[test]
fn criterion_09_hypothesis_audits() {
    let cfg = AuditConfig::default();
    let sys_p = predprey_system(PredPreyParams::default());
    let rep_p = full_report(&sys_p, &[3.0, 1.0], &[2.0], (0.0, 40.0), &cfg).unwrap();
    let sys_a = allee_system(AlleeParams::default());
    let rep_a = full_report(&sys_a, &[0.2], &[0.0], (0.0, 40.0), &cfg).unwrap();

    let kp = rep_p.a3.as_ref().unwrap().kappa_prime;
    let ka = rep_a.a3.as_ref().unwrap().kappa_prime;
    let pass_both = rep_p.pass && rep_a.pass;
    let kappas_ok = (kp - 3.0).abs() <= 1e-9 && ka >= 1.0;

    // Tube with vanishing radius agrees with the curve margin.
    let grid = uniform_grid(40.0, 100);
    let mut tube_ok = true;
    for (sys, u0) in [(&sys_p, vec![3.0, 1.0]), (&sys_a, vec![0.2])] {
        let slow = slow_on(sys, &u0, 40.0, &grid);
        let a3 = check_a3(sys, &slow, &grid).unwrap();
        let tube = check_a3_tube(sys, &slow, &grid, 0.0, 0.0, 8, 0).unwrap();
        if (tube.kappa - a3.kappa_prime).abs() > 1e-6 {
            tube_ok = false;
        }
    }

    // Both reduced-stability routes give the same verdict on each model:
    // pass on the Allee model, fail on the predator-prey centre.
    let p_eq = rep_p.a5_equilibrium.as_ref().unwrap().pass;
    let p_prop = rep_p.a5_propagator.as_ref().unwrap().pass;
    let a_eq = rep_a.a5_equilibrium.as_ref().unwrap().pass;
    let a_prop = rep_a.a5_propagator.as_ref().unwrap().pass;
    let routes_agree = (p_eq == p_prop) && (a_eq == a_prop) && a_eq && !p_eq;
    let uniform_flags_ok = rep_a.uniform_pass && !rep_p.uniform_pass;

    let ok = pass_both && kappas_ok && tube_ok && routes_agree && uniform_flags_ok;
    println!(
        "criterion 09 (hypothesis audits): {} - predprey pass {} kappa' {kp:.6}; allee pass {} kappa' {ka:.6}; tube->a3 {tube_ok}; a5 agree (pp {p_eq}/{p_prop}, allee {a_eq}/{a_prop}); uniform flags ok {uniform_flags_ok}",
        if ok { "PASS" } else { "FAIL" },
        rep_p.pass,
        rep_a.pass
    );
    assert!(ok);
}

#[test]
fn criterion_10_typo_oracles() {
    // The literal transcription of the aggregated reduced system must not
    // converge under the eps sweep, while the derived one does.
    let pp = PredPreyParams::default();
    let t_end = 10.0;
    let grid = uniform_grid(t_end, 1000);
    let eps_list = [0.08, 0.04, 0.02, 0.01];
    let sup_for = |sys: &FastSlowSystem| -> Vec<f64> {
        let slow = slow_on(sys, &[3.0, 1.0], t_end, &grid);
        let layer = integrate_layer(sys, &[3.0, 1.0], &[2.0], 20.0, &tight(), None).unwrap();
        eps_list
            .iter()
            .map(|&eps| {
                let init = State::new(0.0, vec![3.0, 1.0], vec![2.0]);
                let full = integrate_full(
                    sys,
                    &init,
                    eps,
                    t_end,
                    &IntegratorConfig::default(),
                    Some(&grid),
                )
                .unwrap();
                error_curves(sys, &full, &slow, &layer, eps, &grid)
                    .unwrap()
                    .sup_u_after_layer
            })
            .collect()
    };
    let corrected = sup_for(&predprey_system(pp));
    let literal = sup_for(&predprey_system_literal(pp));
    let corrected_shrinks = corrected.windows(2).all(|w| w[1] < w[0]);
    let final_gap_ok = literal[3] > 10.0 * corrected[3];

    // Parabola maximum of the threshold equation by golden-section search.
    let ap = AlleeParams::default();
    let h = |z: f64| (1.0 - z) * (1.0 + ap.xi_k * z);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let c = hi - phi * (hi - lo);
        let d = lo + phi * (hi - lo);
        if h(c) < h(d) {
            lo = c;
        } else {
            hi = d;
        }
    }
    let numeric_max = h(0.5 * (lo + hi));
    let parabola_ok = (numeric_max - 4.0 / 3.0).abs() <= 1e-8;

    let ok = corrected_shrinks && final_gap_ok && parabola_ok;
    println!(
        "criterion 10 (typo oracles): {} - corrected sups {} shrink {corrected_shrinks}; literal sups {}; final literal/corrected = {:.1}; parabola max {numeric_max:.10} vs 4/3",
        if ok { "PASS" } else { "FAIL" },
        fmt_vec(&corrected),
        fmt_vec(&literal),
        literal[3] / corrected[3]
    );
    assert!(ok);
}
