//! ODE integration engines.
//!
//! Three methods cover the workloads in this crate:
//!
//! * `Rk45Adaptive` - embedded Dormand-Prince 5(4) pair with standard step
//!   control; the workhorse. The full stiff system is integrated with
//!   `max_step` capped at `eps / 2`, which resolves the layer time scale
//!   and keeps the explicit method inside its stability region at desk
//!   scale (`eps >= 0.005`).
//! * `Rk4Fixed` - classical fourth-order Runge-Kutta with step `max_step`;
//!   used for order checks and as an agreement cross-check.
//! * `BackwardEuler` - damped-Newton implicit Euler with step `max_step`,
//!   the documented fallback for `eps` below the explicit range.
//!
//! Dense output is linear interpolation between accepted steps: output
//! grids feed error curves and plots, never further integration.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::system::{TrajMeta, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
    BackwardEuler,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4_fixed",
            Method::Rk45Adaptive => "rk45_adaptive",
            Method::BackwardEuler => "backward_euler",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Also the fixed step for `Rk4Fixed` and `BackwardEuler`.
    pub max_step: f64,
    pub min_step: f64,
    /// Guard against runaway integrations.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: 100_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.min_step < self.max_step) {
            return Err(Error::InvalidArgument(
                "min_step must be below max_step".into(),
            ));
        }
        Ok(())
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tols(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }
}

/// Collects output samples, either on a caller grid (linear interpolation
/// between accepted steps) or at the accepted steps themselves.
struct OutputCollector<'g> {
    grid: Option<&'g [f64]>,
    next: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl<'g> OutputCollector<'g> {
    /// Next grid time strictly ahead of `t`, if any. Steps are clamped to
    /// land on it so that grid samples carry full integrator accuracy.
    fn next_pending(&self, t: f64) -> Option<f64> {
        let g = self.grid?;
        let mut i = self.next;
        while i < g.len() {
            if g[i] > t {
                return Some(g[i]);
            }
            i += 1;
        }
        None
    }

    fn new(grid: Option<&'g [f64]>, t0: f64, y0: &[f64]) -> Result<Self> {
        if let Some(g) = grid {
            for w in g.windows(2) {
                if !(w[1] > w[0]) {
                    return Err(Error::InvalidArgument("output grid not increasing".into()));
                }
            }
        }
        let mut c = OutputCollector {
            grid,
            next: 0,
            times: Vec::new(),
            states: Vec::new(),
        };
        if let Some(g) = c.grid {
            while c.next < g.len() && g[c.next] <= t0 {
                c.times.push(g[c.next]);
                c.states.push(y0.to_vec());
                c.next += 1;
            }
        } else {
            c.times.push(t0);
            c.states.push(y0.to_vec());
        }
        Ok(c)
    }

    fn accept(&mut self, t0: f64, y0: &[f64], t1: f64, y1: &[f64]) {
        match self.grid {
            Some(g) => {
                while self.next < g.len() && g[self.next] <= t1 {
                    let tq = g[self.next];
                    let w = if t1 > t0 { (tq - t0) / (t1 - t0) } else { 1.0 };
                    self.times.push(tq);
                    self.states.push(
                        y0.iter()
                            .zip(y1)
                            .map(|(a, b)| a * (1.0 - w) + b * w)
                            .collect(),
                    );
                    self.next += 1;
                }
            }
            None => {
                self.times.push(t1);
                self.states.push(y1.to_vec());
            }
        }
    }

    fn finish(self, meta: TrajMeta) -> Result<Trajectory> {
        Trajectory::new(self.times, self.states, meta)
    }
}

fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { t });
    }
    Ok(())
}

/// Integrate `y' = rhs(t, y)` over `t_span`, sampling at `output_grid`
/// (or at the accepted steps when no grid is given).
pub fn integrate<F>(
    mut rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    output_grid: Option<&[f64]>,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    let (t0, t_end) = t_span;
    if !(t_end > t0) {
        return Err(Error::InvalidArgument("t_span must be forward".into()));
    }
    check_finite(t0, y0)?;
    match cfg.method {
        Method::Rk45Adaptive => rk45(&mut rhs, y0, t0, t_end, cfg, output_grid),
        Method::Rk4Fixed => rk4_fixed(&mut rhs, y0, t0, t_end, cfg, output_grid),
        Method::BackwardEuler => backward_euler(&mut rhs, y0, t0, t_end, cfg, output_grid),
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights equal the last row of A (FSAL); 4th-order weights below.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk45<F>(
    rhs: &mut F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_grid: Option<&[f64]>,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let mut out = OutputCollector::new(output_grid, t0, y0)?;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    rhs(t, &y, &mut k[0])?;

    // Initial step: conservative fraction of the span and the cap.
    let mut h_ctrl = ((t_end - t0) / 100.0)
        .min(cfg.max_step)
        .max(cfg.min_step * 2.0);
    let mut steps = 0usize;
    let mut ytmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];

    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: cfg.max_steps,
            });
        }
        steps += 1;
        let span_left = t_end - t;
        let h_prop = h_ctrl.min(cfg.max_step);
        // Only the controller can underflow; clamping to the span end or to
        // an output time cannot.
        if h_prop < span_left && h_prop < cfg.min_step {
            return Err(Error::StepUnderflow { t, step: h_prop });
        }
        let mut h_use = h_prop.min(span_left);
        let mut clamped_for_output = false;
        if let Some(tq) = out.next_pending(t) {
            if tq - t < h_use {
                h_use = tq - t;
                clamped_for_output = true;
            }
        }
        let h = h_use;

        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            let (k_prev, k_rest) = k.split_at_mut(stage + 1);
            let _ = k_prev;
            rhs(t + C[stage] * h, &ytmp, &mut k_rest[0])?;
        }
        // Stage 7 input (= 5th-order solution, FSAL).
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..6 {
                let a = A[5][j];
                if a != 0.0 {
                    acc += a * k[j][i];
                }
            }
            y5[i] = y[i] + h * acc;
        }
        // k[6] was already computed as the last stage above with C[5] = 1 and
        // the A[5] row, so it is rhs(t + h, y5).
        let mut err_norm = 0.0f64;
        for i in 0..dim {
            let mut acc4 = 0.0;
            for j in 0..6 {
                if B4[j] != 0.0 {
                    acc4 += B4[j] * k[j][i];
                }
            }
            acc4 += B4[6] * k[6][i];
            let y4i = y[i] + h * acc4;
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4i) / scale;
            err_norm += e * e;
        }
        err_norm = (err_norm / dim as f64).sqrt();

        let accepted = err_norm <= 1.0;
        if accepted {
            check_finite(t + h, &y5)?;
            out.accept(t, &y, t + h, &y5);
            t += h;
            std::mem::swap(&mut y, &mut y5);
            k.swap(0, 6); // FSAL
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        // A step shortened only to land on an output time must not shrink
        // the controller's proposal.
        h_ctrl = if accepted && clamped_for_output {
            h_prop.max(h_use * factor)
        } else {
            h_use * factor
        };
    }
    out.finish(TrajMeta {
        integrator: Method::Rk45Adaptive.name().into(),
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        eps: None,
    })
}

fn rk4_fixed<F>(
    rhs: &mut F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_grid: Option<&[f64]>,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !cfg.max_step.is_finite() {
        return Err(Error::InvalidArgument(
            "rk4_fixed uses max_step as its step; set it to a finite value".into(),
        ));
    }
    let dim = y0.len();
    let mut out = OutputCollector::new(output_grid, t0, y0)?;
    let mut t = t0;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut ytmp = vec![0.0; dim];
    let mut steps = 0usize;
    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: cfg.max_steps,
            });
        }
        steps += 1;
        let mut h = cfg.max_step.min(t_end - t);
        if let Some(tq) = out.next_pending(t) {
            if tq - t < h {
                h = tq - t;
            }
        }
        rhs(t, &y, &mut k1)?;
        for i in 0..dim {
            ytmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &ytmp, &mut k2)?;
        for i in 0..dim {
            ytmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, &ytmp, &mut k3)?;
        for i in 0..dim {
            ytmp[i] = y[i] + h * k3[i];
        }
        rhs(t + h, &ytmp, &mut k4)?;
        let yold = y.clone();
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_finite(t + h, &y)?;
        out.accept(t, &yold, t + h, &y);
        t += h;
    }
    out.finish(TrajMeta {
        integrator: Method::Rk4Fixed.name().into(),
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        eps: None,
    })
}

fn backward_euler<F>(
    rhs: &mut F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_grid: Option<&[f64]>,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !cfg.max_step.is_finite() {
        return Err(Error::InvalidArgument(
            "backward_euler uses max_step as its step; set it to a finite value".into(),
        ));
    }
    let dim = y0.len();
    let mut out = OutputCollector::new(output_grid, t0, y0)?;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut steps = 0usize;
    let mut fw = vec![0.0; dim];
    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: cfg.max_steps,
            });
        }
        steps += 1;
        let mut h = cfg.max_step.min(t_end - t);
        if let Some(tq) = out.next_pending(t) {
            if tq - t < h {
                h = tq - t;
            }
        }
        let t1 = t + h;
        // Newton on r(w) = w - y - h f(t1, w), Jacobian I - h df/dw by
        // central differences, damped by step halving.
        let mut w = y.clone();
        let newton_tol = cfg.abs_tol + cfg.rel_tol * y.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut res_norm = f64::INFINITY;
        for _ in 0..50 {
            rhs(t1, &w, &mut fw)?;
            let r: Vec<f64> = (0..dim).map(|i| w[i] - y[i] - h * fw[i]).collect();
            res_norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if res_norm <= newton_tol {
                break;
            }
            let mut jac = Matrix::zeros(dim, dim);
            let mut fp = vec![0.0; dim];
            let mut fm = vec![0.0; dim];
            for j in 0..dim {
                let hj = (1e-6 * w[j].abs()).max(1e-6);
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += hj;
                wm[j] -= hj;
                rhs(t1, &wp, &mut fp)?;
                rhs(t1, &wm, &mut fm)?;
                for i in 0..dim {
                    jac[(i, j)] = f64::from(i == j) - h * (fp[i] - fm[i]) / (2.0 * hj);
                }
            }
            let dw = Lu::new(&jac)?.solve(&r);
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..10 {
                let wtry: Vec<f64> = (0..dim).map(|i| w[i] - lambda * dw[i]).collect();
                rhs(t1, &wtry, &mut fw)?;
                let rtry: Vec<f64> = (0..dim).map(|i| wtry[i] - y[i] - h * fw[i]).collect();
                let rn = rtry.iter().map(|x| x * x).sum::<f64>().sqrt();
                if rn < res_norm || rn <= newton_tol {
                    w = wtry;
                    res_norm = rn;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if res_norm > newton_tol.max(1e-8) {
            return Err(Error::NoConvergence {
                iters: 50,
                residual: res_norm,
            });
        }
        check_finite(t1, &w)?;
        out.accept(t, &y, t1, &w);
        y = w;
        t = t1;
    }
    out.finish(TrajMeta {
        integrator: Method::BackwardEuler.name().into(),
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        eps: None,
    })
}
