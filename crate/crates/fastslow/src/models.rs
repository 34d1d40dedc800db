//! Built-in models: a predator-prey system with fast prey migration between
//! two patches, and an Allee-type mating model with fast pair formation.
//!
//! Both come with analytic Jacobians, closed-form quasi-steady-state seeds,
//! and declared equilibria, so every Newton solve and every audit in the
//! crate has an independent closed-form oracle to test against.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::system::{FastSlowSystem, JacobianOf};
use serde::{Deserialize, Serialize};

/// Predator-prey with two prey patches and fast migration.
///
/// The unaggregated system tracks prey densities `n1` (grazing ground,
/// hunted) and `n2` (refuge) and predators `p`:
///
/// ```text
/// n1' = n1 (r1 - a p) + (m2 n2 - m1 n1) / eps
/// n2' = n2 r2         + (m1 n1 - m2 n2) / eps
/// p'  = p (b n1 - d)
/// ```
///
/// Aggregating the total prey `n = n1 + n2` puts it in fast-slow form with
/// slow block `(n, p)` and fast block `n2`:
///
/// ```text
/// n'       = n (r1 - a p) + n2 (r2 - r1 + a p)
/// eps n2'  = eps n2 r2 + m1 n - n2 (m1 + m2)
/// p'       = p (b n - b n2 - d)
/// ```
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PredPreyParams {
    /// Migration rate out of patch 1 (grazing ground).
    pub m1: f64,
    /// Migration rate out of patch 2 (refuge).
    pub m2: f64,
    /// Prey growth rate in patch 1.
    pub r1: f64,
    /// Prey growth rate in patch 2.
    pub r2: f64,
    /// Predation rate in patch 1.
    pub a: f64,
    /// Biomass conversion rate.
    pub b: f64,
    /// Predator death rate.
    pub d: f64,
}

impl Default for PredPreyParams {
    /// The parameter set of the comparison figure: m1 = 2, m2 = 1, r1 = 1,
    /// r2 = 2, a = 1, b = 0.9, d = 1.
    fn default() -> Self {
        PredPreyParams {
            m1: 2.0,
            m2: 1.0,
            r1: 1.0,
            r2: 2.0,
            a: 1.0,
            b: 0.9,
            d: 1.0,
        }
    }
}

impl PredPreyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.m1, self.m2, self.r1, self.r2, self.a, self.b, self.d];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidArgument(
                "predprey parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Equilibrium fraction of prey in patch 1: m1 / (m1 + m2).
    pub fn patch1_share(&self) -> f64 {
        self.m1 / (self.m1 + self.m2)
    }

    /// Equilibrium fraction of prey in patch 2: m2 / (m1 + m2).
    pub fn patch2_share(&self) -> f64 {
        self.m2 / (self.m1 + self.m2)
    }

    /// Aggregated prey growth rate of the reduced system.
    pub fn aggregated_growth(&self) -> f64 {
        self.patch2_share() * self.r1 + self.patch1_share() * self.r2
    }

    /// Equilibrium of the reduced (aggregated, eps -> 0) system:
    /// `(n*, p*) = (d / (b M2), rbar / (a M2))`.
    pub fn reduced_equilibrium(&self) -> [f64; 2] {
        let m2s = self.patch2_share();
        [
            self.d / (self.b * m2s),
            self.aggregated_growth() / (self.a * m2s),
        ]
    }

    /// Interior equilibrium `(n1*, n2*, p*)` of the unaggregated system at
    /// finite eps; requires `m2 - eps r2 > 0`.
    pub fn full_equilibrium_patches(&self, eps: f64) -> Result<[f64; 3]> {
        let denom = self.m2 - eps * self.r2;
        if denom <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "no interior equilibrium: m2 - eps r2 = {denom} <= 0"
            )));
        }
        let n1 = self.d / self.b;
        let n2 = self.m1 * self.d / (self.b * denom);
        let p = self.r1 / self.a + self.m1 * self.r2 / (self.a * denom);
        Ok([n1, n2, p])
    }

    /// The same equilibrium in aggregated coordinates `(n, n2, p)`.
    pub fn full_equilibrium(&self, eps: f64) -> Result<[f64; 3]> {
        let [n1, n2, p] = self.full_equilibrium_patches(eps)?;
        Ok([n1 + n2, n2, p])
    }

    /// Right-hand side of the unaggregated three-species system; the
    /// aggregated fields are tested against sums of these components.
    pub fn original_rhs(&self, y: &[f64; 3], eps: f64) -> [f64; 3] {
        let [n1, n2, p] = *y;
        [
            n1 * (self.r1 - self.a * p) + (self.m2 * n2 - self.m1 * n1) / eps,
            n2 * self.r2 + (self.m1 * n1 - self.m2 * n2) / eps,
            p * (self.b * n1 - self.d),
        ]
    }

    /// Analytic Jacobian of the unaggregated system at its interior
    /// equilibrium.
    pub fn star_jacobian(&self, eps: f64) -> Result<Matrix> {
        let [n1, _n2, p] = self.full_equilibrium_patches(eps)?;
        Ok(Matrix::from_rows(&[
            &[
                self.r1 - self.a * p - self.m1 / eps,
                self.m2 / eps,
                -self.a * n1,
            ],
            &[self.m1 / eps, self.r2 - self.m2 / eps, 0.0],
            &[self.b * p, 0.0, self.b * n1 - self.d],
        ]))
    }

    /// Coefficients `(a1, a2, a3)` of the characteristic cubic of
    /// `eps * J*` obtained symbolically:
    ///
    /// ```text
    /// lambda^3 + lambda^2 (alpha + m2 - eps r2)
    ///          + lambda eps^2 beta gamma + eps^2 beta gamma (m2 - eps r2)
    /// ```
    ///
    /// with `alpha = m1 m2 / (m2 - eps r2)`, `beta = a d / b`,
    /// `gamma = b p*`.
    pub fn star_char_coeffs(&self, eps: f64) -> Result<[f64; 3]> {
        let [_, _, p] = self.full_equilibrium_patches(eps)?;
        let alpha = self.m1 * self.m2 / (self.m2 - eps * self.r2);
        let beta = self.a * self.d / self.b;
        let gamma = self.b * p;
        Ok([
            alpha + self.m2 - eps * self.r2,
            eps * eps * beta * gamma,
            eps * eps * beta * gamma * (self.m2 - eps * self.r2),
        ])
    }

    /// First integral of the reduced Lotka-Volterra system; constant along
    /// reduced orbits.
    pub fn lotka_volterra_integral(&self, n: f64, p: f64) -> f64 {
        let m2s = self.patch2_share();
        self.b * m2s * n - self.d * n.ln() + self.a * m2s * p - self.aggregated_growth() * p.ln()
    }
}

/// Build the aggregated predator-prey fast-slow system. Slow block
/// `u = (n, p)`, fast block `v = (n2,)`.
pub fn predprey_system(params: PredPreyParams) -> FastSlowSystem {
    build_predprey(params, false)
}

/// Same system, but with the reduced slow field replaced by a literal
/// transcription of the published aggregated equations, which carry two
/// transcription slips (`a M1` instead of `a M2` in the prey equation and a
/// missing `p` factor in the predator equation). Kept so the error-sweep
/// can demonstrate that the literal form does not converge.
pub fn predprey_system_literal(params: PredPreyParams) -> FastSlowSystem {
    build_predprey(params, true)
}

fn build_predprey(params: PredPreyParams, literal_reduced: bool) -> FastSlowSystem {
    params.validate().expect("invalid predprey parameters");
    let q = params;
    let f = move |u: &[f64], v: &[f64], _t: f64, _eps: f64| -> Vec<f64> {
        let (n, p, n2) = (u[0], u[1], v[0]);
        vec![
            n * (q.r1 - q.a * p) + n2 * (q.r2 - q.r1 + q.a * p),
            p * (q.b * n - q.b * n2 - q.d),
        ]
    };
    let g = move |u: &[f64], v: &[f64], _t: f64, eps: f64| -> Vec<f64> {
        let (n, n2) = (u[0], v[0]);
        vec![eps * n2 * q.r2 + q.m1 * n - n2 * (q.m1 + q.m2)]
    };
    let mut sys = FastSlowSystem::new(
        if literal_reduced {
            "predprey-literal"
        } else {
            "predprey"
        },
        2,
        1,
        0.4,
        Box::new(f),
        Box::new(g),
    )
    .with_jacobian(
        JacobianOf::Gv,
        Box::new(move |_u, _v, _t, eps| Matrix::from_rows(&[&[eps * q.r2 - (q.m1 + q.m2)]])),
    )
    .with_jacobian(
        JacobianOf::Gu,
        Box::new(move |_u, _v, _t, _eps| Matrix::from_rows(&[&[q.m1, 0.0]])),
    )
    .with_jacobian(
        JacobianOf::Fu,
        Box::new(move |u, v, _t, _eps| {
            let (n, p, n2) = (u[0], u[1], v[0]);
            Matrix::from_rows(&[
                &[q.r1 - q.a * p, -q.a * n + q.a * n2],
                &[q.b * p, q.b * n - q.b * n2 - q.d],
            ])
        }),
    )
    .with_jacobian(
        JacobianOf::Fv,
        Box::new(move |u, _v, _t, _eps| {
            let p = u[1];
            Matrix::from_rows(&[&[q.r2 - q.r1 + q.a * p], &[-q.b * p]])
        }),
    )
    .with_jacobian(
        JacobianOf::Gt,
        Box::new(move |_u, _v, _t, _eps| Matrix::zeros(1, 1)),
    )
    .with_qss_seed(Box::new(move |u, _t| vec![q.patch1_share() * u[0]]))
    .with_slow_equilibria(vec![params.reduced_equilibrium().to_vec()]);
    if literal_reduced {
        let rbar = q.aggregated_growth();
        let (m1s, m2s) = (q.patch1_share(), q.patch2_share());
        sys = sys.with_reduced_override(Box::new(move |u, _t| {
            let (n, p) = (u[0], u[1]);
            vec![n * (rbar - q.a * m1s * p), q.b * m2s * n - q.d]
        }));
    }
    sys
}

/// How many positive equilibria the reduced Allee equation has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlleeRegime {
    /// Extinction state, repelling threshold, stable carrying capacity.
    Allee,
    /// The threshold equation has no positive solution.
    NoPositiveEquilibrium,
    /// Exactly one distinct positive equilibrium.
    SinglePositive,
}

/// Allee-type mating model after nondimensionalization.
///
/// Slow variable `z` is the total female population in units of the
/// carrying capacity; fast variable `y` the searching females:
///
/// ```text
/// z'      = (R0 - 1) z (1 - z) - ((beta + lambda) / mu) y
/// eps y'  = -eps (1 + (lambda + nu K z) / mu) y - xiK y z + z - y
/// ```
///
/// with `R0 = beta / mu` and `nu K = beta - mu` forced by the definition of
/// the carrying capacity `K = (beta - mu) / nu`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AlleeParams {
    /// Reproduction rate of recently mated females.
    pub beta: f64,
    /// Baseline mortality rate.
    pub mu: f64,
    /// Mortality increment while searching for a mate.
    pub lambda: f64,
    /// Dimensionless encounter product xi-bar * K.
    #[serde(rename = "xiK")]
    pub xi_k: f64,
}

impl Default for AlleeParams {
    /// Working parameter set (beta, mu, lambda, xiK) = (10, 1, 1, 3); the
    /// published comparison figure states only its eps values, so the rest
    /// is a documented choice satisfying the Allee condition.
    fn default() -> Self {
        AlleeParams {
            beta: 10.0,
            mu: 1.0,
            lambda: 1.0,
            xi_k: 3.0,
        }
    }
}

impl AlleeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > self.mu && self.mu > 0.0) {
            return Err(Error::InvalidArgument(
                "need beta > mu > 0 for a positive carrying capacity".into(),
            ));
        }
        if !(self.lambda >= 0.0 && self.xi_k > 0.0) {
            return Err(Error::InvalidArgument(
                "need lambda >= 0 and xiK > 0".into(),
            ));
        }
        Ok(())
    }

    /// Basic reproduction number beta / mu.
    pub fn r0(&self) -> f64 {
        self.beta / self.mu
    }

    /// The threshold ratio (beta + lambda) / (beta - mu); the right-hand
    /// side of the positive-equilibrium equation.
    pub fn threshold_ratio(&self) -> f64 {
        (self.beta + self.lambda) / (self.beta - self.mu)
    }

    /// nu K = beta - mu, so (nu K) / mu = R0 - 1.
    pub fn nu_k(&self) -> f64 {
        self.beta - self.mu
    }

    /// Quasi steady state y = z / (1 + xiK z).
    pub fn qss(&self, z: f64) -> f64 {
        z / (1.0 + self.xi_k * z)
    }

    /// Reduced slow field.
    pub fn reduced_field(&self, z: f64) -> f64 {
        (self.r0() - 1.0) * z * (1.0 - z) - (self.beta + self.lambda) / self.mu * self.qss(z)
    }

    /// Maximum of the parabola `(1 - z)(1 + xiK z)`, attained at
    /// `z = (xiK - 1) / (2 xiK)`: equals `(1 + xiK)^2 / (4 xiK)`.
    pub fn parabola_max(&self) -> f64 {
        (1.0 + self.xi_k).powi(2) / (4.0 * self.xi_k)
    }

    /// Positive equilibria `(z2, z3)` of the reduced equation, when they
    /// exist: roots of `xiK z^2 - (xiK - 1) z + (ratio - 1) = 0`.
    pub fn positive_equilibria(&self) -> Option<(f64, f64)> {
        let k = self.xi_k;
        let c = self.threshold_ratio() - 1.0;
        let disc = (k - 1.0) * (k - 1.0) - 4.0 * k * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let z2 = ((k - 1.0) - sq) / (2.0 * k);
        let z3 = ((k - 1.0) + sq) / (2.0 * k);
        if z3 <= 0.0 {
            return None;
        }
        Some((z2, z3))
    }

    /// Classify the reduced dynamics by counting distinct positive
    /// equilibria of the threshold equation.
    pub fn regime(&self) -> AlleeRegime {
        let ratio = self.threshold_ratio();
        if ratio <= 1.0 {
            // The parabola starts at 1 > ratio, so there is exactly one
            // positive crossing (the would-be threshold z2 is <= 0).
            return AlleeRegime::SinglePositive;
        }
        let k = self.xi_k;
        let disc = (k - 1.0) * (k - 1.0) - 4.0 * k * (ratio - 1.0);
        if k > 1.0 && disc > 0.0 {
            AlleeRegime::Allee
        } else if k > 1.0 && disc == 0.0 {
            AlleeRegime::SinglePositive
        } else {
            AlleeRegime::NoPositiveEquilibrium
        }
    }

    /// Decay rate of the frozen-argument layer equation at slow value `z`.
    pub fn layer_rate(&self, z: f64) -> f64 {
        1.0 + self.xi_k * z
    }
}

/// Build the Allee fast-slow system. Slow block `u = (z,)`, fast block
/// `v = (y,)`.
pub fn allee_system(params: AlleeParams) -> FastSlowSystem {
    params.validate().expect("invalid Allee parameters");
    let q = params;
    let coeff = move |z: f64| 1.0 + (q.lambda + q.nu_k() * z) / q.mu;
    let f = move |u: &[f64], v: &[f64], _t: f64, _eps: f64| -> Vec<f64> {
        let (z, y) = (u[0], v[0]);
        vec![(q.r0() - 1.0) * z * (1.0 - z) - (q.beta + q.lambda) / q.mu * y]
    };
    let g = move |u: &[f64], v: &[f64], _t: f64, eps: f64| -> Vec<f64> {
        let (z, y) = (u[0], v[0]);
        vec![-eps * coeff(z) * y - q.xi_k * y * z + z - y]
    };
    let mut equilibria = vec![vec![0.0]];
    if let Some((z2, z3)) = params.positive_equilibria() {
        if z2 > 0.0 {
            equilibria.push(vec![z2]);
        }
        equilibria.push(vec![z3]);
    }
    FastSlowSystem::new("allee", 1, 1, 0.2, Box::new(f), Box::new(g))
        .with_jacobian(
            JacobianOf::Gv,
            Box::new(move |u, _v, _t, eps| {
                let z = u[0];
                Matrix::from_rows(&[&[-eps * coeff(z) - q.xi_k * z - 1.0]])
            }),
        )
        .with_jacobian(
            JacobianOf::Gu,
            Box::new(move |_u, v, _t, eps| {
                let y = v[0];
                Matrix::from_rows(&[&[-eps * (q.nu_k() / q.mu) * y - q.xi_k * y + 1.0]])
            }),
        )
        .with_jacobian(
            JacobianOf::Fu,
            Box::new(move |u, _v, _t, _eps| {
                let z = u[0];
                Matrix::from_rows(&[&[(q.r0() - 1.0) * (1.0 - 2.0 * z)]])
            }),
        )
        .with_jacobian(
            JacobianOf::Fv,
            Box::new(move |_u, _v, _t, _eps| Matrix::from_rows(&[&[-(q.beta + q.lambda) / q.mu]])),
        )
        .with_jacobian(
            JacobianOf::Gt,
            Box::new(move |_u, _v, _t, _eps| Matrix::zeros(1, 1)),
        )
        .with_qss_seed(Box::new(move |u, _t| vec![q.qss(u[0])]))
        .with_slow_equilibria(equilibria)
}
