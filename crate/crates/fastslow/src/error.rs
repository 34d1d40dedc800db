//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in a reduction pipeline.
///
/// Several variants double as *verdicts*: a `SingularJacobian` from the
/// quasi-steady-state solver is how an isolation failure (a degenerate root
/// of `g = 0`) is reported to the hypothesis audit, and `Divergence` from
/// the layer integrator is how a fast initial value outside the basin of
/// attraction shows up.
#[derive(Debug, Error)]
pub enum Error {
    /// A model right-hand side returned NaN or infinity.
    #[error("non-finite output from model function at t = {t}")]
    NonFiniteOutput { t: f64 },

    /// The integrator produced a non-finite state vector.
    #[error("non-finite state during integration at t = {t}")]
    NonFiniteState { t: f64 },

    /// A pivot fell below the singularity threshold during LU elimination.
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// An iteration (Newton, Durand-Kerner) failed to reach its tolerance.
    #[error("no convergence after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// Newton's Jacobian `g_v` is singular at or near the root.
    #[error("singular Jacobian g_v in quasi-steady-state solve (pivot {pivot:.3e})")]
    SingularJacobian { pivot: f64 },

    /// The adaptive integrator needed a step below the configured minimum.
    #[error("step underflow at t = {t}: required step {step:.3e} below minimum")]
    StepUnderflow { t: f64, step: f64 },

    /// The step-count guard tripped.
    #[error("exceeded {max_steps} integration steps")]
    MaxStepsExceeded { max_steps: usize },

    /// The slow curve left the configured bound (audit of the boundedness
    /// part of the isolated-root assumption).
    #[error("slow curve exceeded bound {bound} at t = {t} (|v| = {norm:.3e})")]
    BoundednessViolation { t: f64, bound: f64, norm: f64 },

    /// The layer solution blew up: the fast initial value is outside the
    /// basin of attraction.
    #[error("layer solution diverged (|v| = {norm:.3e} at tau = {tau})")]
    Divergence { tau: f64, norm: f64 },

    /// The equilibrium route of the reduced-stability check needs a declared
    /// limit point and the model has none.
    #[error("model declares no slow equilibrium; equilibrium route unavailable")]
    NoEquilibriumDeclared,

    /// A matrix handed to the dichotomy fitter has a sampled eigenvalue with
    /// non-negative real part.
    #[error("spectral hypothesis violated: spectral bound {bound:.3e} >= 0 at t = {t}")]
    HypothesisViolated { t: f64, bound: f64 },

    /// Bad dimensions or other caller mistakes.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
