//! Quasi-steady-state reduction of fast-slow ODE systems, with numerical
//! audits of the hypotheses that make the reduction valid uniformly in time.
//!
//! The crate takes a system in the canonical two-time-scale form
//!
//! ```text
//! u' = f(u, v, t, eps),        eps * v' = g(u, v, t, eps),
//! ```
//!
//! and provides, for small `eps`:
//!
//! * the quasi steady state `v = phi(u, t)` solving `g(u, v, t, 0) = 0`
//!   (Newton, with manifold derivatives) and the reduced slow equation
//!   ([`reduction`]);
//! * the initial-layer correction in fast time and its decay fit
//!   ([`layer`]);
//! * the composite approximation `phi(ubar(t), t) + vtilde(t/eps)` and
//!   error curves against the full stiff solution ([`reduction`]);
//! * numerical audits of the standing assumptions: isolated root, negative
//!   spectral bound along (and in a tube around) the slow curve, basin of
//!   attraction, and stability of the reduced Jacobian ([`hypotheses`]);
//! * propagator-norm dichotomy fits for `eps Y' = D(t) Y` and the
//!   modulus-of-continuity diagnostic ([`dichotomy`]);
//! * the localization construction: smooth bumps over a moving tube and a
//!   localized fast field that coincides with the original inside the tube
//!   ([`localization`]);
//! * two worked population models with closed-form oracles ([`models`]);
//! * a CSV/JSON command-line front end ([`cli`]).
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod dichotomy;
pub mod error;
pub mod hypotheses;
pub mod integrate;
pub mod layer;
pub mod linalg;
pub mod localization;
pub mod models;
pub mod reduction;
pub mod system;

pub use error::{Error, Result};
