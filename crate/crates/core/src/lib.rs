//! Explicit bounds for transition kernels of divergence-form operators
//! `A = div(Q∇·) + F·∇ − V` with unbounded coefficients, and the numerical
//! machinery to check them.
//!
//! * [`coefficients`]: coefficient fields, the polynomial prototype and the
//!   bounded-diffusion approximation.
//! * [`lyapunov`]: weights, Lyapunov functions and the constants `c₁ … c₁₂`.
//! * [`bounds`]: derived constants, kernel and gradient envelopes.
//! * [`solver`]: the forward equation for `p(t, x, ·)` and its functionals.
//! * [`fk_oracle`]: Feynman–Kac Monte Carlo for cross-checks.
//! * [`harness`]: configuration, experiments and CSV reports.

pub mod bounds;
pub mod coefficients;
pub mod error;
pub mod fk_oracle;
pub mod harness;
pub mod lyapunov;
pub mod solver;

pub use error::{Error, Result};
