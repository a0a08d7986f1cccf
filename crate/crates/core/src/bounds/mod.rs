//! The constant pipeline and the kernel and gradient envelopes.
//!
//! All assembly happens in log space ([`LogScalar`]) since `c_i^k` with
//! `k ≥ 10` leaves the `f64` range for moderately small windows.

mod constants;
mod envelope;
mod logscalar;
mod polynomial;

pub use constants::{approx_constant_update, assemble_constants, ConstantSet, Derived, Gaps};
pub use envelope::{gradient_envelope_k, kernel_envelope, A2Variant, EnvelopeInputs, GradientEnvelope};
pub use logscalar::LogScalar;
pub use polynomial::{choose_window, polynomial_envelopes, PolynomialEnvelope, Window};
