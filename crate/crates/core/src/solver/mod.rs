//! Forward solver for `p(t, x, ·)` in one space dimension.
//!
//! The kernel solves `∂_t ρ = ∂_y(q ∂_y ρ − F ρ) − V ρ` with `ρ(0) = δ_x`.
//! The space discretization is a conservative finite-volume scheme on a
//! uniform grid with zero Dirichlet data at `±R`; time stepping is a
//! θ-scheme solved by tridiagonal elimination.

mod approx;
mod forward;
mod functionals;
mod tridiag;

pub use approx::{solve_approximated, sup_distance, ApproxSweep, Region};
pub use forward::{solve_forward, trapezoid, DriftFlux, Grid, KernelField, SchemeMeta, SolverOptions};
pub use functionals::{functionals, gradient, gradient_profile, xi, FunctionalReport};
pub use tridiag::Tridiagonal;
