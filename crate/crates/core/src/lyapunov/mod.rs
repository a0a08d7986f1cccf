//! Weights, Lyapunov functions and the constants `c₁ … c₁₂`.
//!
//! The weight is `w(t, y) = exp(ε t^α |y|_*^β)`; the Lyapunov functions
//! `W₁, W₂` use the rates `ε₁, ε₂`. Each constant exists twice: as a
//! supremum measured on a grid ([`check_hypotheses`]) and as an explicit
//! upper bound ([`closed_form_constants`]).

mod checks;
mod closed_form;
mod params;
mod weights;

pub use checks::{
    check_hypotheses, check_lyapunov, check_stationary, generator_ratio, h_bar, radial_integral, sphere_area,
    ConditionRecord, FiniteRecord, Generator, HypothesisGrid, HypothesisReport, LineGrid, LyapunovCheck,
    StationaryCheck, CONDITION_IDS, TOL_CERT, TOL_REFINE,
};
pub use closed_form::{closed_form_constants, peak_bound, peak_coefficient, peak_location, ClosedFormConstants};
pub use params::{beta_for, default_params, sigma_for_window, LyapunovParams, ParamOverrides};
pub use weights::{relative_hessian, relative_third_norm, ExpRadialWeight, RadialJet, WeightFamily};
