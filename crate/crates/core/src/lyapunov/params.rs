use serde::{Deserialize, Serialize};

use crate::coefficients::{OperatorSpec, ShapeExponents};
use crate::error::{Error, Result};

/// Exponents and rates of the weight `w` and the Lyapunov functions
/// `W₁, W₂`, together with the moment index `k` and auxiliary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovParams {
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub k: f64,
    /// Horizon `T`.
    pub horizon: f64,
    /// Anchor time of the diffusion cutoff.
    pub t0: f64,
    /// Integrability margin for `∫ w^{-(1-ε_int)}`.
    pub eps_int: f64,
    pub sigma: f64,
    pub c0: f64,
    /// Whether `σ` was user-supplied; otherwise it tracks the window.
    #[serde(default)]
    pub sigma_fixed: bool,
}

/// Optional user overrides for [`default_params`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub t0: Option<f64>,
    pub eps_int: Option<f64>,
    pub sigma: Option<f64>,
    pub c0: Option<f64>,
}

/// Right end of the widest default window (`2 · 0.4`).
const DEFAULT_B0: f64 = 0.8;

/// `σ = 0.95 (1 − b₀^α)`, which makes `W₂ ≤ Z^{1−σ}` hold for `t ≤ b₀`.
pub fn sigma_for_window(b0: f64, alpha: f64) -> f64 {
    0.95 * (1.0 - b0.powf(alpha))
}

/// `β = (s − m + 2)/2`.
pub fn beta_for(shape: ShapeExponents) -> f64 {
    (shape.s - shape.m + 2.0) / 2.0
}

/// Default parameters for a spec with known growth exponents.
///
/// Custom specs without exponents must override both `α` and `β`.
pub fn default_params(spec: &OperatorSpec, k: f64, overrides: &ParamOverrides) -> Result<LyapunovParams> {
    let shape = spec.shape_exponents();
    let beta = match (overrides.beta, shape) {
        (Some(b), _) => b,
        (None, Some(sh)) => beta_for(sh),
        (None, None) => {
            return Err(Error::ConstraintViolation(
                "β must be given for a spec without growth exponents".into(),
            ))
        }
    };
    let alpha = match (overrides.alpha, shape) {
        (Some(a), _) => a,
        (None, Some(sh)) => 1.05 * beta / (beta + sh.m - 2.0),
        (None, None) => {
            return Err(Error::ConstraintViolation(
                "α must be given for a spec without growth exponents".into(),
            ))
        }
    };
    let eps2 = overrides.eps2.unwrap_or(0.8 / beta);
    let eps1 = overrides.eps1.unwrap_or(0.6 / beta);
    let eps = overrides.eps.unwrap_or(eps1 / (4.0 * k));
    let params = LyapunovParams {
        alpha,
        beta,
        eps,
        eps1,
        eps2,
        k,
        horizon: 1.0,
        t0: overrides.t0.unwrap_or(0.1),
        eps_int: overrides.eps_int.unwrap_or(0.5),
        sigma: overrides
            .sigma
            .unwrap_or_else(|| sigma_for_window(DEFAULT_B0, alpha)),
        c0: overrides.c0.unwrap_or(1.0),
        sigma_fixed: overrides.sigma.is_some(),
    };
    params.validate(spec.dim, shape)?;
    Ok(params)
}

impl LyapunovParams {
    /// Checks every parameter invariant, naming the first failure.
    pub fn validate(&self, d: usize, shape: Option<ShapeExponents>) -> Result<()> {
        let fields = [
            self.alpha,
            self.beta,
            self.eps,
            self.eps1,
            self.eps2,
            self.k,
            self.horizon,
            self.t0,
            self.eps_int,
            self.sigma,
            self.c0,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConstraintViolation("parameters must be finite".into()));
        }
        let fail = |msg: String| Err(Error::ConstraintViolation(msg));
        if self.beta <= 0.0 {
            return fail(format!("β > 0 (got {})", self.beta));
        }
        if self.alpha <= 0.0 {
            return fail(format!("α > 0 (got {})", self.alpha));
        }
        let two_k_eps = 2.0 * self.k * self.eps;
        if !(self.eps > 0.0) {
            return fail(format!("0 < 2kε (got ε = {})", self.eps));
        }
        if !(two_k_eps < self.eps1) {
            return fail(format!("2kε < ε₁ (2kε = {two_k_eps}, ε₁ = {})", self.eps1));
        }
        if !(self.eps1 < self.eps2) {
            return fail(format!("ε₁ < ε₂ (ε₁ = {}, ε₂ = {})", self.eps1, self.eps2));
        }
        if !(self.eps2 < 1.0 / self.beta) {
            return fail(format!("ε₂ < 1/β (ε₂ = {}, 1/β = {})", self.eps2, 1.0 / self.beta));
        }
        let k_min = 2.0 * (d as f64 + 2.0);
        if !(self.k > k_min) {
            return fail(format!("k > 2(d+2) (k = {}, 2(d+2) = {k_min})", self.k));
        }
        if let Some(sh) = shape {
            let threshold = self.beta / (self.beta + sh.m - 2.0);
            if self.beta + sh.m - 2.0 <= 0.0 || !(self.alpha > threshold) {
                return fail(format!("α > β/(β+m−2) (α = {}, bound = {threshold})", self.alpha));
            }
        }
        if !(self.horizon > 0.0) {
            return fail(format!("T > 0 (got {})", self.horizon));
        }
        if !(self.t0 > 0.0 && self.t0 < self.horizon) {
            return fail(format!("t₀ ∈ (0, T) (got {})", self.t0));
        }
        if !(self.eps_int > 0.0 && self.eps_int < 1.0) {
            return fail(format!("ε_int ∈ (0, 1) (got {})", self.eps_int));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return fail(format!("σ ∈ (0, 1) (got {})", self.sigma));
        }
        if !(self.c0 > 0.0) {
            return fail(format!("c₀ > 0 (got {})", self.c0));
        }
        Ok(())
    }

    /// Copy with `σ` re-derived for a window ending at `b0`, unless `σ`
    /// was fixed by the user.
    pub fn for_window_end(&self, b0: f64) -> Self {
        let mut out = *self;
        if !self.sigma_fixed {
            out.sigma = sigma_for_window(b0, self.alpha);
        }
        out
    }

    /// Radius where `ε t_init^α R^β = 70`, capped at 30.
    pub fn truncation_radius(&self, t_init: f64) -> f64 {
        let r = (70.0 / (self.eps * t_init.powf(self.alpha))).powf(1.0 / self.beta);
        r.min(30.0)
    }
}
