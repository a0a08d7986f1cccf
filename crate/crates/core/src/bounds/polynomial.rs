use crate::coefficients::{pow, ShapeExponents, SmoothedNorm};
use crate::error::{Error, Result};
use crate::lyapunov::LyapunovParams;

/// Time window `a₀ < a < a₁ < b₁ < b < b₀`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Window {
    pub a0: f64,
    pub a: f64,
    pub a1: f64,
    pub b1: f64,
    pub b: f64,
    pub b0: f64,
}

impl Window {
    pub fn gaps(&self) -> super::Gaps {
        super::Gaps {
            b0_b: self.b0 - self.b,
            b_b1: self.b - self.b1,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a0, self.a, self.a1, self.b1, self.b, self.b0]
    }
}

/// The window around `t`: `(t/2, t, 9t/8, 11t/8, 3t/2, 2t)`.
///
/// The inner points are `t/8` insets, so `b − b₁ = a₁ − a = t/8`.
pub fn choose_window(t: f64) -> Result<Window> {
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::Window(format!("t must lie in (0, 1/2], got {t}")));
    }
    Ok(Window {
        a0: t / 2.0,
        a: t,
        a1: 9.0 * t / 8.0,
        b1: 11.0 * t / 8.0,
        b: 1.5 * t,
        b0: 2.0 * t,
    })
}

/// Closed-form envelopes for the polynomial family, without the
/// universal constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialEnvelope {
    /// `λ = max(m, p, s/2)`
    pub lambda: f64,
    /// `1 − αλk/β`
    pub exponent_p: f64,
    /// `3/2 − (3αλk + α)/(2β)`
    pub exponent_grad: f64,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PolynomialEnvelope {
    pub fn new(params: &LyapunovParams, shape: ShapeExponents) -> Self {
        let lambda = shape.m.max(shape.p).max(shape.s / 2.0);
        let (alpha, beta, k) = (params.alpha, params.beta, params.k);
        Self {
            lambda,
            exponent_p: 1.0 - alpha * lambda * k / beta,
            exponent_grad: 1.5 - (3.0 * alpha * lambda * k + alpha) / (2.0 * beta),
            eps: params.eps,
            alpha,
            beta,
        }
    }

    /// `αλ/β`; exceeds 1/2 for admissible parameters.
    pub fn step_ratio(&self) -> f64 {
        self.alpha * self.lambda / self.beta
    }

    /// `exp(−ε t^α |y|_*^β)`
    pub fn decay(&self, t: f64, y: f64) -> f64 {
        (-self.eps * t.powf(self.alpha) * pow(SmoothedNorm::radial(y.abs())[0], self.beta)).exp()
    }

    pub fn env_p(&self, t: f64, y: f64) -> f64 {
        t.powf(self.exponent_p) * self.decay(t, y)
    }

    pub fn env_grad(&self, t: f64, y: f64) -> f64 {
        (1.0 - t.ln()) * t.powf(self.exponent_grad) * self.decay(t, y)
    }
}

/// Envelope data for the window around `t`.
pub fn polynomial_envelopes(params: &LyapunovParams, shape: ShapeExponents, t: f64) -> Result<PolynomialEnvelope> {
    choose_window(t)?;
    Ok(PolynomialEnvelope::new(params, shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> LyapunovParams {
        LyapunovParams {
            alpha: 1.05,
            beta: 2.0,
            eps: 0.0075,
            eps1: 0.3,
            eps2: 0.4,
            k: 10.0,
            horizon: 1.0,
            t0: 0.1,
            eps_int: 0.5,
            sigma: 0.2,
            c0: 1.0,
            sigma_fixed: false,
        }
    }

    #[test]
    fn window_examples() {
        let w = choose_window(0.4).unwrap();
        let expect = [0.2, 0.4, 0.45, 0.55, 0.6, 0.8];
        for (a, b) in w.as_array().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        assert_relative_eq!(w.b - w.b1, 0.05, max_relative = 1e-12);
        assert_relative_eq!(w.a1 - w.a, 0.05, max_relative = 1e-12);
        assert!(w.a1 - w.a <= w.a - w.a0);
        assert!(matches!(choose_window(0.6), Err(Error::Window(_))));
        assert!(choose_window(0.0).is_err());
    }

    #[test]
    fn prototype_exponents() {
        let sh = ShapeExponents { m: 2.0, p: 3.0, s: 4.0 };
        let e = polynomial_envelopes(&params(), sh, 0.2).unwrap();
        assert_eq!(e.lambda, 3.0);
        assert_relative_eq!(e.exponent_grad, -22.3875, max_relative = 1e-14);
        assert_relative_eq!(e.step_ratio(), 1.575, max_relative = 1e-14);
        assert!(polynomial_envelopes(&params(), sh, 0.7).is_err());
    }

    #[test]
    fn separable_in_y() {
        let sh = ShapeExponents { m: 2.0, p: 3.0, s: 4.0 };
        let e = PolynomialEnvelope::new(&params(), sh);
        for y in [0.3, 2.0, 9.0] {
            let t = 0.1;
            let ratio = e.env_grad(t, y) / e.env_grad(t, 0.0);
            let expect = (-e.eps * t.powf(e.alpha) * (SmoothedNorm::radial(y)[0].powf(2.0) - 0.375f64.powi(2))).exp();
            assert_relative_eq!(ratio, expect, max_relative = 1e-12);
        }
    }
}
