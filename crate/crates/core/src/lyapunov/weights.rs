use nalgebra::{DMatrix, DVector};

use crate::coefficients::{euclid, pow, SmoothedNorm, SpaceTimeWeight};

use super::params::LyapunovParams;

/// `u(t, y) = exp(rate · t^{time_exp} · |y|_*^{space_exp})`.
///
/// With `time_exp = 0` the weight is stationary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpRadialWeight {
    pub rate: f64,
    pub time_exp: f64,
    pub space_exp: f64,
}

/// Radial derivatives of an [`ExpRadialWeight`], each divided by `u`.
///
/// Keeping everything relative to `u` avoids overflow; `log_u` carries
/// the magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub r: f64,
    pub log_u: f64,
    /// `u'/u`
    pub d1: f64,
    /// `u'/(r u)`, finite at the origin.
    pub d1_over_r: f64,
    /// `u''/u`
    pub d2: f64,
    /// `u'''/u`
    pub d3: f64,
    /// `∂_t u / u`
    pub dt: f64,
    /// `∂_t u' / u`
    pub dt_d1: f64,
}

impl ExpRadialWeight {
    pub fn time_factor(&self, t: f64) -> (f64, f64) {
        if self.time_exp == 0.0 {
            (self.rate, 0.0)
        } else {
            let a = self.rate * t.powf(self.time_exp);
            let da = self.rate * self.time_exp * t.powf(self.time_exp - 1.0);
            (a, da)
        }
    }

    /// `ψ = |·|_*^β` and its radial derivatives, plus `ψ'/r`.
    fn profile(&self, r: f64) -> [f64; 5] {
        let b = self.space_exp;
        let [g, g1, g2, g3] = SmoothedNorm::radial(r);
        let slope = if r >= 1.0 { 1.0 / r } else { 1.5 - 0.5 * r * r };
        let gb = pow(g, b);
        let gb1 = pow(g, b - 1.0);
        let gb2 = pow(g, b - 2.0);
        let gb3 = pow(g, b - 3.0);
        let p1 = b * gb1 * g1;
        let p2 = b * (b - 1.0) * gb2 * g1 * g1 + b * gb1 * g2;
        let p3 = b * (b - 1.0) * (b - 2.0) * gb3 * g1 * g1 * g1
            + 3.0 * b * (b - 1.0) * gb2 * g1 * g2
            + b * gb1 * g3;
        [gb, p1, p2, p3, b * gb1 * slope]
    }

    pub fn jet(&self, t: f64, r: f64) -> RadialJet {
        let (a, da) = self.time_factor(t);
        let [psi, p1, p2, p3, p1r] = self.profile(r);
        let (s1, s2, s3) = (a * p1, a * p2, a * p3);
        RadialJet {
            r,
            log_u: a * psi,
            d1: s1,
            d1_over_r: a * p1r,
            d2: s2 + s1 * s1,
            d3: s3 + 3.0 * s1 * s2 + s1 * s1 * s1,
            dt: da * psi,
            dt_d1: da * p1 * (1.0 + a * psi),
        }
    }

    #[inline]
    pub fn log_value(&self, t: f64, x: &[f64]) -> f64 {
        let (a, _) = self.time_factor(t);
        a * pow(SmoothedNorm::radial(euclid(x))[0], self.space_exp)
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.log_value(t, x).exp()
    }

    #[inline]
    pub fn value_1d(&self, t: f64, y: f64) -> f64 {
        let (a, _) = self.time_factor(t);
        (a * pow(SmoothedNorm::radial(y.abs())[0], self.space_exp)).exp()
    }
}

impl SpaceTimeWeight for ExpRadialWeight {
    fn value_and_gradient(&self, t: f64, x: &[f64]) -> (f64, DVector<f64>) {
        let jet = self.jet(t, euclid(x));
        let u = jet.log_u.exp();
        let g = DVector::from_column_slice(x) * (u * jet.d1_over_r);
        (u, g)
    }

    fn value_and_derivative_1d(&self, t: f64, y: f64) -> (f64, f64) {
        let jet = self.jet(t, y.abs());
        let u = jet.log_u.exp();
        (u, u * jet.d1_over_r * y)
    }
}

/// Relative Hessian `D²u/u` of a radial weight at `x`.
pub fn relative_hessian(jet: &RadialJet, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut h = DMatrix::identity(d, d) * jet.d1_over_r;
    if jet.r > 0.0 {
        let xv = DVector::from_column_slice(x);
        h += (&xv * xv.transpose()) * ((jet.d2 - jet.d1_over_r) / (jet.r * jet.r));
    }
    h
}

/// `|D³u|/u` (Frobenius) of a radial weight in dimension `d`.
pub fn relative_third_norm(jet: &RadialJet, d: usize) -> f64 {
    if d == 1 {
        return jet.d3.abs();
    }
    let r = jet.r;
    if r == 0.0 {
        // odd tensor of a smooth even function vanishes at the origin
        return 0.0;
    }
    let (f, f1, f2) = (jet.d1, jet.d2, jet.d3);
    let a = f1 / (r * r) - f / (r * r * r);
    let b = f2 / (r * r * r) - 3.0 * f1 / r.powi(4) + 3.0 * f / r.powi(5);
    let n2 = 3.0 * (d as f64 + 2.0) * a * a * r * r + 6.0 * a * b * r.powi(4) + b * b * r.powi(6);
    n2.max(0.0).sqrt()
}

/// The weight `w`, the Lyapunov functions `W₁, W₂` and the stationary
/// functions `Z, Z₀` built from one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFamily {
    pub params: LyapunovParams,
    pub w: ExpRadialWeight,
    pub w1: ExpRadialWeight,
    pub w2: ExpRadialWeight,
    pub z: ExpRadialWeight,
    /// Present when the drift exponent is known: `exp(ε₂ |y|_*^{p+1−m})`.
    pub z0: Option<ExpRadialWeight>,
}

impl WeightFamily {
    pub fn new(params: &LyapunovParams, z0_exponent: Option<f64>) -> Self {
        let mk = |rate, time_exp, space_exp| ExpRadialWeight {
            rate,
            time_exp,
            space_exp,
        };
        let (a, b) = (params.alpha, params.beta);
        Self {
            params: *params,
            w: mk(params.eps, a, b),
            w1: mk(params.eps1, a, b),
            w2: mk(params.eps2, a, b),
            z: mk(params.eps2, 0.0, b),
            z0: z0_exponent.map(|e| mk(params.eps2, 0.0, e)),
        }
    }

    /// Weight family for a spec with known `(m, p, s)`.
    pub fn for_shape(params: &LyapunovParams, shape: Option<crate::coefficients::ShapeExponents>) -> Self {
        Self::new(params, shape.map(|sh| sh.p + 1.0 - sh.m))
    }
}
