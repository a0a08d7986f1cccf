//! Coefficient fields of the operator `A = div(Q ∇·) + F·∇ − V`.
//!
//! The polynomial prototype `Q = (1 + |x|_*^m) I`, `F = −|x|^{p−1} x`,
//! `V = |x|^s` is built from composable pieces ([`Diffusion`], [`Drift`],
//! [`Potential`]); arbitrary fields plug in through [`CoefficientField`].
//! [`ApproximatedSpec`] implements the bounded-diffusion cutoff
//! `Q_n = φ_n Q + (1 − φ_n) η I` with `φ_n = φ(W₁(t₀, ·)/n)`.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `x^e`, routed through `powi` when `e` is a small integer.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 32.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// The `C²` radial blend `|x|_*`.
///
/// Inside the unit ball the profile is the even quartic
/// `3/8 + (3/4) r² − (1/8) r⁴`, which matches `r` together with its first
/// and second derivatives at `r = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothedNorm;

/// Value, gradient and Hessian of [`SmoothedNorm`] at a point.
#[derive(Debug, Clone)]
pub struct NormJet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl SmoothedNorm {
    /// Radial profile `r ↦ (r_*, r_*', r_*'', r_*''')` for `r ≥ 0`.
    #[inline]
    pub fn radial(r: f64) -> [f64; 4] {
        if r >= 1.0 {
            [r, 1.0, 0.0, 0.0]
        } else {
            let r2 = r * r;
            [
                0.375 + 0.75 * r2 - 0.125 * r2 * r2,
                1.5 * r - 0.5 * r2 * r,
                1.5 - 1.5 * r2,
                -3.0 * r,
            ]
        }
    }

    /// `r_*'(r) / r`, continuous through the origin.
    #[inline]
    fn slope_over_r(r: f64) -> f64 {
        if r >= 1.0 {
            1.0 / r
        } else {
            1.5 - 0.5 * r * r
        }
    }

    pub fn eval(x: &[f64]) -> NormJet {
        let d = x.len();
        let r = euclid(x);
        let [value, _, d2, _] = Self::radial(r);
        let s = Self::slope_over_r(r);
        let xv = DVector::from_column_slice(x);
        let gradient = &xv * s;
        // H = r_*'' x̂x̂ᵀ + (r_*'/r)(I − x̂x̂ᵀ)
        let mut hessian = DMatrix::identity(d, d) * s;
        if r > 0.0 {
            let outer = &xv * xv.transpose() / (r * r);
            hessian += outer * (d2 - s);
        }
        NormJet {
            value,
            gradient,
            hessian,
        }
    }
}

/// Evaluates `|x|_*` with its gradient and Hessian.
pub fn smoothed_norm(x: &[f64]) -> NormJet {
    SmoothedNorm::eval(x)
}

#[inline]
pub(crate) fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// All coefficient fields and their first derivatives at one point.
#[derive(Debug, Clone)]
pub struct FieldValues {
    pub q: DMatrix<f64>,
    /// `grad_q[h] = ∂_h Q`.
    pub grad_q: Vec<DMatrix<f64>>,
    pub f: DVector<f64>,
    /// Jacobian, `jac_f[(i, j)] = ∂_j F_i`.
    pub jac_f: DMatrix<f64>,
    pub v: f64,
    pub grad_v: DVector<f64>,
}

impl FieldValues {
    /// Frobenius norm `(Σ_{i,j,h} (∂_h q_ij)²)^{1/2}`.
    pub fn grad_q_norm(&self) -> f64 {
        self.grad_q
            .iter()
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `G_j = Σ_i ∂_i q_ij`, the drift produced by the divergence form.
    pub fn q_divergence(&self) -> DVector<f64> {
        let d = self.f.len();
        DVector::from_fn(d, |j, _| (0..d).map(|i| self.grad_q[i][(i, j)]).sum())
    }
}

/// Scalar fields in one dimension: `q, q', F, F', V, V'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fields1d {
    pub q: f64,
    pub dq: f64,
    pub f: f64,
    pub df: f64,
    pub v: f64,
    pub dv: f64,
}

/// Growth exponents `(m, p, s)` of a polynomial-type operator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShapeExponents {
    pub m: f64,
    pub p: f64,
    pub s: f64,
}

/// A coefficient triple `(Q, F, V)` with first derivatives.
///
/// Implementors supply their own derivative fields; nothing is
/// differentiated symbolically.
pub trait CoefficientField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> FieldValues;

    fn eval_1d(&self, y: f64) -> Fields1d {
        let fv = self.eval(&[y]);
        Fields1d {
            q: fv.q[(0, 0)],
            dq: fv.grad_q[0][(0, 0)],
            f: fv.f[0],
            df: fv.jac_f[(0, 0)],
            v: fv.v,
            dv: fv.grad_v[0],
        }
    }

    /// Exponents used to derive default weights and closed-form constants.
    fn shape_exponents(&self) -> Option<ShapeExponents> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion {
    Identity,
    /// `(1 + |x|_*^m) I`
    Polynomial { m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Zero,
    /// `−rate · x`
    Linear { rate: f64 },
    /// `−|x|^{p−1} x`
    Polynomial { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Zero,
    /// `|x|^s`
    Polynomial { s: f64 },
}

/// Coefficient field assembled from independent diffusion, drift and
/// potential parts.
#[derive(Debug, Clone)]
pub struct ComposedField {
    pub dim: usize,
    pub diffusion: Diffusion,
    pub drift: Drift,
    pub potential: Potential,
    pub shape: Option<ShapeExponents>,
}

impl CoefficientField for ComposedField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> FieldValues {
        let d = self.dim;
        debug_assert_eq!(x.len(), d);
        let r = euclid(x);
        let xv = DVector::from_column_slice(x);
        let eye = DMatrix::<f64>::identity(d, d);

        let (q, grad_q) = match self.diffusion {
            Diffusion::Identity => (eye.clone(), vec![DMatrix::zeros(d, d); d]),
            Diffusion::Polynomial { m } => {
                let jet = SmoothedNorm::eval(x);
                let q = 1.0 + pow(jet.value, m);
                let dq = m * pow(jet.value, m - 1.0);
                let grad = (0..d).map(|h| &eye * (dq * jet.gradient[h])).collect();
                (&eye * q, grad)
            }
        };

        let (f, jac_f) = match self.drift {
            Drift::Zero => (DVector::zeros(d), DMatrix::zeros(d, d)),
            Drift::Linear { rate } => (&xv * -rate, &eye * -rate),
            Drift::Polynomial { p } => {
                if r == 0.0 {
                    (DVector::zeros(d), DMatrix::zeros(d, d))
                } else {
                    let rp1 = pow(r, p - 1.0);
                    let outer = &xv * xv.transpose() / (r * r);
                    (&xv * -rp1, (&eye + outer * (p - 1.0)) * -rp1)
                }
            }
        };

        let (v, grad_v) = match self.potential {
            Potential::Zero => (0.0, DVector::zeros(d)),
            Potential::Polynomial { s } => {
                if r == 0.0 {
                    (0.0, DVector::zeros(d))
                } else {
                    (pow(r, s), &xv * (s * pow(r, s - 2.0)))
                }
            }
        };

        FieldValues {
            q,
            grad_q,
            f,
            jac_f,
            v,
            grad_v,
        }
    }

    fn eval_1d(&self, y: f64) -> Fields1d {
        let r = y.abs();
        let sgn = if y < 0.0 { -1.0 } else { 1.0 };
        let (q, dq) = match self.diffusion {
            Diffusion::Identity => (1.0, 0.0),
            Diffusion::Polynomial { m } => {
                let [rs, d1, ..] = SmoothedNorm::radial(r);
                (1.0 + pow(rs, m), m * pow(rs, m - 1.0) * d1 * sgn)
            }
        };
        let (f, df) = match self.drift {
            Drift::Zero => (0.0, 0.0),
            Drift::Linear { rate } => (-rate * y, -rate),
            Drift::Polynomial { p } => {
                if r == 0.0 {
                    (0.0, 0.0)
                } else {
                    let rp1 = pow(r, p - 1.0);
                    (-rp1 * y, -p * rp1)
                }
            }
        };
        let (v, dv) = match self.potential {
            Potential::Zero => (0.0, 0.0),
            Potential::Polynomial { s } => {
                if r == 0.0 {
                    (0.0, 0.0)
                } else {
                    (pow(r, s), s * pow(r, s - 1.0) * sgn)
                }
            }
        };
        Fields1d {
            q,
            dq,
            f,
            df,
            v,
            dv,
        }
    }

    fn shape_exponents(&self) -> Option<ShapeExponents> {
        self.shape
    }
}

/// Which family an [`OperatorSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Polynomial(ShapeExponents),
    Custom,
}

/// A divergence-form operator: coefficient fields plus ellipticity `η`.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub dim: usize,
    pub eta: f64,
    pub family: Family,
    field: Arc<dyn CoefficientField>,
}

impl OperatorSpec {
    /// Wraps a user field. `eta` must be a valid lower eigenvalue bound.
    pub fn custom(field: Arc<dyn CoefficientField>, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::ConstraintViolation(format!("η > 0 (got {eta})")));
        }
        Ok(Self {
            dim: field.dim(),
            eta,
            family: Family::Custom,
            field,
        })
    }

    /// `Q = I`, `F = 0`, `V = 0`.
    pub fn heat(dim: usize) -> Self {
        Self::composed(dim, Diffusion::Identity, Drift::Zero, Potential::Zero, None)
    }

    /// `Q = I`, `F = −rate·x`, `V = 0`.
    pub fn ornstein_uhlenbeck(dim: usize, rate: f64) -> Self {
        Self::composed(
            dim,
            Diffusion::Identity,
            Drift::Linear { rate },
            Potential::Zero,
            None,
        )
    }

    /// A custom composition with unit ellipticity (all diffusion parts
    /// here satisfy `Q ≥ I`).
    pub fn composed(
        dim: usize,
        diffusion: Diffusion,
        drift: Drift,
        potential: Potential,
        shape: Option<ShapeExponents>,
    ) -> Self {
        Self {
            dim,
            eta: 1.0,
            family: Family::Custom,
            field: Arc::new(ComposedField {
                dim,
                diffusion,
                drift,
                potential,
                shape,
            }),
        }
    }

    pub fn field(&self) -> &Arc<dyn CoefficientField> {
        &self.field
    }

    pub fn shape_exponents(&self) -> Option<ShapeExponents> {
        match self.family {
            Family::Polynomial(e) => Some(e),
            Family::Custom => self.field.shape_exponents(),
        }
    }

    /// True when `V` vanishes at a handful of probe radii. Fields are
    /// opaque, so this is a heuristic used only to decide whether boundary
    /// mass loss is meaningful.
    pub fn potential_free(&self) -> bool {
        let d = self.dim;
        [0.0, 0.5, 1.0, 2.0, 5.0, 10.0].iter().all(|&r| {
            let mut x = vec![0.0; d];
            x[0] = r;
            self.field.eval(&x).v == 0.0
        })
    }

    pub fn eval(&self, x: &[f64]) -> FieldValues {
        self.field.eval(x)
    }

    #[inline]
    pub fn eval_1d(&self, y: f64) -> Fields1d {
        self.field.eval_1d(y)
    }
}

/// Builds the polynomial prototype after checking `m > 0`,
/// `p > (m−1)∨1` and `s > |m−2|`.
pub fn validate_polynomial_params(m: f64, p: f64, s: f64, d: usize) -> Result<OperatorSpec> {
    if ![m, p, s].iter().all(|v| v.is_finite()) {
        return Err(Error::ConstraintViolation(
            "m, p, s must be finite".to_string(),
        ));
    }
    if d == 0 {
        return Err(Error::ConstraintViolation("d ≥ 1".to_string()));
    }
    if m <= 0.0 {
        return Err(Error::ConstraintViolation(format!("m > 0 (got m = {m})")));
    }
    if p <= (m - 1.0).max(1.0) {
        return Err(Error::ConstraintViolation(format!(
            "p > (m−1)∨1 (got p = {p}, m = {m})"
        )));
    }
    if s <= (m - 2.0).abs() {
        return Err(Error::ConstraintViolation(format!(
            "s > |m−2| (got s = {s}, m = {m})"
        )));
    }
    let shape = ShapeExponents { m, p, s };
    Ok(OperatorSpec {
        dim: d,
        eta: 1.0,
        family: Family::Polynomial(shape),
        field: Arc::new(ComposedField {
            dim: d,
            diffusion: Diffusion::Polynomial { m },
            drift: Drift::Polynomial { p },
            potential: Potential::Polynomial { s },
            shape: Some(shape),
        }),
    })
}

/// Evaluates every coefficient field of `spec` at `x`.
pub fn eval_fields(spec: &OperatorSpec, x: &[f64]) -> FieldValues {
    spec.eval(x)
}

/// A time-dependent scalar weight with spatial gradient, used to place the
/// diffusion cutoff.
pub trait SpaceTimeWeight: Send + Sync + fmt::Debug {
    fn value_and_gradient(&self, t: f64, x: &[f64]) -> (f64, DVector<f64>);

    fn value_and_derivative_1d(&self, t: f64, y: f64) -> (f64, f64) {
        let (v, g) = self.value_and_gradient(t, &[y]);
        (v, g[0])
    }
}

/// Cutoff `φ`: `1` on `(−1, 1)`, `0` outside `(−2, 2)`, `|s φ'(s)| ≤ 2`.
///
/// On `1 ≤ |s| ≤ 2` the profile is `1 − S(log₂|s|)` where `S'` is a
/// plateau with quintic smoothstep shoulders of width `shoulder`; the
/// plateau height `1/(1 − shoulder)` keeps `|s φ'| = S'/ln 2` below 2.
#[derive(Debug, Clone, Copy)]
pub struct CutoffProfile {
    shoulder: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { shoulder: 0.25 }
    }
}

impl CutoffProfile {
    /// Builds the profile and verifies `sup |s φ'(s)| ≤ 2` on a scan.
    pub fn new(shoulder: f64) -> Result<Self> {
        if !(shoulder > 0.0 && shoulder <= 0.5) {
            return Err(Error::Domain(format!(
                "cutoff shoulder must lie in (0, 1/2], got {shoulder}"
            )));
        }
        let profile = Self { shoulder };
        let peak = profile.max_scaled_slope();
        if peak > 2.0 {
            return Err(Error::ConstraintViolation(format!(
                "|s φ'(s)| ≤ 2 fails for shoulder {shoulder}: max {peak}"
            )));
        }
        Ok(profile)
    }

    fn height(&self) -> f64 {
        1.0 / (1.0 - self.shoulder)
    }

    // S'(u) / height
    fn plateau(&self, u: f64) -> f64 {
        let d = self.shoulder;
        let ramp = |v: f64| v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else if u < d {
            ramp(u / d)
        } else if u > 1.0 - d {
            ramp((1.0 - u) / d)
        } else {
            1.0
        }
    }

    fn step(&self, u: f64) -> f64 {
        let d = self.shoulder;
        let c = self.height();
        // antiderivative of the quintic ramp, H(1) = 1/2
        let ramp_int = |v: f64| v * v * v * v * (2.5 + v * (-3.0 + v));
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else if u < d {
            c * d * ramp_int(u / d)
        } else if u > 1.0 - d {
            1.0 - c * d * ramp_int((1.0 - u) / d)
        } else {
            c * (0.5 * d + (u - d))
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 {
            1.0
        } else if a >= 2.0 {
            0.0
        } else {
            1.0 - self.step(a.log2())
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 || a >= 2.0 {
            return 0.0;
        }
        let mag = self.height() * self.plateau(a.log2()) / (a * LN_2);
        if s > 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// Scan estimate of `sup_s |s φ'(s)|`.
    pub fn max_scaled_slope(&self) -> f64 {
        (0..=20_000)
            .map(|i| 1.0 + i as f64 / 20_000.0)
            .map(|s| (s * self.derivative(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// The bounded-diffusion approximation `A_n`.
#[derive(Debug, Clone)]
pub struct ApproximatedSpec {
    pub base: OperatorSpec,
    pub n: f64,
    pub t0: f64,
    pub profile: CutoffProfile,
    weight: Arc<dyn SpaceTimeWeight>,
}

/// Builds `A_n` with cutoff `φ(W₁(t₀, x)/n)`.
pub fn approximate_spec(
    spec: &OperatorSpec,
    n: f64,
    t0: f64,
    w1: Arc<dyn SpaceTimeWeight>,
) -> Result<ApproximatedSpec> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::Domain(format!("cutoff level n ≥ 1, got {n}")));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Domain(format!("anchor time t₀ > 0, got {t0}")));
    }
    Ok(ApproximatedSpec {
        base: spec.clone(),
        n,
        t0,
        profile: CutoffProfile::new(0.25)?,
        weight: w1,
    })
}

impl ApproximatedSpec {
    /// `φ_n(x)`.
    pub fn cutoff(&self, x: &[f64]) -> f64 {
        let (w, _) = self.weight.value_and_gradient(self.t0, x);
        self.profile.value(w / self.n)
    }

    /// The approximated operator as a regular spec (same `η`).
    pub fn to_operator(&self) -> OperatorSpec {
        OperatorSpec {
            dim: self.base.dim,
            eta: self.base.eta,
            family: Family::Custom,
            field: Arc::new(self.clone()),
        }
    }
}

impl CoefficientField for ApproximatedSpec {
    fn dim(&self) -> usize {
        self.base.dim
    }

    fn eval(&self, x: &[f64]) -> FieldValues {
        let d = self.base.dim;
        let eta = self.base.eta;
        let mut fv = self.base.eval(x);
        let (w, gw) = self.weight.value_and_gradient(self.t0, x);
        let phi = self.profile.value(w / self.n);
        let dphi = self.profile.derivative(w / self.n) / self.n;
        let eye = DMatrix::<f64>::identity(d, d);
        let q_minus = &fv.q - &eye * eta;
        for h in 0..d {
            fv.grad_q[h] = &fv.grad_q[h] * phi + &q_minus * (dphi * gw[h]);
        }
        fv.q = &fv.q * phi + &eye * ((1.0 - phi) * eta);
        fv
    }

    fn eval_1d(&self, y: f64) -> Fields1d {
        let eta = self.base.eta;
        let mut f = self.base.eval_1d(y);
        let (w, dw) = self.weight.value_and_derivative_1d(self.t0, y);
        let phi = self.profile.value(w / self.n);
        let dphi = self.profile.derivative(w / self.n) / self.n;
        f.dq = phi * f.dq + dphi * dw * (f.q - eta);
        f.q = phi * f.q + (1.0 - phi) * eta;
        f
    }

    fn shape_exponents(&self) -> Option<ShapeExponents> {
        self.base.shape_exponents()
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(q: &DMatrix<f64>) -> f64 {
    q.clone().symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norm_outside_unit_ball_is_euclidean() {
        let jet = smoothed_norm(&[2.0]);
        assert_eq!(jet.value, 2.0);
        let jet = smoothed_norm(&[1.2, -1.6]);
        assert_relative_eq!(jet.value, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn norm_at_origin() {
        let jet = smoothed_norm(&[0.0, 0.0, 0.0]);
        assert_eq!(jet.value, 0.375);
        assert!(jet.gradient.iter().all(|g| *g == 0.0));
        assert_relative_eq!(jet.hessian, DMatrix::identity(3, 3) * 1.5);
    }

    #[test]
    fn norm_continuity_at_unit_sphere() {
        let [v, d1, d2, _] = SmoothedNorm::radial(1.0 - 1e-15);
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d1, 1.0, epsilon = 1e-12);
        assert!(d2.abs() < 1e-12);
        // one-sided second differences agree at r = 1
        let h = 1e-3;
        let f = |r: f64| SmoothedNorm::radial(r)[0];
        let left = (f(1.0) - 2.0 * f(1.0 - h) + f(1.0 - 2.0 * h)) / (h * h);
        let right = (f(1.0 + 2.0 * h) - 2.0 * f(1.0 + h) + f(1.0)) / (h * h);
        assert!((left - right).abs() < 5e-3, "{left} vs {right}");
        assert!(SmoothedNorm::radial(0.0)[0] >= 0.375);
    }

    #[test]
    fn norm_lower_bound() {
        for i in 0..=1000 {
            let r = i as f64 / 500.0;
            assert!(SmoothedNorm::radial(r)[0] >= 0.375);
        }
    }

    #[test]
    fn polynomial_constraints() {
        assert!(validate_polynomial_params(2.0, 3.0, 4.0, 1).is_ok());
        let err = validate_polynomial_params(2.0, 1.0, 4.0, 1).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(ref m) if m.contains("p > (m−1)∨1")));
        let err = validate_polynomial_params(3.0, 4.0, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(ref m) if m.contains("s > |m−2|")));
        let err = validate_polynomial_params(0.0, 3.0, 4.0, 1).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(ref m) if m.contains("m > 0")));
        assert!(validate_polynomial_params(f64::NAN, 3.0, 4.0, 1).is_err());
    }

    #[test]
    fn polynomial_values() {
        let spec = validate_polynomial_params(2.0, 3.0, 4.0, 1).unwrap();
        let fv = eval_fields(&spec, &[2.0]);
        assert_relative_eq!(fv.q[(0, 0)], 5.0);
        assert_relative_eq!(fv.f[0], -8.0);
        assert_relative_eq!(fv.v, 16.0);
        let fv = eval_fields(&spec, &[1.0]);
        assert_relative_eq!(fv.q[(0, 0)], 2.0);
        let fv = eval_fields(&spec, &[0.0]);
        assert_eq!(fv.f[0], 0.0);
        for s in [OperatorSpec::heat(1), OperatorSpec::ornstein_uhlenbeck(1, 1.0)] {
            assert_eq!(s.eval(&[0.0]).f[0], 0.0);
        }
    }

    #[test]
    fn one_dimensional_fast_path_matches_general() {
        let spec = validate_polynomial_params(1.5, 2.5, 1.2, 1).unwrap();
        for &y in &[-3.0, -0.7, 0.0, 0.3, 1.0, 4.2] {
            let a = spec.eval_1d(y);
            let fv = spec.eval(&[y]);
            assert_relative_eq!(a.q, fv.q[(0, 0)], max_relative = 1e-14);
            assert_relative_eq!(a.dq, fv.grad_q[0][(0, 0)], max_relative = 1e-14);
            assert_relative_eq!(a.f, fv.f[0], max_relative = 1e-14);
            assert_relative_eq!(a.df, fv.jac_f[(0, 0)], max_relative = 1e-14);
            assert_relative_eq!(a.v, fv.v, max_relative = 1e-14);
            assert_relative_eq!(a.dv, fv.grad_v[0], max_relative = 1e-14);
        }
    }

    #[test]
    fn cutoff_profile_properties() {
        let phi = CutoffProfile::default();
        assert_eq!(phi.value(0.5), 1.0);
        assert_eq!(phi.value(-0.99), 1.0);
        assert_eq!(phi.value(2.0), 0.0);
        assert_eq!(phi.value(-3.0), 0.0);
        assert!(phi.max_scaled_slope() <= 2.0);
        assert!(CutoffProfile::new(0.25).is_ok());
        // a shoulder this wide needs a taller plateau than |s φ'| ≤ 2 allows
        assert!(CutoffProfile::new(0.45).is_err());
        // derivative consistency
        for i in 1..200 {
            let s = 1.0 + i as f64 / 200.0;
            let h = 1e-6;
            let fd = (phi.value(s + h) - phi.value(s - h)) / (2.0 * h);
            assert!((fd - phi.derivative(s)).abs() < 1e-6, "s = {s}");
        }
        // monotone on [1, 2]
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = phi.value(1.0 + i as f64 / 1000.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}
