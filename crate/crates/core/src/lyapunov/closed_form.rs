use crate::coefficients::ShapeExponents;
use crate::error::{Error, Result};

use super::params::LyapunovParams;

/// `C(γ, β) = (γ/β)^{γ/β} e^{−γ/β}`, the maximum of `z^γ e^{−z^β}`.
pub fn peak_coefficient(gamma: f64, beta: f64) -> f64 {
    let q = gamma / beta;
    (q * q.ln() - q).exp()
}

/// `C(γ, β) τ^{−γ/β}`, an upper bound for `sup_{z>0} z^γ e^{−τ z^β}`.
pub fn peak_bound(gamma: f64, beta: f64, tau: f64) -> Result<f64> {
    if !(gamma > 0.0 && beta > 0.0 && tau > 0.0) {
        return Err(Error::Domain(format!(
            "peak_bound needs γ, β, τ > 0 (got {gamma}, {beta}, {tau})"
        )));
    }
    Ok(peak_coefficient(gamma, beta) * tau.powf(-gamma / beta))
}

/// Location of the maximum of `z^γ e^{−τ z^β}`.
pub fn peak_location(gamma: f64, beta: f64, tau: f64) -> f64 {
    (gamma / (beta * tau)).powf(1.0 / beta)
}

/// Closed-form constants `c_i = c̄_i · a₀^{e_i}` for the polynomial family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormConstants {
    pub c: [f64; 12],
    pub cbar: [f64; 12],
    pub a0_exponent: [f64; 12],
    /// Largest peak location of the ratio profiles at `t = a₀`; grids for
    /// measured suprema must extend past it.
    pub peak_radius: f64,
}

/// `sup_{z ≥ 1} z^γ e^{−τ z^β}`-type factor: the peak bound when `γ > 0`,
/// otherwise `1` (the power is then at most 1 on `z ≥ 1`).
fn peak_or_one(gamma: f64, beta: f64, tau: f64) -> f64 {
    if gamma > 0.0 {
        peak_coefficient(gamma, beta) * tau.powf(-gamma / beta)
    } else {
        1.0
    }
}

/// Upper bounds for the eleven ratio suprema and `c₁₂` on `[a₀, b₀] × {|y| ≥ 1}`
/// with `b₀ ≤ 1`, obtained from [`peak_bound`] term by term.
pub fn closed_form_constants(
    params: &LyapunovParams,
    shape: ShapeExponents,
    a0: f64,
    d: usize,
) -> Result<ClosedFormConstants> {
    if !(a0 > 0.0 && a0 < params.horizon) {
        return Err(Error::Domain(format!("a₀ ∈ (0, T), got {a0}")));
    }
    let ShapeExponents { m, p, s } = shape;
    let LyapunovParams {
        alpha,
        beta,
        eps,
        eps1,
        eps2,
        k,
        t0,
        ..
    } = *params;
    let df = d as f64;
    let pos = |x: f64| x.max(0.0);
    let cb = |g: f64, tau: f64| peak_coefficient(g, beta) * tau.powf(-g / beta);

    let tau2 = (eps1 - 2.0 * k * eps) / (2.0 * k);
    let tau3 = (eps1 - k * eps) / k;
    let tau4 = (eps1 - 4.0 * eps) / (2.0 * k);
    let tau5 = (eps2 - 2.0 * eps) / (2.0 * k);
    let tau7 = (eps1 - 2.0 * eps) / (2.0 * k);
    let tau8 = (eps2 - eps) / k;
    let tau9 = 2.0 * (eps2 - eps) / k;
    let tau10 = (3.0 * eps1 - 2.0 * k * eps) / (2.0 * k);
    let tau11 = (eps1 - k * eps) / k;

    let mut cbar = [0.0; 12];
    let mut ex = [0.0; 12];

    cbar[0] = 1.0;

    // |Q∇w| ≤ 2εβ t^α z^{β+m−1} e^{−τ₂ t^α z^β}
    cbar[1] = 2.0 * eps * beta * cb(beta + m - 1.0, tau2);
    ex[1] = -alpha * pos(m - 1.0) / beta;

    // |QD²w| ≤ 2 z^m (|w''| + √(d−1)|w'|/z)
    let ka = 2.0 * eps * beta * ((beta - 1.0).abs() + (df - 1.0).sqrt()) * cb(beta + m - 2.0, tau3);
    let kb = 2.0 * eps * eps * beta * beta * cb(2.0 * beta + m - 2.0, tau3);
    cbar[2] = ka + kb;
    ex[2] = -alpha * pos(m - 2.0) / beta;

    cbar[3] = eps * alpha * (-1.0f64).exp() / tau4;
    ex[3] = -1.0;

    cbar[4] = cb(s / 2.0, tau5);
    ex[4] = -alpha * s / (2.0 * beta);

    cbar[5] = cb(p, tau5);
    ex[5] = -alpha * p / beta;

    // |∇Q| = √d m z^{m−1}
    if m > 1.0 {
        cbar[6] = df.sqrt() * m * cb(m - 1.0, tau7);
        ex[6] = -alpha * (m - 1.0) / beta;
    } else {
        cbar[6] = df.sqrt() * m;
    }

    // |∇F| = √(d−1+p²) z^{p−1}
    cbar[7] = (df - 1.0 + p * p).sqrt() * cb(p - 1.0, tau8);
    ex[7] = -alpha * (p - 1.0) / beta;

    if s > 1.0 {
        cbar[8] = s * cb(s - 1.0, tau9);
        ex[8] = -alpha * (s - 1.0) / beta;
    } else {
        cbar[8] = s;
    }

    // |D³w| ≤ w Σ_j κ_j (εβ t^α)^j z^{jβ−3}
    let sd = (3.0 * (df + 2.0)).sqrt();
    let kappa = [
        (sd + 3.0) * ((beta - 1.0).abs() + 1.0) + ((beta - 1.0) * (beta - 2.0)).abs(),
        (sd + 3.0) + 3.0 * (beta - 1.0).abs(),
        1.0,
    ];
    cbar[9] = kappa
        .iter()
        .enumerate()
        .map(|(i, kj)| {
            let j = (i + 1) as f64;
            kj * (eps * beta).powf(j) * peak_or_one(j * beta - 3.0, beta, tau10)
        })
        .sum();

    // |∂_t∇w| = w εαβ t^{α−1}(z^{β−1} + ε t^α z^{2β−1})
    cbar[10] = eps * alpha * beta * peak_or_one(beta - 1.0, beta, tau11)
        + eps * eps * alpha * beta * peak_or_one(2.0 * beta - 1.0, beta, tau11);
    ex[10] = -1.0;

    // |Q||∇W₁(t₀)|/W₁(t₀) = √d (1+z^m) ε₁β t₀^α z^{β−1}; the t-power is
    // negative, so the supremum over t ≥ a₀ sits at a₀.
    cbar[11] = 2.0 * df.sqrt() * beta * eps1 * t0.powf(alpha) * cb(beta + m - 1.0, tau7);
    ex[11] = -alpha * (beta + m - 1.0) / beta;

    let mut c = [0.0; 12];
    for i in 0..12 {
        c[i] = cbar[i] * a0.powf(ex[i]);
    }

    let ta = a0.powf(alpha);
    let peaks = [
        (beta + m - 1.0, tau2),
        (beta + m - 2.0, tau3),
        (2.0 * beta + m - 2.0, tau3),
        (beta, tau4),
        (s / 2.0, tau5),
        (p, tau5),
        (m - 1.0, tau7),
        (p - 1.0, tau8),
        (s - 1.0, tau9),
        (3.0 * beta - 3.0, tau10),
        (2.0 * beta - 1.0, tau11),
        (beta + m - 1.0, tau7),
    ];
    let peak_radius = peaks
        .iter()
        .filter(|(g, _)| *g > 0.0)
        .map(|&(g, tau)| peak_location(g, beta, tau * ta))
        .fold(1.0, f64::max);

    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("closed-form constant".into()));
    }
    Ok(ClosedFormConstants {
        c,
        cbar,
        a0_exponent: ex,
        peak_radius,
    })
}
