use crate::error::{Error, Result};

use super::logscalar::LogScalar;

/// Window gaps entering the constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaps {
    /// `b₀ − b`
    pub b0_b: f64,
    /// `b − b₁`
    pub b_b1: f64,
}

impl Gaps {
    pub const UNIT: Gaps = Gaps { b0_b: 1.0, b_b1: 1.0 };
}

/// Derived constants, all kept in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub a1: LogScalar,
    pub a2: LogScalar,
    pub a2_tilde: LogScalar,
    pub a3: LogScalar,
    pub b1: LogScalar,
    pub b2: LogScalar,
    pub b3: LogScalar,
    pub b4: LogScalar,
    pub b4_tilde: LogScalar,
    pub b5: LogScalar,
    pub b6: LogScalar,
    pub b6_tilde: LogScalar,
    pub b7: LogScalar,
    pub b8: LogScalar,
}

impl Derived {
    /// `(name, value)` pairs in a fixed order for reports.
    pub fn named(&self) -> [(&'static str, LogScalar); 14] {
        [
            ("A1", self.a1),
            ("A2", self.a2),
            ("A2~", self.a2_tilde),
            ("A3", self.a3),
            ("B1", self.b1),
            ("B2", self.b2),
            ("B3", self.b3),
            ("B4", self.b4),
            ("B4~", self.b4_tilde),
            ("B5", self.b5),
            ("B6", self.b6),
            ("B6~", self.b6_tilde),
            ("B7", self.b7),
            ("B8", self.b8),
        ]
    }
}

/// `c₁ … c₁₂` together with every constant built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSet {
    /// Values used in the algebra (after the optional floor at 1).
    pub c: [f64; 12],
    /// Values as supplied.
    pub raw: [f64; 12],
    pub k: f64,
    pub gaps: Gaps,
    pub clamped: bool,
    pub derived: Derived,
}

/// Builds the constant set with every `c_i` floored at 1.
pub fn assemble_constants(c: [f64; 12], k: f64, gaps: Gaps) -> Result<ConstantSet> {
    ConstantSet::new(c, k, gaps, true)
}

impl ConstantSet {
    /// With `clamp`, each `c_i` below 1 is raised to 1 before use.
    pub fn new(raw: [f64; 12], k: f64, gaps: Gaps, clamp: bool) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!("constants must be finite and nonnegative: {raw:?}")));
        }
        if !(gaps.b0_b > 0.0 && gaps.b_b1 > 0.0) {
            return Err(Error::Domain(format!("window gaps must be positive: {gaps:?}")));
        }
        if !(k > 2.0 && k.is_finite()) {
            return Err(Error::Domain(format!("moment index k = {k} too small")));
        }
        let c = if clamp { raw.map(|v| v.max(1.0)) } else { raw };
        Ok(Self {
            c,
            raw,
            k,
            gaps,
            clamped: clamp,
            derived: derive(&c, k, gaps),
        })
    }

    /// `c_i` (1-based, as in the formulas) in log space.
    pub fn ci(&self, i: usize) -> LogScalar {
        LogScalar::new(self.c[i - 1])
    }
}

fn derive(c: &[f64; 12], k: f64, gaps: Gaps) -> Derived {
    let l = |i: usize| LogScalar::new(c[i - 1]);
    let (c1, c2, c3, c4, c5, c6) = (l(1), l(2), l(3), l(4), l(5), l(6));
    let (c7, c8, c9, c10, c11, c12) = (l(7), l(8), l(9), l(10), l(11), l(12));
    let h = k / 2.0;
    let g0 = LogScalar::new(gaps.b0_b);
    let g1 = LogScalar::new(gaps.b_b1);

    let a1 = c1.powf(h);
    let a2 = c2.powf(k) + c1.powf(h) / g0.powf(h) + c3.powf(h) + c4.powf(h);
    let a2_tilde = a2 + c2.powf(h) * c7.powf(h) + c2.powf(h) * c12.powf(h);
    let a3 = c5.powf(k) + c6.powf(k) + c2.powf(h) * c6.powf(h);

    let b1 = c2;
    let b2 = c2 / g1 + c2 * c4 + c11;
    let b3 = c2 * c5.powf(2.0) + c3 * c6 + c2.powf(2.0) * c6 + c2 * c8 + c9;
    let b4 = c3
        + c2.powf(2.0)
        + c2 / g1.sqrt()
        + c2.sqrt() * c3.sqrt() * c7.sqrt()
        + c2.powf(1.5) * c7.sqrt()
        + c2.sqrt() * c10.sqrt()
        + c2 * c3.sqrt()
        + c2 * c4.sqrt()
        + c2.sqrt() * c11.sqrt();
    let b4_tilde = b4 + c2.sqrt() * c3.sqrt() * c12.sqrt() + c2.powf(1.5) * c12.sqrt();
    let b5 = c6
        + c2 * c6
        + c3.sqrt() * c6.sqrt()
        + c2 * c6.sqrt()
        + c2.sqrt() * c3.sqrt() * c6.sqrt()
        + c2.powf(1.5) * c6.sqrt()
        + c5
        + c2 * c5
        + c8;
    let b6 = c1.powf(h)
        + c1.powf(h) / g1.powf(h)
        + c2.powf(k)
        + c2.powf(h) * c7.powf(h)
        + c3.powf(h)
        + c7.powf(k)
        + c4.powf(h);
    let b6_tilde = b6 + c2.powf(h) * c12.powf(h) + c12.powf(k);
    let b7 = c6.powf(k) + c2.powf(h) * c6.powf(h) + c5.powf(k);
    let b8 = c6 + c5.powf(2.0);

    Derived {
        a1,
        a2,
        a2_tilde,
        a3,
        b1,
        b2,
        b3,
        b4,
        b4_tilde,
        b5,
        b6,
        b6_tilde,
        b7,
        b8,
    }
}

/// Constant replacement for the bounded-diffusion approximation:
/// `c₂ → 2c₂`, `c₃ → 2c₃`, `c₇ → √3 (c₇ + 2(1+√d) c₁₂)`.
pub fn approx_constant_update(set: &ConstantSet, d: usize) -> ConstantSet {
    let mut c = set.c;
    c[1] *= 2.0;
    c[2] *= 2.0;
    c[6] = 3f64.sqrt() * (c[6] + 2.0 * (1.0 + (d as f64).sqrt()) * c[11]);
    ConstantSet {
        c,
        raw: c,
        k: set.k,
        gaps: set.gaps,
        clamped: set.clamped,
        derived: derive(&c, set.k, set.gaps),
    }
}
