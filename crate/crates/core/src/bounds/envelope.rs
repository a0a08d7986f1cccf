use crate::error::{Error, Result};

use super::constants::ConstantSet;
use super::logscalar::LogScalar;

/// Kernel functionals entering the envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeInputs {
    /// `sup_{(a₀,b₀)} ξ_{W₁}`
    pub sup_xi1: f64,
    /// `Ξ₁ = ∫_{a₀}^{b₀} ξ_{W₁}`
    pub xi1: f64,
    /// `Ξ₂ = ∫_{a₀}^{b₀} ξ_{W₂}`
    pub xi2: f64,
    /// `E₂ = ∫∫_{Q(a,b)} p log² p`
    pub e2: f64,
    /// `E_b = ∫ [p log p]_{t=a}^{t=b}`; may be negative.
    pub e_b: f64,
    /// Fisher integral `∫∫ |∇p|²/p` (reported, not used by `K`).
    pub fisher: f64,
    /// Calibration factor standing in for the universal constant.
    pub c_cal: f64,
}

impl EnvelopeInputs {
    /// All functionals 1, `E_b = 0`, `C = 1`.
    pub fn unit() -> Self {
        Self {
            sup_xi1: 1.0,
            xi1: 1.0,
            xi2: 1.0,
            e2: 1.0,
            e_b: 0.0,
            fisher: 1.0,
            c_cal: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let nonneg = [self.sup_xi1, self.xi1, self.xi2, self.e2, self.c_cal];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !self.e_b.is_finite() {
            return Err(Error::Domain(format!("envelope inputs must be finite and nonnegative: {self:?}")));
        }
        Ok(())
    }
}

/// Which `A₂` enters the kernel envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum A2Variant {
    /// Constant of the approximated operator (includes `c₇`, `c₁₂` terms).
    #[default]
    Tilde,
    Plain,
}

/// `C (A₁ sup ξ₁ + Ã₂ Ξ₁ + A₃ Ξ₂)`, a constant bound for `w·p` on `(a, b)`.
pub fn kernel_envelope(set: &ConstantSet, inp: &EnvelopeInputs, variant: A2Variant) -> Result<LogScalar> {
    inp.validate()?;
    let d = &set.derived;
    let a2 = match variant {
        A2Variant::Tilde => d.a2_tilde,
        A2Variant::Plain => d.a2,
    };
    let x = |v: f64| LogScalar::new(v);
    Ok(x(inp.c_cal) * (d.a1 * x(inp.sup_xi1) + a2 * x(inp.xi1) + d.a3 * x(inp.xi2)))
}

/// The gradient bound with its nine groups kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEnvelope {
    pub value: LogScalar,
    /// Groups before the calibration factor, in display order.
    pub groups: [LogScalar; 9],
    /// Set when the endpoint entropy difference is positive and its
    /// radical term was dropped.
    pub warning: Option<Error>,
}

/// Assembles the weighted-gradient bound `K`.
///
/// The last group is `(B̃₆ Ξ₁^{1/2} + B₇ Ξ₂^{1/2}) (−E_b)^{1/2}`; it enters
/// only when `E_b ≤ 0` and is otherwise set to zero with a warning.
pub fn gradient_envelope_k(set: &ConstantSet, inp: &EnvelopeInputs) -> Result<GradientEnvelope> {
    inp.validate()?;
    let d = &set.derived;
    let k = set.k;
    let x = |v: f64| LogScalar::new(v);
    let (s1, x1, x2) = (x(inp.sup_xi1), x(inp.xi1), x(inp.xi2));
    let e_km1 = (k - 1.0) / k;
    let e_km2 = (k - 2.0) / k;

    let g1 = d.b1 * d.a1.powf(e_km1) * s1;
    let g2 = (d.b1 * d.a2_tilde.sqrt() + d.b2 * d.a2_tilde.powf(e_km2) + d.b4_tilde * d.a2_tilde.powf(e_km1)) * x1;
    let g3 = (d.b1 * d.a3.sqrt()
        + (d.b2 + d.b3) * d.a3.powf(e_km2)
        + d.b3 * d.a2_tilde.powf(e_km2)
        + (d.b4_tilde + d.b5) * d.a3.powf(e_km1)
        + d.b5 * d.a2_tilde.powf(e_km1)
        + d.b6_tilde * d.b8
        + d.b7 * d.b8)
        * x2;
    let g4 = d.b1 * d.a1.sqrt() * x1.sqrt() * s1.sqrt();
    let g5 = d.a1.powf(e_km2) * (d.b2 * x1.powf(2.0 / k) + d.b3 * x2.powf(2.0 / k)) * s1.powf(e_km2);
    let g6 = d.b1 * (d.a2_tilde.powf(e_km1) * x1.powf(e_km1) + d.a3.powf(e_km1) * x2.powf(e_km1)) * s1.powf(1.0 / k);
    let g7 = d.a1.powf(e_km1) * (d.b4_tilde * x1.powf(1.0 / k) + d.b5 * x2.powf(1.0 / k)) * s1.powf(e_km1);
    let mix = d.b6_tilde * x1.sqrt() + d.b7 * x2.sqrt();
    let g8 = mix * x(inp.e2).sqrt();
    let (g9, warning) = if inp.e_b <= 0.0 {
        (mix * x(-inp.e_b).sqrt(), None)
    } else {
        (
            LogScalar::ZERO,
            Some(Error::NegativeRadicand(format!(
                "endpoint entropy term (E_b = {} > 0); term set to 0",
                inp.e_b
            ))),
        )
    };
    let groups = [g1, g2, g3, g4, g5, g6, g7, g8, g9];
    let value = x(inp.c_cal) * groups.iter().copied().sum::<LogScalar>();
    Ok(GradientEnvelope { value, groups, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{assemble_constants, Gaps};
    use approx::assert_relative_eq;

    #[test]
    fn degenerate_kernel_envelope() {
        let s = assemble_constants([1.0; 12], 10.0, Gaps::UNIT).unwrap();
        let inp = EnvelopeInputs {
            xi1: 0.0,
            xi2: 0.0,
            ..EnvelopeInputs::unit()
        };
        assert_eq!(kernel_envelope(&s, &inp, A2Variant::Tilde).unwrap().to_f64(), 1.0);
        let env = kernel_envelope(&s, &EnvelopeInputs::unit(), A2Variant::Tilde).unwrap();
        assert_relative_eq!(env.to_f64(), 10.0, max_relative = 1e-15);
        let env = kernel_envelope(&s, &EnvelopeInputs::unit(), A2Variant::Plain).unwrap();
        assert_relative_eq!(env.to_f64(), 8.0, max_relative = 1e-15);
    }

    #[test]
    fn doubling_xi2_adds_one_a3_term() {
        let s = assemble_constants([1.5; 12], 10.0, Gaps::UNIT).unwrap();
        let base = kernel_envelope(&s, &EnvelopeInputs::unit(), A2Variant::Tilde).unwrap().to_f64();
        let inp = EnvelopeInputs {
            xi2: 2.0,
            ..EnvelopeInputs::unit()
        };
        let doubled = kernel_envelope(&s, &inp, A2Variant::Tilde).unwrap().to_f64();
        assert_relative_eq!(doubled - base, s.derived.a3.to_f64(), max_relative = 1e-12);
    }

    #[test]
    fn unit_k_regression() {
        // unit c_i give A₁ = 1, Ã₂ = 6, A₃ = 3, B = (1, 3, 5, 11, 9, 9, 3, 2)
        let s = assemble_constants([1.0; 12], 10.0, Gaps::UNIT).unwrap();
        let k = gradient_envelope_k(&s, &EnvelopeInputs::unit()).unwrap();
        let g: Vec<f64> = k.groups.iter().map(|g| g.to_f64()).collect();
        let expect = [
            1.0,
            70.20165881781543,
            164.86194475561612,
            1.0,
            8.0,
            7.703628191989908,
            20.0,
            12.0,
            0.0,
        ];
        for (a, b) in g.iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-13);
        }
        assert_relative_eq!(k.value.to_f64(), 284.76723176542146, max_relative = 1e-13);
        assert!(k.warning.is_none());
    }

    #[test]
    fn positive_endpoint_difference_is_flagged() {
        let s = assemble_constants([1.0; 12], 10.0, Gaps::UNIT).unwrap();
        let inp = EnvelopeInputs {
            e_b: 0.5,
            ..EnvelopeInputs::unit()
        };
        let k = gradient_envelope_k(&s, &inp).unwrap();
        assert!(matches!(k.warning, Some(Error::NegativeRadicand(_))));
        assert_eq!(k.groups[8], LogScalar::ZERO);
        let inp = EnvelopeInputs {
            e_b: -4.0,
            ..EnvelopeInputs::unit()
        };
        let k = gradient_envelope_k(&s, &inp).unwrap();
        assert_relative_eq!(k.groups[8].to_f64(), 12.0 * 2.0, max_relative = 1e-14);
    }
}
