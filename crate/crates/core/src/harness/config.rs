use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::{validate_polynomial_params, Diffusion, Drift, OperatorSpec, Potential, ShapeExponents};
use crate::error::{Error, Result};
use crate::fk_oracle::MCConfig;
use crate::lyapunov::ParamOverrides;
use crate::solver::{DriftFlux, SolverOptions};

/// Operator block. `kind` selects the family; the remaining keys are read
/// as the family needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub m: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    /// Linear drift rate for `ornstein-uhlenbeck` and `composed`.
    pub rate: Option<f64>,
}

fn default_kind() -> String {
    "polynomial".into()
}
fn default_dim() -> usize {
    1
}

impl OperatorConfig {
    pub fn build(&self) -> Result<OperatorSpec> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("operator.{name} is required for kind = \"{}\"", self.kind)))
        };
        match self.kind.as_str() {
            "polynomial" => validate_polynomial_params(need(self.m, "m")?, need(self.p, "p")?, need(self.s, "s")?, self.d),
            "heat" => Ok(OperatorSpec::heat(self.d)),
            "ornstein-uhlenbeck" => Ok(OperatorSpec::ornstein_uhlenbeck(self.d, self.rate.unwrap_or(1.0))),
            "composed" => {
                let diffusion = match self.m {
                    Some(m) => Diffusion::Polynomial { m },
                    None => Diffusion::Identity,
                };
                let drift = match (self.p, self.rate) {
                    (Some(p), _) => Drift::Polynomial { p },
                    (None, Some(rate)) => Drift::Linear { rate },
                    (None, None) => Drift::Zero,
                };
                let potential = match self.s {
                    Some(s) => Potential::Polynomial { s },
                    None => Potential::Zero,
                };
                let shape = match (self.m, self.p, self.s) {
                    (Some(m), Some(p), Some(s)) => Some(ShapeExponents { m, p, s }),
                    _ => None,
                };
                Ok(OperatorSpec::composed(self.d, diffusion, drift, potential, shape))
            }
            other => Err(Error::Config(format!(
                "operator.kind = \"{other}\"; expected polynomial, heat, ornstein-uhlenbeck or composed"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    pub k: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub t0: Option<f64>,
    pub sigma: Option<f64>,
    /// Radial nodes of the certification grid.
    pub radial_nodes: usize,
    pub time_samples: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            k: 10.0,
            alpha: None,
            beta: None,
            eps: None,
            eps1: None,
            eps2: None,
            t0: None,
            sigma: None,
            radial_nodes: 512,
            time_samples: 32,
        }
    }
}

impl LyapunovConfig {
    pub fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            alpha: self.alpha,
            beta: self.beta,
            eps: self.eps,
            eps1: self.eps1,
            eps2: self.eps2,
            t0: self.t0,
            sigma: self.sigma,
            ..ParamOverrides::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Truncation radius; derived from the weight when absent.
    pub radius: Option<f64>,
    pub nodes: usize,
    pub dt: f64,
    pub theta: f64,
    /// `fitted` or `upwind`.
    pub flux: String,
    pub snapshot_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            radius: None,
            nodes: 12001,
            dt: 1e-4,
            theta: 0.5,
            flux: "fitted".into(),
            snapshot_stride: 10,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> Result<SolverOptions> {
        let flux = match self.flux.as_str() {
            "fitted" => DriftFlux::Fitted,
            "upwind" => DriftFlux::Upwind,
            other => return Err(Error::Config(format!("solver.flux = \"{other}\"; expected fitted or upwind"))),
        };
        Ok(SolverOptions {
            theta: self.theta,
            flux,
            snapshot_stride: self.snapshot_stride,
            ..SolverOptions::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfigBlock {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfigBlock {
    fn default() -> Self {
        Self {
            paths: 100_000,
            dt: 2.5e-4,
            seed: 20240601,
            antithetic: true,
        }
    }
}

impl McConfigBlock {
    pub fn to_mc(&self, radius: f64) -> MCConfig {
        MCConfig {
            paths: self.paths,
            dt: self.dt,
            seed: self.seed,
            antithetic: self.antithetic,
            blowup_radius: 10.0 * radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub t_sweep: Vec<f64>,
    /// Half-width of the reported `y` range.
    pub y_max: f64,
    /// Sobolev exponent.
    pub r: f64,
    /// `one-point` calibrates at `calibration_t`; `fixed` uses `c_cal`.
    pub calibration: String,
    pub calibration_t: f64,
    pub c_cal: f64,
    /// Times of the cross-check.
    pub crosscheck_times: Vec<f64>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            t_sweep: vec![0.05, 0.1, 0.2, 0.4],
            y_max: 10.0,
            r: 2.0,
            calibration: "one-point".into(),
            calibration_t: 0.4,
            c_cal: 1.0,
            crosscheck_times: vec![0.1, 0.2, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxConfig {
    pub levels: Vec<f64>,
    /// Level whose cutoff lies outside the grid.
    pub far_level: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            levels: vec![4.0, 16.0, 64.0, 256.0],
            far_level: 1e11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// A complete run configuration. Only `[operator]` is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub mc: McConfigBlock,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub approx: ApproxConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MissingArtifact(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Configuration for the `(2, 3, 4)` prototype with every default.
    pub fn prototype() -> Self {
        Self {
            operator: OperatorConfig {
                kind: "polynomial".into(),
                d: 1,
                m: Some(2.0),
                p: Some(3.0),
                s: Some(4.0),
                rate: None,
            },
            lyapunov: LyapunovConfig::default(),
            solver: SolverConfig::default(),
            mc: McConfigBlock::default(),
            validation: ValidationConfig::default(),
            approx: ApproxConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// SHA-256 of the normalized configuration (defaults filled in).
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_block_is_mandatory() {
        assert!(matches!(RunConfig::parse("[solver]\nnodes = 11\n"), Err(Error::Config(_))));
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse("[operator]\nm = 2.0\np = 3.0\ns = 4.0\n").unwrap();
        assert_eq!(cfg, RunConfig::prototype());
        assert_eq!(cfg.hash(), RunConfig::prototype().hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn constraint_gate() {
        let cfg = RunConfig::parse("[operator]\nm = 2.0\np = 1.5\ns = 0.0\n").unwrap();
        let err = cfg.operator.build().unwrap_err();
        assert!(err.to_string().contains("s > |m−2|"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[operator]\nm = 2.0\np = 3.0\ns = 4.0\nq = 1.0\n").is_err());
    }
}
