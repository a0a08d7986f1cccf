//! Feynman–Kac Monte Carlo for `T(t)f(x) = E[f(Y_t) exp(−∫₀^t V(Y_s) ds)]`.
//!
//! Paths follow `dY = (q'(Y) + F(Y)) dt + √(2q(Y)) dW` (Euler–Maruyama)
//! with the killing weight accumulated at the left point of each step.
//! Every antithetic pair draws from its own ChaCha stream keyed by the pair
//! index, and the reduction runs in a fixed order, so estimates do not
//! depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::coefficients::OperatorSpec;
use crate::error::{Error, Result};
use crate::lyapunov::{check_lyapunov, ExpRadialWeight, LineGrid};

/// Largest `|drift| · dt` accepted before the step is halved.
const STEP_TARGET: f64 = 0.1;
const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig {
    /// Number of paths (rounded up to an even number with antithetic pairs).
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Paths leaving `|y| > blowup_radius` abort the run.
    pub blowup_radius: f64,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            dt: 1e-3,
            seed: 20240601,
            antithetic: true,
            blowup_radius: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over independent samples divided by
    /// `√samples`; a sample is a pair mean with antithetic sampling.
    pub se: f64,
    /// Independent samples behind `se`.
    pub effective_paths: usize,
    /// `1 − E[killing weight]`.
    pub killed_fraction: f64,
    /// Set when the top 1% of contributions carry more than half the mean.
    pub heavy_tail: Option<String>,
}

/// [`estimate_xi`] together with the Lyapunov ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct XiEstimate {
    pub estimate: MCEstimate,
    /// `exp(∫₀^t h̄) · W(0, x)`
    pub ceiling: f64,
}

/// Terminal positions and killing weights of one simulated path.
#[derive(Debug, Clone, Copy)]
struct Endpoint {
    y: f64,
    weight: f64,
}

/// Simulates one antithetic pair (or a single path when `pair` is false)
/// in lockstep so both members share step sizes.
fn simulate(spec: &OperatorSpec, x: f64, t: f64, cfg: &MCConfig, index: u64, pair: bool) -> Result<[Endpoint; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let members = if pair { 2 } else { 1 };
    let mut y = [x; 2];
    let mut log_w = [0.0f64; 2];
    let macro_steps = (t / cfg.dt).ceil().max(1.0) as u64;
    let dt_macro = t / macro_steps as f64;
    for _ in 0..macro_steps {
        let mut halvings = 0;
        for &yi in &y[..members] {
            let c = spec.eval_1d(yi);
            let drift = (c.dq + c.f).abs();
            while halvings < MAX_HALVINGS && drift * dt_macro / f64::from(1u32 << halvings) > STEP_TARGET {
                halvings += 1;
            }
        }
        let sub = 1u32 << halvings;
        let h = dt_macro / f64::from(sub);
        let sq = h.sqrt();
        for _ in 0..sub {
            let z: f64 = StandardNormal.sample(&mut rng);
            for i in 0..members {
                let c = spec.eval_1d(y[i]);
                let dw = if i == 0 { z } else { -z } * sq;
                log_w[i] -= c.v * h;
                y[i] += (c.dq + c.f) * h + (2.0 * c.q).sqrt() * dw;
                if !y[i].is_finite() || y[i].abs() > cfg.blowup_radius {
                    return Err(Error::Blowup(format!(
                        "path {index} reached y = {} (limit {})",
                        y[i], cfg.blowup_radius
                    )));
                }
            }
        }
    }
    Ok([
        Endpoint { y: y[0], weight: log_w[0].exp() },
        Endpoint { y: y[1], weight: log_w[1].exp() },
    ])
}

/// Neumaier-compensated sum in slice order.
fn compensated_sum(v: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn summarize(samples: &[f64], contributions: &[f64], weights: &[f64]) -> MCEstimate {
    let n = samples.len() as f64;
    let mean = compensated_sum(samples) / n;
    let dev: Vec<f64> = samples.iter().map(|s| (s - mean) * (s - mean)).collect();
    let var = if samples.len() > 1 { compensated_sum(&dev) / (n - 1.0) } else { 0.0 };
    let mut sorted: Vec<f64> = contributions.iter().map(|c| c.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = (sorted.len() / 100).max(1);
    let total = compensated_sum(&sorted);
    let share = if total > 0.0 { compensated_sum(&sorted[..top]) / total } else { 0.0 };
    let heavy_tail = (share > 0.5).then(|| format!("top 1% of paths carry {:.1}% of the estimate", 100.0 * share));
    MCEstimate {
        mean,
        se: (var / n).sqrt(),
        effective_paths: samples.len(),
        killed_fraction: 1.0 - compensated_sum(weights) / weights.len() as f64,
        heavy_tail,
    }
}

/// Estimates `E[g_k(Y_t) · weight]` for several test functions from one
/// set of paths.
pub fn estimate_many(
    spec: &OperatorSpec,
    x: f64,
    t: f64,
    fs: &[&(dyn Fn(f64) -> f64 + Sync)],
    cfg: &MCConfig,
) -> Result<Vec<MCEstimate>> {
    if spec.dim != 1 {
        return Err(Error::Domain(format!("the path simulation is one-dimensional, spec has d = {}", spec.dim)));
    }
    if !(t > 0.0 && cfg.dt > 0.0 && cfg.paths >= 2) {
        return Err(Error::Domain(format!("need t > 0, dt > 0 and at least 2 paths (t = {t}, {cfg:?})")));
    }
    let units = if cfg.antithetic { cfg.paths.div_ceil(2) } else { cfg.paths };
    let ends: Vec<[Endpoint; 2]> = (0..units as u64)
        .into_par_iter()
        .map(|i| simulate(spec, x, t, cfg, i, cfg.antithetic))
        .collect::<Result<_>>()?;
    let members = if cfg.antithetic { 2 } else { 1 };
    let weights: Vec<f64> = ends.iter().flat_map(|e| e[..members].iter().map(|p| p.weight)).collect();
    Ok(fs
        .iter()
        .map(|f| {
            let contributions: Vec<f64> = ends
                .iter()
                .flat_map(|e| e[..members].iter().map(|p| f(p.y) * p.weight))
                .collect();
            let samples: Vec<f64> = contributions
                .chunks(members)
                .map(|c| c.iter().sum::<f64>() / members as f64)
                .collect();
            summarize(&samples, &contributions, &weights)
        })
        .collect())
}

/// Monte Carlo estimate of `T(t)f(x)`.
pub fn estimate_semigroup(
    spec: &OperatorSpec,
    x: f64,
    t: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    cfg: &MCConfig,
) -> Result<MCEstimate> {
    Ok(estimate_many(spec, x, t, &[f], cfg)?.remove(0))
}

/// Monte Carlo estimate of `ξ_W(t, x) = E[W(t, Y_t) · weight]` with the
/// ceiling `exp(∫₀^t h̄) W(0, x)`; `h̄` is taken on `lyapunov_grid`.
pub fn estimate_xi(
    spec: &OperatorSpec,
    x: f64,
    t: f64,
    weight: &ExpRadialWeight,
    lyapunov_grid: &LineGrid,
    cfg: &MCConfig,
) -> Result<XiEstimate> {
    let f = |y: f64| weight.value_1d(t, y);
    let estimate = estimate_semigroup(spec, x, t, &f, cfg)?;
    let integral = check_lyapunov(spec, weight, lyapunov_grid, t)?.integral;
    Ok(XiEstimate {
        estimate,
        ceiling: integral.exp() * weight.value_1d(0.0, x),
    })
}
