use std::sync::Arc;

use crate::bounds::{
    approx_constant_update, choose_window, gradient_envelope_k, kernel_envelope, A2Variant, ConstantSet,
    PolynomialEnvelope, Window,
};
use crate::coefficients::{pow, OperatorSpec, SmoothedNorm};
use crate::error::{Error, Result};
use crate::fk_oracle::{estimate_many, MCEstimate};
use crate::lyapunov::{
    check_hypotheses, check_lyapunov, default_params, HypothesisGrid, HypothesisReport, LineGrid, LyapunovParams,
    WeightFamily,
};
use crate::solver::{
    functionals, gradient_profile, solve_approximated, solve_forward, trapezoid, xi, FunctionalReport, Grid,
    KernelField, Region,
};

use super::config::RunConfig;

/// Which value of each `c_i` feeds the constant pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Grid suprema (floored at 1).
    #[default]
    Measured,
    /// Explicit upper bounds.
    ClosedForm,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(Mode::Measured),
            "closed-form" => Ok(Mode::ClosedForm),
            other => Err(Error::Config(format!("mode \"{other}\"; expected measured or closed-form"))),
        }
    }
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Measured => "measured",
            Mode::ClosedForm => "closed-form",
        }
    }
}

/// Parsed configuration with the operator and parameters built.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub spec: OperatorSpec,
    /// `None` for operators without growth exponents and no overrides.
    pub params: Option<LyapunovParams>,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self> {
        let spec = config.operator.build()?;
        let params = match default_params(&spec, config.lyapunov.k, &config.lyapunov.overrides()) {
            Ok(p) => Some(p),
            Err(_) if spec.shape_exponents().is_none() => None,
            Err(e) => return Err(e),
        };
        Ok(Self { config, spec, params })
    }

    pub fn params(&self) -> Result<&LyapunovParams> {
        self.params.as_ref().ok_or_else(|| {
            Error::Config("this operator needs lyapunov.alpha and lyapunov.beta".into())
        })
    }

    pub fn weights(&self) -> Result<WeightFamily> {
        Ok(WeightFamily::for_shape(self.params()?, self.spec.shape_exponents()))
    }

    pub fn hypothesis_grid(&self) -> HypothesisGrid {
        HypothesisGrid {
            radial_nodes: self.config.lyapunov.radial_nodes,
            time_samples: self.config.lyapunov.time_samples,
            radius: None,
        }
    }

    pub fn t_init(&self) -> f64 {
        (10.0 * self.config.solver.dt).min(1e-4)
    }

    pub fn grid(&self) -> Result<Grid> {
        let radius = match self.config.solver.radius {
            Some(r) => r,
            None => self.params()?.truncation_radius(self.t_init()),
        };
        Grid::new(radius, self.config.solver.nodes)
    }

    /// Forward solve from `x = 0` up to `t_end`.
    pub fn solve(&self, t_end: f64) -> Result<KernelField> {
        let opts = self.config.solver.options()?;
        solve_forward(&self.spec, 0.0, t_end, &self.grid()?, self.config.solver.dt, &opts)
    }

    /// Largest window end over the sweep.
    pub fn sweep_end(&self) -> Result<f64> {
        let mut end = 0.0f64;
        for &t in &self.config.validation.t_sweep {
            end = end.max(choose_window(t)?.b0);
        }
        Ok(end)
    }
}

/// `c₁ … c₁₂` for a window, from the certification report.
pub fn constants_from(report: &HypothesisReport, mode: Mode, k: f64) -> Result<ConstantSet> {
    let mut c = [0.0; 12];
    for (i, rec) in report.conditions.iter().enumerate() {
        c[i] = match mode {
            Mode::Measured => rec.measured,
            Mode::ClosedForm => rec.closed_form,
        };
    }
    if c.iter().any(|v| v.is_nan()) {
        return Err(Error::Config("closed-form constants need growth exponents".into()));
    }
    ConstantSet::new(c, k, report.window.gaps(), true)
}

/// Certification for every window of the sweep.
pub fn certify(ctx: &Context) -> Result<Vec<(f64, HypothesisReport)>> {
    let params = ctx.params()?;
    ctx.config
        .validation
        .t_sweep
        .iter()
        .map(|&t| {
            let w = choose_window(t)?;
            Ok((t, check_hypotheses(&ctx.spec, params, &w, &ctx.hypothesis_grid())?))
        })
        .collect()
}

/// `sup |w · p|` and `sup |w · ∂_y p|` over stored times in `[a, b]`.
pub fn weighted_sups(field: &KernelField, weights: &WeightFamily, window: &Window) -> (f64, f64) {
    let mut sp = 0.0f64;
    let mut sg = 0.0f64;
    for (i, &t) in field.times.iter().enumerate() {
        if t < window.a - 1e-9 || t > window.b + 1e-9 {
            continue;
        }
        let p = &field.values[i];
        let g = gradient_profile(p, field.grid.h);
        for (j, &y) in field.grid.coords.iter().enumerate() {
            let lw = weights.w.log_value(t, &[y]);
            if p[j] > 0.0 {
                sp = sp.max((p[j].ln() + lw).exp());
            }
            if g[j] != 0.0 {
                sg = sg.max((g[j].abs().ln() + lw).exp());
            }
        }
    }
    (sp, sg)
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `−log p(t, 0, y)` against `t^α |y|_*^β` over the outer third
/// of the resolved support `{y ≥ 0 : p ≥ 1e−30 · max p}`.
pub fn spatial_decay_slope(field: &KernelField, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    let p = field.at_time(t)?;
    let pmax = p.iter().copied().fold(0.0, f64::max);
    let floor = 1e-30 * pmax;
    let ys = &field.grid.coords;
    let y_res = ys
        .iter()
        .zip(&p)
        .filter(|(y, p)| **y >= 0.0 && **p >= floor)
        .map(|(y, _)| *y)
        .fold(0.0, f64::max);
    let (mut xs, mut zs) = (Vec::new(), Vec::new());
    for (&y, &pv) in ys.iter().zip(&p) {
        if y >= 2.0 * y_res / 3.0 && y <= y_res && pv > 0.0 {
            xs.push(t.powf(alpha) * pow(SmoothedNorm::radial(y)[0], beta));
            zs.push(-pv.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Domain(format!("resolved support at t = {t} too small for a slope")));
    }
    Ok(ols_slope(&xs, &zs))
}

/// One row of the envelope comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub t: f64,
    pub window: Window,
    pub sup_wp: f64,
    pub kernel_envelope: f64,
    pub ratio_p: f64,
    pub sup_wgrad: f64,
    pub k: f64,
    pub ratio_grad: f64,
    /// `sup_y |∂_y p(t, 0, y)| e^{ε t^α |y|_*^β}` at `t` itself.
    pub decay_scaled_grad: f64,
    pub decay_slope: f64,
    pub functionals: FunctionalReport,
    pub fisher_bound: f64,
    pub fisher_pass: bool,
    pub sobolev_finite: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub mode: Mode,
    pub rows: Vec<ValidationRow>,
    /// Calibration factor applied to both envelopes.
    pub c_cal: f64,
    /// Fitted exponent `γ` of `sup |w∇p| ~ (1 − log t) t^γ`.
    pub fitted_exponent: f64,
    pub envelope_exponent: f64,
    pub envelope_pass: bool,
    pub exponent_pass: bool,
    pub decay_pass: bool,
    pub fisher_pass: bool,
    pub sobolev_pass: bool,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.envelope_pass && self.exponent_pass && self.decay_pass && self.fisher_pass && self.sobolev_pass
    }
}

/// Relative slack of the Fisher-information inequality.
pub const FISHER_SLACK: f64 = 0.02;
/// Required fraction of `ε` for the spatial decay slope.
pub const DECAY_FRACTION: f64 = 0.8;
/// Allowed shortfall of the fitted exponent below the envelope exponent.
pub const EXPONENT_MARGIN: f64 = 1.0;

/// Compares the computed kernel with both envelopes over the t-sweep.
pub fn validate(ctx: &Context, mode: Mode) -> Result<ValidationReport> {
    let params = *ctx.params()?;
    let shape = ctx
        .spec
        .shape_exponents()
        .ok_or_else(|| Error::Config("validation needs growth exponents".into()))?;
    let vcfg = &ctx.config.validation;
    let field = ctx.solve(ctx.sweep_end()?)?;
    let certs = certify(ctx)?;
    let mut rows = Vec::with_capacity(certs.len());
    for (t, report) in &certs {
        let window = report.window;
        let set = constants_from(report, mode, params.k)?;
        let wparams = params.for_window_end(window.b0);
        let fam = WeightFamily::for_shape(&wparams, Some(shape));
        let fr = functionals(&field, &fam, &window, vcfg.r)?;
        let inputs = fr.envelope_inputs(1.0);
        let env = kernel_envelope(&set, &inputs, A2Variant::Tilde)?.checked("kernel envelope")?;
        let kk = gradient_envelope_k(&set, &inputs)?;
        let k = kk.value.checked("K")?;
        let (sup_wp, sup_wgrad) = weighted_sups(&field, &fam, &window);

        let p = field.at_time(*t)?;
        let g = gradient_profile(&p, field.grid.h);
        let decay_scaled_grad = field
            .grid
            .coords
            .iter()
            .zip(&g)
            .filter(|(_, g)| **g != 0.0)
            .map(|(&y, g)| (g.abs().ln() + fam.w.log_value(*t, &[y])).exp())
            .fold(0.0, f64::max);
        let decay_slope = spatial_decay_slope(&field, *t, params.alpha, params.beta)?;
        let fisher_bound = fr.fisher_bound(ctx.spec.eta);
        let fisher_pass = fr.fisher <= fisher_bound + FISHER_SLACK * fisher_bound.abs();
        let sobolev_finite = fr.weight_integral.is_finite() && fr.grad_norm_r.is_finite();
        let mut warnings = fr.warnings.clone();
        if let Some(w) = &kk.warning {
            warnings.push(w.to_string());
        }
        rows.push(ValidationRow {
            t: *t,
            window,
            sup_wp,
            kernel_envelope: env,
            ratio_p: sup_wp / env,
            sup_wgrad,
            k,
            ratio_grad: sup_wgrad / k,
            decay_scaled_grad,
            decay_slope,
            functionals: fr,
            fisher_bound,
            fisher_pass,
            sobolev_finite,
            warnings,
        });
    }

    let c_cal = match vcfg.calibration.as_str() {
        "one-point" => {
            let row = rows
                .iter()
                .find(|r| (r.t - vcfg.calibration_t).abs() < 1e-12)
                .ok_or_else(|| Error::Config(format!("calibration time {} is not in the sweep", vcfg.calibration_t)))?;
            row.ratio_p.max(row.ratio_grad)
        }
        "fixed" => vcfg.c_cal,
        other => return Err(Error::Config(format!("validation.calibration = \"{other}\""))),
    };
    let envelope_pass = rows
        .iter()
        .all(|r| r.ratio_p / c_cal <= 1.0 + 1e-12 && r.ratio_grad / c_cal <= 1.0 + 1e-12);

    let lt: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
    let ls: Vec<f64> = rows
        .iter()
        .map(|r| (r.decay_scaled_grad / (1.0 - r.t.ln())).ln())
        .collect();
    let fitted_exponent = ols_slope(&lt, &ls);
    let envelope_exponent = PolynomialEnvelope::new(&params, shape).exponent_grad;
    let exponent_pass = fitted_exponent >= envelope_exponent - EXPONENT_MARGIN;
    let decay_pass = rows.iter().all(|r| r.decay_slope >= DECAY_FRACTION * params.eps);
    let fisher_pass = rows.iter().all(|r| r.fisher_pass);
    let sobolev_pass = rows.iter().all(|r| r.sobolev_finite);
    Ok(ValidationReport {
        mode,
        rows,
        c_cal,
        fitted_exponent,
        envelope_exponent,
        envelope_pass,
        exponent_pass,
        decay_pass,
        fisher_pass,
        sobolev_pass,
    })
}

/// One PDE-versus-Monte-Carlo comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossRow {
    pub quantity: String,
    pub t: f64,
    pub pde: f64,
    pub mc: MCEstimate,
    /// PDE tolerance: change of the value between the grid and a
    /// half-resolution grid.
    pub tol: f64,
    /// `|pde − mc| / (3 se + tol)`
    pub score: f64,
    pub pass: bool,
}

/// `ξ_{W₁}` against its Lyapunov ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct CeilingRow {
    pub t: f64,
    pub pde: f64,
    pub mc: f64,
    pub mc_se: f64,
    pub ceiling: f64,
    pub pass_pde: bool,
    pub pass_mc: bool,
}

/// Relative slack allowed above the Lyapunov ceiling.
pub const CEILING_SLACK: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossReport {
    pub rows: Vec<CrossRow>,
    pub ceiling: Vec<CeilingRow>,
}

impl CrossReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.ceiling.iter().all(|c| c.pass_pde && c.pass_mc)
    }
}

type TestFn = Box<dyn Fn(f64) -> f64 + Sync>;

/// Unit-height bumps used as test functions.
pub fn bump_functions() -> Vec<(&'static str, TestFn)> {
    vec![
        ("bump(0,1)", Box::new(|y: f64| (-y * y).exp())),
        ("bump(0.5,0.5)", Box::new(|y: f64| (-(y - 0.5) * (y - 0.5) / 0.5).exp())),
        ("bump(-1,1)", Box::new(|y: f64| (-(y + 1.0) * (y + 1.0)).exp())),
    ]
}

fn integrate_against(field: &KernelField, t: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let p = field.at_time(t)?;
    let v: Vec<f64> = field.grid.coords.iter().zip(&p).map(|(y, p)| f(*y) * p).collect();
    Ok(trapezoid(&v, field.grid.h))
}

/// PDE versus Feynman–Kac for `T(t)f` on three bumps at the last
/// cross-check time, and for `ξ_{W₁}, ξ_{W₂}` at every cross-check time.
pub fn crosscheck(ctx: &Context) -> Result<CrossReport> {
    let times = ctx.config.validation.crosscheck_times.clone();
    let t_end = times.iter().copied().fold(0.0, f64::max);
    if times.is_empty() || t_end <= 0.0 {
        return Err(Error::Config("validation.crosscheck_times is empty".into()));
    }
    let fam = ctx.weights()?;
    let fine = ctx.solve(t_end)?;
    let coarse = {
        let mut c = ctx.clone();
        c.config.solver.nodes = ctx.config.solver.nodes.div_ceil(2) | 1;
        c.config.solver.dt = 2.0 * ctx.config.solver.dt;
        c.solve(t_end)?
    };
    let mc_cfg = ctx.config.mc.to_mc(fine.grid.radius);
    let bumps = bump_functions();
    let lgrid = LineGrid {
        radius: fine.grid.radius,
        nodes: 4001,
    };
    let mut rows = Vec::new();
    let mut ceiling = Vec::new();
    let mut push = |quantity: String, t: f64, pde: f64, pde_coarse: f64, mc: MCEstimate| {
        let tol = (pde - pde_coarse).abs();
        let score = (pde - mc.mean).abs() / (3.0 * mc.se + tol);
        rows.push(CrossRow {
            quantity,
            t,
            pde,
            tol,
            score,
            pass: score <= 1.0,
            mc,
        });
    };
    for &t in &times {
        let w1 = move |y: f64| fam.w1.value_1d(t, y);
        let w2 = move |y: f64| fam.w2.value_1d(t, y);
        let last = (t - t_end).abs() < 1e-12;
        let mut fs: Vec<&(dyn Fn(f64) -> f64 + Sync)> = vec![&w1, &w2];
        if last {
            fs.extend(bumps.iter().map(|(_, f)| f.as_ref() as &(dyn Fn(f64) -> f64 + Sync)));
        }
        let est = estimate_many(&ctx.spec, 0.0, t, &fs, &mc_cfg)?;
        let xi1 = xi(&fine, &fam.w1, t)?;
        let xi2 = xi(&fine, &fam.w2, t)?;
        push("xi_W1".into(), t, xi1, xi(&coarse, &fam.w1, t)?, est[0].clone());
        push("xi_W2".into(), t, xi2, xi(&coarse, &fam.w2, t)?, est[1].clone());
        if last {
            for (k, (name, f)) in bumps.iter().enumerate() {
                let v = integrate_against(&fine, t, f.as_ref())?;
                let vc = integrate_against(&coarse, t, f.as_ref())?;
                push(format!("T(t){name}"), t, v, vc, est[2 + k].clone());
            }
        }
        let bound = check_lyapunov(&ctx.spec, &fam.w1, &lgrid, t)?.integral.exp() * fam.w1.value_1d(0.0, 0.0);
        let cap = bound * (1.0 + CEILING_SLACK);
        ceiling.push(CeilingRow {
            t,
            pde: xi1,
            mc: est[0].mean,
            mc_se: est[0].se,
            ceiling: bound,
            pass_pde: xi1 <= cap,
            pass_mc: est[0].mean - 3.0 * est[0].se <= cap,
        });
    }
    Ok(CrossReport { rows, ceiling })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRow {
    pub n: f64,
    pub distance: f64,
    pub k_n: f64,
    pub k_finite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub window: Window,
    pub rows: Vec<ApproxRow>,
    /// Rounding allowance for the monotonicity check.
    pub noise_floor: f64,
    pub monotone: bool,
    pub final_distance: f64,
    pub far_level: f64,
    /// `p_n == p` node by node for the far level.
    pub far_identical: bool,
}

/// Final distance required of the sweep.
pub const APPROX_TARGET: f64 = 1e-6;

impl ApproxReport {
    pub fn pass(&self) -> bool {
        self.monotone
            && self.final_distance < APPROX_TARGET
            && self.far_identical
            && self.rows.iter().all(|r| r.k_finite)
    }
}

/// Cutoff sweep at the calibration window.
pub fn approx(ctx: &Context, mode: Mode) -> Result<ApproxReport> {
    let params = *ctx.params()?;
    let t = ctx.config.validation.calibration_t;
    let window = choose_window(t)?;
    let report = check_hypotheses(&ctx.spec, &params, &window, &ctx.hypothesis_grid())?;
    let base_set = constants_from(&report, mode, params.k)?;
    let set_n = approx_constant_update(&base_set, ctx.spec.dim);
    let wparams = params.for_window_end(window.b0);
    let fam = WeightFamily::for_shape(&wparams, ctx.spec.shape_exponents());
    let mut levels = ctx.config.approx.levels.clone();
    levels.push(ctx.config.approx.far_level);
    let grid = ctx.grid()?;
    let opts = ctx.config.solver.options()?;
    let sweep = solve_approximated(
        &ctx.spec,
        &levels,
        params.t0,
        Arc::new(fam.w1),
        0.0,
        window.b0,
        &grid,
        ctx.config.solver.dt,
        &opts,
        Some(Region {
            t_min: window.a0,
            t_max: window.b0,
            y_max: grid.radius,
        }),
    )?;
    let pmax = sweep.base.values.iter().flatten().copied().fold(0.0, f64::max);
    let noise_floor = 1e-12 * pmax;
    let mut rows = Vec::new();
    for (i, &n) in levels.iter().enumerate() {
        let fr = functionals(&sweep.fields[i], &fam, &window, ctx.config.validation.r)?;
        let k = gradient_envelope_k(&set_n, &fr.envelope_inputs(1.0))?.value;
        let k_n = k.to_f64();
        rows.push(ApproxRow {
            n,
            distance: sweep.distances[i],
            k_n,
            k_finite: k_n.is_finite() && k_n > 0.0,
        });
    }
    let swept = &rows[..rows.len() - 1];
    let monotone = swept.windows(2).all(|w| w[1].distance <= w[0].distance + noise_floor);
    let final_distance = swept.last().map_or(f64::NAN, |r| r.distance);
    let far = sweep.fields.last().unwrap();
    let far_identical = far.values.len() == sweep.base.values.len()
        && far
            .values
            .iter()
            .zip(&sweep.base.values)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    Ok(ApproxReport {
        window,
        rows,
        noise_floor,
        monotone,
        final_distance,
        far_level: ctx.config.approx.far_level,
        far_identical,
    })
}
