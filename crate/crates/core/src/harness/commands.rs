use std::fs;
use std::path::{Path, PathBuf};

use crate::bounds::{choose_window, gradient_envelope_k, kernel_envelope, A2Variant, ConstantSet, EnvelopeInputs, LogScalar};
use crate::error::{Error, Result};
use crate::lyapunov::check_hypotheses;
use crate::solver::functionals;

use super::config::RunConfig;
use super::report::{Cell, Table};
use super::run::{approx, certify, constants_from, crosscheck, validate, Context, Mode};
use super::ExitCode;

/// Everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: PathBuf,
    pub mode: Mode,
    pub dry_run: bool,
}

impl Invocation {
    pub fn new(config: RunConfig, out: Option<PathBuf>, mode: Mode, dry_run: bool) -> Self {
        let out = out.unwrap_or_else(|| config.output.dir.clone());
        Self {
            config,
            out,
            mode,
            dry_run,
        }
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }

    fn write(&self, table: &Table, name: &str, files: &mut Vec<PathBuf>) -> Result<()> {
        let p = self.path(name)?;
        table.write_file(&p, &self.config.hash())?;
        files.push(p);
        Ok(())
    }
}

/// Result of a subcommand: exit code, files written and summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: ExitCode,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(exit: ExitCode, files: Vec<PathBuf>, summary: Vec<String>) -> Self {
        Self { exit, files, summary }
    }

    fn dry(what: &str) -> Self {
        Self::new(ExitCode::Success, vec![], vec![format!("dry run: {what}")])
    }
}

fn ratio_row(t: &mut Table, tw: f64, id: &str, measured: f64, clamped: f64, refined: f64, cf: f64, stable: bool, pass: bool) {
    t.push(vec![
        tw.into(),
        id.into(),
        measured.into(),
        clamped.into(),
        refined.into(),
        cf.into(),
        stable.into(),
        pass.into(),
    ]);
}

/// Certifies every window of the sweep; writes `hypotheses.csv` and
/// `lyapunov.csv`.
pub fn cmd_check(inv: &Invocation) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    ctx.params()?;
    if inv.dry_run {
        return Ok(Outcome::dry(&format!("certify windows {:?}", ctx.config.validation.t_sweep)));
    }
    let reports = certify(&ctx)?;
    let mut hyp = Table::new(&["t", "id", "measured", "clamped", "refined", "closed_form", "stable", "pass"]);
    let mut lya = Table::new(&["t_window", "weight", "t", "h_bar", "h_bar_eta"]);
    let mut all = true;
    let mut finite = true;
    let mut summary = Vec::new();
    for (t, r) in &reports {
        for c in r.conditions.iter().chain(std::iter::once(&r.sigma_condition)) {
            ratio_row(&mut hyp, *t, &c.id, c.measured, c.clamped(), c.refined, c.closed_form, c.stable, c.pass);
            finite &= c.measured.is_finite();
        }
        for f in r.boundedness.iter().chain(&r.near_origin).chain(&r.integrability) {
            ratio_row(&mut hyp, *t, &f.id, f.value, f.value, f.value, f64::NAN, true, f.pass);
            finite &= f.value.is_finite();
        }
        for (name, s) in &r.stationary {
            ratio_row(&mut hyp, *t, &format!("stationary {name}"), s.m_full, s.m_full, s.m_eta, f64::NAN, true, s.pass);
        }
        for (name, l) in &r.lyapunov {
            ratio_row(
                &mut hyp,
                *t,
                &format!("lyapunov {name}"),
                l.integral,
                l.integral,
                l.integral_eta,
                f64::NAN,
                l.pass_full && l.pass_eta,
                l.pass_full && l.pass_eta,
            );
            for (i, s) in l.times.iter().enumerate() {
                lya.push(vec![(*t).into(), name.as_str().into(), (*s).into(), l.h_bar[i].into(), l.h_bar_eta[i].into()]);
            }
        }
        all &= r.all_pass();
        summary.push(format!("window t = {t}: {}", if r.all_pass() { "all conditions pass" } else { "FAIL" }));
    }
    let mut files = Vec::new();
    inv.write(&hyp, "hypotheses.csv", &mut files)?;
    inv.write(&lya, "lyapunov.csv", &mut files)?;
    let exit = if !finite {
        ExitCode::NonFinite
    } else if all {
        ExitCode::Success
    } else {
        ExitCode::HypothesisFail
    };
    Ok(Outcome::new(exit, files, summary))
}

const FUNCTIONAL_COLUMNS: [&str; 19] = [
    "t", "a0", "a", "a1", "b1", "b", "b0", "sup_xi1", "sup_xi2", "xi1", "xi2", "e2", "e_b", "fisher",
    "drift_potential", "r", "grad_norm_r", "weight_integral", "max_quadrature_error",
];

/// Solves once up to the largest window end; writes `kernel.csv` (profiles
/// at the sweep times), `functionals.csv` and `solve.csv`.
pub fn cmd_solve(inv: &Invocation) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    let t_end = ctx.sweep_end()?;
    let grid = ctx.grid()?;
    if inv.dry_run {
        return Ok(Outcome::dry(&format!(
            "solve to t = {t_end} on R = {}, N = {}, dt = {}",
            grid.radius, grid.nodes, ctx.config.solver.dt
        )));
    }
    let field = ctx.solve(t_end)?;
    let mut files = Vec::new();

    let kernel_path = inv.path("kernel.csv")?;
    {
        let f = fs::File::create(&kernel_path)?;
        let mut w = std::io::BufWriter::new(f);
        field.subset(&ctx.config.validation.t_sweep)?.write_csv(&mut w)?;
        use std::io::Write;
        writeln!(w, "# config-hash={}", ctx.config.hash())?;
    }
    files.push(kernel_path);

    let mut ft = Table::new(&FUNCTIONAL_COLUMNS);
    let mut summary = Vec::new();
    for &t in &ctx.config.validation.t_sweep {
        let window = choose_window(t)?;
        let wparams = ctx.params()?.for_window_end(window.b0);
        let fam = crate::lyapunov::WeightFamily::for_shape(&wparams, ctx.spec.shape_exponents());
        let fr = functionals(&field, &fam, &window, ctx.config.validation.r)?;
        let qerr = fr.error_estimates.iter().map(|e| e.1).fold(0.0, f64::max);
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(window.as_array().iter().map(|v| Cell::from(*v)));
        row.extend([
            fr.sup_xi1, fr.sup_xi2, fr.big_xi1, fr.big_xi2, fr.e2, fr.e_b, fr.fisher, fr.drift_potential, fr.r,
            fr.grad_norm_r, fr.weight_integral, qerr,
        ]
        .map(Cell::from));
        ft.push(row);
        summary.extend(fr.warnings.iter().map(|w| format!("t = {t}: {w}")));
    }
    inv.write(&ft, "functionals.csv", &mut files)?;

    let m = &field.meta;
    let mut meta = Table::new(&["name", "value"]);
    for (k, v) in [
        ("radius", field.grid.radius),
        ("nodes", field.grid.nodes as f64),
        ("dt", m.dt),
        ("theta", m.theta),
        ("t_init", m.t_init),
        ("min_before_clamp", m.min_before_clamp),
        ("boundary_loss", m.boundary_loss),
        ("final_mass", field.mass(field.times.len() - 1)),
    ] {
        meta.push(vec![k.into(), v.into()]);
    }
    meta.push(vec!["fell_back".into(), m.fell_back.to_string().into()]);
    inv.write(&meta, "solve.csv", &mut files)?;
    summary.push(format!("solved to t = {t_end}; theta = {}; min before clamp = {:e}", m.theta, m.min_before_clamp));
    Ok(Outcome::new(ExitCode::Success, files, summary))
}

/// Envelope inputs for the window around `t` from a prior `functionals.csv`.
pub fn read_envelope_inputs(dir: &Path, t: f64) -> Result<EnvelopeInputs> {
    let table = Table::read_file(&dir.join("functionals.csv"))?;
    let col = |n: &str| table.column(n);
    let (ct, cs, c1, c2, ce2, ceb, cf) = (
        col("t")?,
        col("sup_xi1")?,
        col("xi1")?,
        col("xi2")?,
        col("e2")?,
        col("e_b")?,
        col("fisher")?,
    );
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Io(format!("bad number {s}: {e}")));
    for row in &table.rows {
        if (num(&row[ct])? - t).abs() < 1e-12 {
            return Ok(EnvelopeInputs {
                sup_xi1: num(&row[cs])?,
                xi1: num(&row[c1])?,
                xi2: num(&row[c2])?,
                e2: num(&row[ce2])?,
                e_b: num(&row[ceb])?,
                fisher: num(&row[cf])?,
                c_cal: 1.0,
            });
        }
    }
    Err(Error::MissingArtifact(format!("functionals for t = {t} in {}", dir.display())))
}

fn push_named(t: &mut Table, name: &str, v: LogScalar) {
    t.push(vec![name.into(), v.to_f64().into(), v.log10_abs().into()]);
}

/// Writes `constants.csv` for the window around `t`.
pub fn cmd_constants(inv: &Invocation, t: f64) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    let params = *ctx.params()?;
    let window = choose_window(t)?;
    let mut table = Table::new(&["name", "value", "log10"]);
    for (n, v) in ["a0", "a", "a1", "b1", "b", "b0"].iter().zip(window.as_array()) {
        table.push(vec![format!("window.{n}").into(), v.into(), v.log10().into()]);
    }
    let (set, inputs) = if inv.dry_run {
        (ConstantSet::new([1.0; 12], params.k, window.gaps(), true)?, EnvelopeInputs::unit())
    } else {
        let inputs = read_envelope_inputs(&inv.out, t)?;
        let report = check_hypotheses(&ctx.spec, &params, &window, &ctx.hypothesis_grid())?;
        for c in &report.conditions {
            table.push(vec![format!("{}.measured", c.id).into(), c.measured.into(), c.measured.log10().into()]);
            table.push(vec![
                format!("{}.closed_form", c.id).into(),
                c.closed_form.into(),
                c.closed_form.log10().into(),
            ]);
        }
        (constants_from(&report, inv.mode, params.k)?, inputs)
    };
    for (i, c) in set.c.iter().enumerate() {
        table.push(vec![format!("c{}", i + 1).into(), (*c).into(), c.log10().into()]);
    }
    for (n, v) in set.derived.named() {
        push_named(&mut table, n, v);
    }
    let env = kernel_envelope(&set, &inputs, A2Variant::Tilde)?;
    push_named(&mut table, "kernel_envelope", env);
    let k = gradient_envelope_k(&set, &inputs)?;
    for (i, g) in k.groups.iter().enumerate() {
        push_named(&mut table, &format!("K.group{}", i + 1), *g);
    }
    push_named(&mut table, "K", k.value);
    let mut files = Vec::new();
    inv.write(&table, "constants.csv", &mut files)?;
    let mut summary = vec![format!(
        "window ({}) in {} mode: K = {:.6e}",
        window.as_array().map(|v| v.to_string()).join(", "),
        if inv.dry_run { "placeholder" } else { inv.mode.as_str() },
        k.value.to_f64()
    )];
    if let Some(w) = k.warning {
        summary.push(w.to_string());
    }
    let exit = if k.value.ln_abs().is_finite() || k.value.is_zero() {
        ExitCode::Success
    } else {
        ExitCode::NonFinite
    };
    Ok(Outcome::new(exit, files, summary))
}

/// Writes `validation.csv` and `validation_summary.csv`.
pub fn cmd_validate(inv: &Invocation) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    if inv.dry_run {
        return Ok(Outcome::dry(&format!("validate over {:?}", ctx.config.validation.t_sweep)));
    }
    let rep = validate(&ctx, inv.mode)?;
    let mut table = Table::new(&[
        "t",
        "sup_wp",
        "kernel_envelope",
        "ratio_p",
        "calibrated_ratio_p",
        "sup_wgrad",
        "K",
        "ratio_grad",
        "calibrated_ratio_grad",
        "decay_slope",
        "fisher",
        "fisher_bound",
        "fisher_pass",
        "grad_norm_r",
        "weight_integral",
        "sobolev_finite",
    ]);
    for r in &rep.rows {
        table.push(vec![
            r.t.into(),
            r.sup_wp.into(),
            r.kernel_envelope.into(),
            r.ratio_p.into(),
            (r.ratio_p / rep.c_cal).into(),
            r.sup_wgrad.into(),
            r.k.into(),
            r.ratio_grad.into(),
            (r.ratio_grad / rep.c_cal).into(),
            r.decay_slope.into(),
            r.functionals.fisher.into(),
            r.fisher_bound.into(),
            r.fisher_pass.into(),
            r.functionals.grad_norm_r.into(),
            r.functionals.weight_integral.into(),
            r.sobolev_finite.into(),
        ]);
    }
    let mut sum = Table::new(&["name", "value", "pass"]);
    sum.push(vec!["c_cal".into(), rep.c_cal.into(), rep.envelope_pass.into()]);
    sum.push(vec!["fitted_exponent".into(), rep.fitted_exponent.into(), rep.exponent_pass.into()]);
    sum.push(vec!["envelope_exponent".into(), rep.envelope_exponent.into(), rep.exponent_pass.into()]);
    sum.push(vec![
        "exponent_gap".into(),
        (rep.fitted_exponent - rep.envelope_exponent).into(),
        rep.exponent_pass.into(),
    ]);
    let min_slope = rep.rows.iter().map(|r| r.decay_slope).fold(f64::INFINITY, f64::min);
    sum.push(vec!["min_decay_slope".into(), min_slope.into(), rep.decay_pass.into()]);
    sum.push(vec!["p_in_W01_r".into(), ctx.config.validation.r.into(), rep.sobolev_pass.into()]);
    let mut files = Vec::new();
    inv.write(&table, "validation.csv", &mut files)?;
    inv.write(&sum, "validation_summary.csv", &mut files)?;
    let summary = vec![format!(
        "c_cal = {:e}; fitted exponent {:.4} vs envelope {:.4}; {}",
        rep.c_cal,
        rep.fitted_exponent,
        rep.envelope_exponent,
        if rep.pass() { "pass" } else { "FAIL" }
    )];
    let exit = if rep.pass() { ExitCode::Success } else { ExitCode::ValidationFail };
    Ok(Outcome::new(exit, files, summary))
}

/// Writes `crosscheck.csv` and `ceiling.csv`.
pub fn cmd_crosscheck(inv: &Invocation) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    if inv.dry_run {
        return Ok(Outcome::dry(&format!(
            "cross-check at {:?} with {} paths",
            ctx.config.validation.crosscheck_times, ctx.config.mc.paths
        )));
    }
    let rep = crosscheck(&ctx)?;
    let mut table = Table::new(&["quantity", "t", "pde", "mc_mean", "mc_se", "tol", "score", "pass"]);
    for r in &rep.rows {
        table.push(vec![
            r.quantity.as_str().into(),
            r.t.into(),
            r.pde.into(),
            r.mc.mean.into(),
            r.mc.se.into(),
            r.tol.into(),
            r.score.into(),
            r.pass.into(),
        ]);
    }
    let mut ceil = Table::new(&["t", "xi_w1_pde", "xi_w1_mc", "mc_se", "ceiling", "pass_pde", "pass_mc"]);
    for c in &rep.ceiling {
        ceil.push(vec![
            c.t.into(),
            c.pde.into(),
            c.mc.into(),
            c.mc_se.into(),
            c.ceiling.into(),
            c.pass_pde.into(),
            c.pass_mc.into(),
        ]);
    }
    let mut files = Vec::new();
    inv.write(&table, "crosscheck.csv", &mut files)?;
    inv.write(&ceil, "ceiling.csv", &mut files)?;
    let worst = rep.rows.iter().map(|r| r.score).fold(0.0, f64::max);
    let summary = vec![format!("worst score {worst:.3}; {}", if rep.pass() { "pass" } else { "FAIL" })];
    let exit = if rep.pass() { ExitCode::Success } else { ExitCode::CrossCheckFail };
    Ok(Outcome::new(exit, files, summary))
}

/// Writes `approx.csv`.
pub fn cmd_approx(inv: &Invocation) -> Result<Outcome> {
    let ctx = Context::new(inv.config.clone())?;
    if inv.dry_run {
        return Ok(Outcome::dry(&format!("cutoff sweep over {:?}", ctx.config.approx.levels)));
    }
    let rep = approx(&ctx, inv.mode)?;
    let mut table = Table::new(&["n", "sup_distance", "K_n", "K_n_finite"]);
    for r in &rep.rows {
        table.push(vec![r.n.into(), r.distance.into(), r.k_n.into(), r.k_finite.into()]);
    }
    let mut files = Vec::new();
    inv.write(&table, "approx.csv", &mut files)?;
    let summary = vec![format!(
        "final distance {:e}; monotone {}; far level identical {}",
        rep.final_distance, rep.monotone, rep.far_identical
    )];
    let exit = if rep.pass() { ExitCode::Success } else { ExitCode::ApproxFail };
    Ok(Outcome::new(exit, files, summary))
}
