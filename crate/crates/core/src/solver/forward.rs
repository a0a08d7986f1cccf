use std::io::Write;

use crate::coefficients::{Fields1d, OperatorSpec};
use crate::error::{Error, Result};

use super::tridiag::Tridiagonal;

/// Uniform one-dimensional grid on `[−R, R]` with an odd node count.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub radius: f64,
    pub nodes: usize,
    pub h: f64,
    pub coords: Vec<f64>,
}

impl Grid {
    pub fn new(radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("grid radius must be positive, got {radius}")));
        }
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::Domain(format!("node count must be odd and ≥ 5, got {nodes}")));
        }
        let h = 2.0 * radius / (nodes - 1) as f64;
        let mid = (nodes - 1) / 2;
        // symmetric construction keeps y_j = −y_{N−1−j} exactly
        let coords = (0..nodes)
            .map(|j| (j as f64 - mid as f64) * h)
            .collect();
        Ok(Self { radius, nodes, h, coords })
    }

    /// Index of the node at `x`, if `x` is a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let j = ((x + self.radius) / self.h).round();
        if j < 0.0 || j >= self.nodes as f64 {
            return None;
        }
        let j = j as usize;
        ((self.coords[j] - x).abs() <= 1e-9 * self.h).then_some(j)
    }
}

/// Discretization of the drift part of the face flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftFlux {
    /// Exponentially fitted (Scharfetter–Gummel / Chang–Cooper) flux;
    /// reduces to upwinding for large cell Péclet numbers and to central
    /// differencing for small ones.
    #[default]
    Fitted,
    /// First-order donor-cell upwinding.
    Upwind,
}

/// Options of the forward solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Implicitness of the θ-scheme (`1/2` is Crank–Nicolson).
    pub theta: f64,
    pub flux: DriftFlux,
    /// Store every `stride`-th step.
    pub snapshot_stride: usize,
    /// Start time of the parametrix; default `min(1e−4, 10 dt)`.
    pub t_init: Option<f64>,
    /// Maximum boundary mass loss tolerated when `V ≡ 0`.
    pub truncation_tolerance: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta: 0.5,
            flux: DriftFlux::Fitted,
            snapshot_stride: 10,
            t_init: None,
            truncation_tolerance: Some(1e-8),
        }
    }
}

/// How the solve went.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMeta {
    pub dt: f64,
    pub theta: f64,
    /// True when `θ = 1/2` produced negatives and the solve was redone
    /// with `θ = 1`.
    pub fell_back: bool,
    pub flux: DriftFlux,
    pub boundary: &'static str,
    pub t_init: f64,
    /// Most negative node value seen before clamping.
    pub min_before_clamp: f64,
    /// Mass that left through `±R`.
    pub boundary_loss: f64,
}

/// `p(t, x, ·)` on a grid at stored times.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub x: f64,
    pub grid: Grid,
    pub times: Vec<f64>,
    /// `values[i][j] = p(times[i], x, y_j)`, clamped at 0.
    pub values: Vec<Vec<f64>>,
    /// Coefficients at the nodes.
    pub coeffs: Vec<Fields1d>,
    pub meta: SchemeMeta,
}

impl KernelField {
    /// Index of the stored time closest to `t` (within `1e−9`).
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t - 1e-9);
        (i < self.times.len() && (self.times[i] - t).abs() <= 1e-9).then_some(i)
    }

    /// Profile at `t`, linearly interpolated between stored times.
    pub fn at_time(&self, t: f64) -> Result<Vec<f64>> {
        if let Some(i) = self.time_index(t) {
            return Ok(self.values[i].clone());
        }
        let first = self.times[0];
        let last = *self.times.last().unwrap();
        if t < first || t > last {
            return Err(Error::Domain(format!("t = {t} outside the solved range [{first}, {last}]")));
        }
        let i = self.times.partition_point(|&s| s < t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let s = (t - t0) / (t1 - t0);
        Ok(self.values[i - 1]
            .iter()
            .zip(&self.values[i])
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect())
    }

    /// `∫ p dy` at stored time `i` (trapezoid).
    pub fn mass(&self, i: usize) -> f64 {
        trapezoid(&self.values[i], self.grid.h)
    }

    /// The field restricted to `times` (interpolated where needed).
    pub fn subset(&self, times: &[f64]) -> Result<KernelField> {
        let values = times.iter().map(|&t| self.at_time(t)).collect::<Result<Vec<_>>>()?;
        Ok(KernelField {
            x: self.x,
            grid: self.grid.clone(),
            times: times.to_vec(),
            values,
            coeffs: self.coeffs.clone(),
            meta: self.meta.clone(),
        })
    }

    /// Writes `t,y,p,grad_p` rows, time-major, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,y,p,grad_p")?;
        let grads = super::gradient(self);
        for (i, t) in self.times.iter().enumerate() {
            for j in 0..self.grid.nodes {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    t, self.grid.coords[j], self.values[i][j], grads[i][j]
                )?;
            }
        }
        Ok(())
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    h * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// `B(x) = x / (eˣ − 1)`.
#[inline]
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Spatial operator `L p = ∂_y(q ∂_y p − F p) − V p` as three bands.
struct Bands {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Coefficient of `p₁` in the face flux at `−R + h/2` (outward loss)
    /// and of `p_{N−2}` at `R − h/2`.
    left_out: f64,
    right_out: f64,
}

fn assemble(spec: &OperatorSpec, grid: &Grid, flux: DriftFlux) -> (Bands, Vec<Fields1d>) {
    let n = grid.nodes;
    let h = grid.h;
    let nodes: Vec<Fields1d> = grid.coords.iter().map(|&y| spec.eval_1d(y)).collect();
    // face j sits between nodes j and j+1; G_face = ap·p_{j+1} − am·p_j
    let mut ap = vec![0.0; n - 1];
    let mut am = vec![0.0; n - 1];
    for j in 0..n - 1 {
        let yf = 0.5 * (grid.coords[j] + grid.coords[j + 1]);
        let f = spec.eval_1d(yf);
        match flux {
            DriftFlux::Fitted => {
                let pe = f.f * h / f.q;
                ap[j] = f.q / h * bernoulli(pe);
                am[j] = f.q / h * bernoulli(-pe);
            }
            DriftFlux::Upwind => {
                ap[j] = f.q / h + (-f.f).max(0.0);
                am[j] = f.q / h + f.f.max(0.0);
            }
        }
    }
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for j in 1..n - 1 {
        lower[j] = am[j - 1] / h;
        upper[j] = ap[j] / h;
        diag[j] = -(am[j] + ap[j - 1]) / h - nodes[j].v;
    }
    let bands = Bands {
        lower,
        diag,
        upper,
        left_out: ap[0],
        right_out: am[n - 2],
    };
    (bands, nodes)
}

/// One θ-step operator: `(I − θ dt L) p⁺ = (I + (1−θ) dt L) p`.
struct Stepper {
    solve: Tridiagonal,
    /// Explicit part bands.
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
}

impl Stepper {
    fn new(b: &Bands, dt: f64, theta: f64) -> Self {
        let n = b.diag.len();
        // interior unknowns 1..n−1
        let m = n - 2;
        let mut l = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut u = vec![0.0; m];
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        let e = 1.0 - theta;
        for i in 0..m {
            let j = i + 1;
            l[i] = -theta * dt * b.lower[j];
            d[i] = 1.0 - theta * dt * b.diag[j];
            u[i] = -theta * dt * b.upper[j];
            lo[i] = e * dt * b.lower[j];
            di[i] = 1.0 + e * dt * b.diag[j];
            up[i] = e * dt * b.upper[j];
        }
        Self {
            solve: Tridiagonal::factor(&l, &d, &u),
            lo,
            di,
            up,
        }
    }

    /// Advances the interior values `p[1..n−1]`; boundary nodes stay 0.
    fn step(&self, p: &mut [f64], work: &mut [f64]) {
        let m = p.len() - 2;
        for i in 0..m {
            let j = i + 1;
            work[i] = self.lo[i] * p[j - 1] + self.di[i] * p[j] + self.up[i] * p[j + 1];
        }
        self.solve.solve_in_place(&mut work[..m]);
        p[1..=m].copy_from_slice(&work[..m]);
    }
}

/// Solves the forward equation `∂_t p = ∂_y(q ∂_y p − F p) − V p` from a
/// point source at `x` on `[−R, R]` with zero Dirichlet data.
///
/// The source is replaced by the frozen-coefficient parametrix at
/// `t_init`; the θ-scheme falls back to `θ = 1` when negatives below
/// `−1e−12` appear.
pub fn solve_forward(
    spec: &OperatorSpec,
    x: f64,
    t_end: f64,
    grid: &Grid,
    dt: f64,
    opts: &SolverOptions,
) -> Result<KernelField> {
    if spec.dim != 1 {
        return Err(Error::Domain(format!("the solver is one-dimensional, spec has d = {}", spec.dim)));
    }
    if !(dt > 0.0 && dt <= grid.h) {
        return Err(Error::Stability(format!("need 0 < dt ≤ h (dt = {dt}, h = {})", grid.h)));
    }
    if !(opts.theta >= 0.5 && opts.theta <= 1.0) {
        return Err(Error::Domain(format!("θ must lie in [1/2, 1], got {}", opts.theta)));
    }
    let src = grid
        .index_of(x)
        .ok_or_else(|| Error::Domain(format!("source x = {x} is not a grid node")))?;
    if src == 0 || src == grid.nodes - 1 {
        return Err(Error::Domain("source on the boundary".into()));
    }
    let t_init = opts.t_init.unwrap_or((10.0 * dt).min(1e-4));
    if !(t_init > 0.0 && t_init < t_end) {
        return Err(Error::Domain(format!("need 0 < t_init < t_end (t_init = {t_init}, t_end = {t_end})")));
    }
    let first = run(spec, src, t_init, t_end, grid, dt, opts, opts.theta);
    match first {
        Err(Error::Stability(_)) if opts.theta < 1.0 => {
            let mut field = run(spec, src, t_init, t_end, grid, dt, opts, 1.0)?;
            field.meta.fell_back = true;
            Ok(field)
        }
        other => other,
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    spec: &OperatorSpec,
    src: usize,
    t_init: f64,
    t_end: f64,
    grid: &Grid,
    dt: f64,
    opts: &SolverOptions,
    theta: f64,
) -> Result<KernelField> {
    let (bands, nodes) = assemble(spec, grid, opts.flux);
    let x = grid.coords[src];
    let at_x = nodes[src];
    let var = 4.0 * at_x.q * t_init;
    let scale = (std::f64::consts::PI * var).powf(-0.5) * (-at_x.v * t_init).exp();
    let mut p: Vec<f64> = grid
        .coords
        .iter()
        .map(|&y| scale * (-(y - x) * (y - x) / var).exp())
        .collect();
    let n = grid.nodes;
    p[0] = 0.0;
    p[n - 1] = 0.0;
    // an under-resolved Gaussian has the wrong discrete mass
    let mass = trapezoid(&p, grid.h);
    let target = (-at_x.v * t_init).exp();
    p.iter_mut().for_each(|v| *v *= target / mass);

    let stride = opts.snapshot_stride.max(1);
    let full = Stepper::new(&bands, dt, theta);
    let mut work = vec![0.0; n];
    let mut times = vec![t_init];
    let mut values = vec![p.clone()];
    let mut min_before_clamp = 0.0f64;
    let mut loss = 0.0;

    let flux_out = |p: &[f64]| bands.left_out * p[1] + bands.right_out * p[n - 2];
    let mut advance = |p: &mut Vec<f64>, stepper: &Stepper, h_t: f64| -> Result<()> {
        let before = flux_out(p);
        stepper.step(p, &mut work);
        loss += h_t * ((1.0 - theta) * before + theta * flux_out(p));
        let lo = p.iter().copied().fold(0.0, f64::min);
        min_before_clamp = min_before_clamp.min(lo);
        if lo < -1e-12 {
            return Err(Error::Stability(format!("node value {lo} with θ = {theta}")));
        }
        if !lo.is_finite() || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("solver state".into()));
        }
        Ok(())
    };

    // align to the lattice n·dt
    let mut step_idx = (t_init / dt - 1e-9).ceil() as u64;
    let lead = step_idx as f64 * dt - t_init;
    if lead > 1e-12 * dt {
        let partial = Stepper::new(&bands, lead, theta);
        advance(&mut p, &partial, lead)?;
    } else {
        step_idx = (t_init / dt).round() as u64;
    }
    let last_full = ((t_end / dt) + 1e-9).floor() as u64;
    while step_idx < last_full {
        advance(&mut p, &full, dt)?;
        step_idx += 1;
        if step_idx % stride as u64 == 0 || step_idx == last_full {
            times.push(step_idx as f64 * dt);
            values.push(p.iter().map(|v| v.max(0.0)).collect());
        }
    }
    let t_last = step_idx as f64 * dt;
    let tail = t_end - t_last;
    if tail > 1e-12 * dt {
        let partial = Stepper::new(&bands, tail, theta);
        advance(&mut p, &partial, tail)?;
        times.push(t_end);
        values.push(p.iter().map(|v| v.max(0.0)).collect());
    }

    if let Some(tol) = opts.truncation_tolerance {
        if loss > tol && spec.potential_free() {
            return Err(Error::Truncation(format!(
                "boundary mass loss {loss:e} exceeds {tol:e}; enlarge R"
            )));
        }
    }

    Ok(KernelField {
        x,
        grid: grid.clone(),
        times,
        values,
        coeffs: nodes,
        meta: SchemeMeta {
            dt,
            theta,
            fell_back: false,
            flux: opts.flux,
            boundary: "dirichlet",
            t_init,
            min_before_clamp,
            boundary_loss: loss,
        },
    })
}
