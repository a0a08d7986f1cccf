use crate::bounds::{EnvelopeInputs, Window};
use crate::error::{Error, Result};
use crate::lyapunov::{radial_integral, ExpRadialWeight, WeightFamily};

use super::forward::{trapezoid, KernelField};

/// Fourth-order central differences inside, one-sided second order at
/// the two outermost nodes on each side.
pub fn gradient_profile(p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    assert!(n >= 5, "gradient needs at least 5 nodes");
    let mut g = vec![0.0; n];
    for j in 2..n - 2 {
        g[j] = (p[j - 2] - p[j + 2] + 8.0 * (p[j + 1] - p[j - 1])) / (12.0 * h);
    }
    for j in [0, 1] {
        g[j] = (-3.0 * p[j] + 4.0 * p[j + 1] - p[j + 2]) / (2.0 * h);
    }
    for j in [n - 2, n - 1] {
        g[j] = (3.0 * p[j] - 4.0 * p[j - 1] + p[j - 2]) / (2.0 * h);
    }
    g
}

/// `∂_y p` at every stored time.
pub fn gradient(field: &KernelField) -> Vec<Vec<f64>> {
    field
        .values
        .iter()
        .map(|p| gradient_profile(p, field.grid.h))
        .collect()
}

/// `ξ_W(t, x) = ∫ p(t, x, y) W(t, y) dy` at a stored or interpolated time.
pub fn xi(field: &KernelField, weight: &ExpRadialWeight, t: f64) -> Result<f64> {
    let p = field.at_time(t)?;
    Ok(xi_profile(&p, &field.grid.coords, weight, t, field.grid.h))
}

fn xi_profile(p: &[f64], ys: &[f64], weight: &ExpRadialWeight, t: f64, h: f64) -> f64 {
    let v: Vec<f64> = p
        .iter()
        .zip(ys)
        .map(|(&p, &y)| {
            if p > 0.0 {
                (p.ln() + weight.log_value(t, &[y])).exp()
            } else {
                0.0
            }
        })
        .collect();
    trapezoid(&v, h)
}

/// Kernel functionals over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub window: Window,
    /// Quadrature times in `[a₀, b₀]` (window ends included).
    pub times: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    /// `Ξ_j = ∫_{a₀}^{b₀} ξ_{W_j} dt`
    pub big_xi1: f64,
    pub big_xi2: f64,
    /// `H_j = sup_{[a₀,b₀]} ξ_{W_j}`
    pub sup_xi1: f64,
    pub sup_xi2: f64,
    /// `∫∫_{Q(a,b)} |∇p|²/p`
    pub fisher: f64,
    /// `∫∫_{Q(a,b)} p log² p`
    pub e2: f64,
    /// `∫ p log p |_{t=a}^{t=b}`
    pub e_b: f64,
    /// `∫∫_{Q(a,b)} (|F|² + V²) p`
    pub drift_potential: f64,
    pub r: f64,
    /// `‖∇p‖_{L^r(Q(a,b))}`
    pub grad_norm_r: f64,
    /// `∫∫_{(a,b)×ℝ} w^{−r}`
    pub weight_integral: f64,
    /// Relative difference between the fine and the coarsened quadrature
    /// for each quantity.
    pub error_estimates: Vec<(&'static str, f64)>,
    pub warnings: Vec<String>,
}

impl FunctionalReport {
    pub fn envelope_inputs(&self, c_cal: f64) -> EnvelopeInputs {
        EnvelopeInputs {
            sup_xi1: self.sup_xi1,
            xi1: self.big_xi1,
            xi2: self.big_xi2,
            e2: self.e2,
            e_b: self.e_b,
            fisher: self.fisher,
            c_cal,
        }
    }

    /// Right side of the Fisher-information inequality,
    /// `(1/η²)∫∫(|F|²+V²)p + E₂ − (2/η) E_b`.
    pub fn fisher_bound(&self, eta: f64) -> f64 {
        self.drift_potential / (eta * eta) + self.e2 - 2.0 * self.e_b / eta
    }
}

struct Slice {
    t: f64,
    p: Vec<f64>,
    g: Vec<f64>,
}

/// Profiles at the stored times strictly inside `(lo, hi)` plus
/// interpolated profiles at both ends.
fn slices(field: &KernelField, grads: &[Vec<f64>], lo: f64, hi: f64) -> Result<Vec<Slice>> {
    let interp = |t: f64| -> Result<Slice> {
        let p = field.at_time(t)?;
        let g = if let Some(i) = field.time_index(t) {
            grads[i].clone()
        } else {
            gradient_profile(&p, field.grid.h)
        };
        Ok(Slice { t, p, g })
    };
    let mut out = vec![interp(lo)?];
    for (i, &t) in field.times.iter().enumerate() {
        if t > lo + 1e-9 && t < hi - 1e-9 {
            out.push(Slice {
                t,
                p: field.values[i].clone(),
                g: grads[i].clone(),
            });
        }
    }
    out.push(interp(hi)?);
    Ok(out)
}

fn trapezoid_t(ts: &[f64], v: &[f64]) -> f64 {
    ts.windows(2)
        .zip(v.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Every other node of a slice (the grid has an odd node count, so the
/// end nodes are kept).
fn coarsen(v: &[f64]) -> Vec<f64> {
    v.iter().step_by(2).copied().collect()
}

/// Time quadrature on every other node, keeping both ends.
fn coarse_times(ts: &[f64], v: &[f64]) -> f64 {
    let n = ts.len();
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    let t: Vec<f64> = idx.iter().map(|&i| ts[i]).collect();
    let w: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    trapezoid_t(&t, &w)
}

fn rel_diff(fine: f64, coarse: f64) -> f64 {
    let scale = fine.abs().max(coarse.abs());
    if scale == 0.0 {
        0.0
    } else {
        (fine - coarse).abs() / scale
    }
}

const QUAD_WARN: f64 = 0.01;

/// Evaluates every functional entering the bounds on `window`.
///
/// Log and ratio integrands are set to zero below the floor
/// `1e−30 · max p`.
pub fn functionals(field: &KernelField, weights: &WeightFamily, window: &Window, r: f64) -> Result<FunctionalReport> {
    let t_lo = field.times[0];
    let t_hi = *field.times.last().unwrap();
    if window.a0 < t_lo - 1e-9 || window.b0 > t_hi + 1e-9 {
        return Err(Error::Window(format!(
            "window [{}, {}] outside the solved range [{t_lo}, {t_hi}]",
            window.a0, window.b0
        )));
    }
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("Sobolev exponent r ≥ 1, got {r}")));
    }
    let h = field.grid.h;
    let ys = &field.grid.coords;
    let grads = gradient(field);
    let pmax = field.values.iter().flatten().copied().fold(0.0, f64::max);
    let floor = 1e-30 * pmax;
    let fq: Vec<f64> = field
        .coeffs
        .iter()
        .map(|c| c.f * c.f + c.v * c.v)
        .collect();

    // ξ over [a₀, b₀]
    let outer = slices(field, &grads, window.a0, window.b0)?;
    let ts: Vec<f64> = outer.iter().map(|s| s.t).collect();
    let xi_of = |w: &ExpRadialWeight, coarse: bool| -> Vec<f64> {
        outer
            .iter()
            .map(|s| {
                if coarse {
                    xi_profile(&coarsen(&s.p), &coarsen(ys), w, s.t, 2.0 * h)
                } else {
                    xi_profile(&s.p, ys, w, s.t, h)
                }
            })
            .collect()
    };
    let xi1 = xi_of(&weights.w1, false);
    let xi2 = xi_of(&weights.w2, false);
    let big_xi1 = trapezoid_t(&ts, &xi1);
    let big_xi2 = trapezoid_t(&ts, &xi2);
    let big_xi1_c = coarse_times(&ts, &xi_of(&weights.w1, true));
    let big_xi2_c = coarse_times(&ts, &xi_of(&weights.w2, true));
    let sup_xi1 = xi1.iter().copied().fold(0.0, f64::max);
    let sup_xi2 = xi2.iter().copied().fold(0.0, f64::max);

    // space-time integrals over [a, b]
    let inner = slices(field, &grads, window.a, window.b)?;
    let ti: Vec<f64> = inner.iter().map(|s| s.t).collect();
    type Integrand<'a> = Box<dyn Fn(f64, f64, usize) -> f64 + 'a>;
    let integrands: [(&'static str, Integrand); 4] = [
        ("fisher", Box::new(|p, g, _| if p < floor { 0.0 } else { g * g / p })),
        ("e2", Box::new(|p, _, _| if p < floor { 0.0 } else { p * p.ln().powi(2) })),
        ("drift_potential", Box::new(|p, _, j| fq[j] * p)),
        ("grad_r", Box::new(|_, g, _| g.abs().powf(r))),
    ];
    let mut fine = [0.0; 4];
    let mut coarse = [0.0; 4];
    for (k, (_, f)) in integrands.iter().enumerate() {
        let per_t: Vec<f64> = inner
            .iter()
            .map(|s| {
                let v: Vec<f64> = (0..s.p.len()).map(|j| f(s.p[j], s.g[j], j)).collect();
                trapezoid(&v, h)
            })
            .collect();
        let per_t_c: Vec<f64> = inner
            .iter()
            .map(|s| {
                let v: Vec<f64> = (0..s.p.len()).step_by(2).map(|j| f(s.p[j], s.g[j], j)).collect();
                trapezoid(&v, 2.0 * h)
            })
            .collect();
        fine[k] = trapezoid_t(&ti, &per_t);
        coarse[k] = coarse_times(&ti, &per_t_c);
    }

    let plogp = |p: &[f64], step: usize, hh: f64| -> f64 {
        let v: Vec<f64> = p
            .iter()
            .step_by(step)
            .map(|&p| if p < floor { 0.0 } else { p * p.ln() })
            .collect();
        trapezoid(&v, hh)
    };
    let first = &inner[0];
    let last = inner.last().unwrap();
    let e_b = plogp(&last.p, 1, h) - plogp(&first.p, 1, h);
    let e_b_c = plogp(&last.p, 2, 2.0 * h) - plogp(&first.p, 2, 2.0 * h);

    let wp = &weights.params;
    let wint_at = |t: f64| radial_integral(r * wp.eps * t.powf(wp.alpha), wp.beta, 1);
    let wts: Vec<f64> = ti.iter().map(|&t| wint_at(t)).collect();
    let weight_integral = trapezoid_t(&ti, &wts);
    let weight_integral_c = coarse_times(&ti, &wts);

    let error_estimates = vec![
        ("xi1", rel_diff(big_xi1, big_xi1_c)),
        ("xi2", rel_diff(big_xi2, big_xi2_c)),
        ("fisher", rel_diff(fine[0], coarse[0])),
        ("e2", rel_diff(fine[1], coarse[1])),
        ("e_b", rel_diff(e_b, e_b_c)),
        ("drift_potential", rel_diff(fine[2], coarse[2])),
        ("grad_norm_r", rel_diff(fine[3], coarse[3])),
        ("weight_integral", rel_diff(weight_integral, weight_integral_c)),
    ];
    let warnings = error_estimates
        .iter()
        .filter(|(_, e)| *e > QUAD_WARN)
        .map(|(n, e)| format!("quadrature: {n} changes by {:.2}% under coarsening", 100.0 * e))
        .collect();

    Ok(FunctionalReport {
        window: *window,
        times: ts,
        xi1,
        xi2,
        big_xi1,
        big_xi2,
        sup_xi1,
        sup_xi2,
        fisher: fine[0],
        e2: fine[1],
        e_b,
        drift_potential: fine[2],
        r,
        grad_norm_r: fine[3].powf(1.0 / r),
        weight_integral,
        error_estimates,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::choose_window;
    use crate::coefficients::{validate_polynomial_params, OperatorSpec};
    use crate::lyapunov::{default_params, ParamOverrides};
    use crate::solver::{solve_forward, Grid, SolverOptions};
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_gradient() {
        let g = Grid::new(8.0, 4001).unwrap();
        let t = 0.25;
        let p: Vec<f64> = g
            .coords
            .iter()
            .map(|y| (-y * y / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt())
            .collect();
        let d = gradient_profile(&p, g.h);
        for (j, &y) in g.coords.iter().enumerate() {
            if y.abs() <= 3.0 * t.sqrt() && y != 0.0 {
                assert_relative_eq!(d[j], -y / (2.0 * t) * p[j], max_relative = 1e-5);
            }
        }
        assert_eq!(d[2000], 0.0);
    }

    #[test]
    fn one_sided_stencils_are_exact_on_quadratics() {
        let h = 0.1;
        let p: Vec<f64> = (0..7).map(|j| (j as f64 * h).powi(2)).collect();
        let d = gradient_profile(&p, h);
        for (j, dj) in d.iter().enumerate() {
            assert_relative_eq!(*dj, 2.0 * j as f64 * h, epsilon = 1e-12);
        }
        assert!(gradient_profile(&[3.0; 9], 0.2).iter().all(|v| *v == 0.0));
    }

    fn field() -> (KernelField, WeightFamily) {
        let spec = validate_polynomial_params(2.0, 3.0, 4.0, 1).unwrap();
        let params = default_params(&spec, 10.0, &ParamOverrides::default()).unwrap();
        let fam = WeightFamily::for_shape(&params, spec.shape_exponents());
        let g = Grid::new(12.0, 1201).unwrap();
        let f = solve_forward(&spec, 0.0, 0.8, &g, 1e-3, &SolverOptions::default()).unwrap();
        (f, fam)
    }

    #[test]
    fn report_invariants() {
        let (f, fam) = field();
        let w = choose_window(0.4).unwrap();
        let r = functionals(&f, &fam, &w, 2.0).unwrap();
        assert!(r.big_xi1 <= r.big_xi2);
        assert!(r.sup_xi1 <= r.sup_xi2);
        assert_eq!(r.times[0], w.a0);
        assert_eq!(*r.times.last().unwrap(), w.b0);
        assert!(r.fisher <= r.fisher_bound(1.0));
        assert!(r.error_estimates.iter().all(|(_, e)| *e < 0.01), "{:?}", r.error_estimates);
        assert!(r.warnings.is_empty());
        let inp = r.envelope_inputs(2.0);
        assert_eq!(inp.c_cal, 2.0);
        assert_eq!(inp.xi2, r.big_xi2);
    }

    #[test]
    fn unit_weight_gives_mass() {
        let (f, _) = field();
        let one = ExpRadialWeight {
            rate: 0.0,
            time_exp: 1.0,
            space_exp: 2.0,
        };
        let i = f.time_index(0.3).unwrap();
        assert_relative_eq!(xi(&f, &one, 0.3).unwrap(), f.mass(i), max_relative = 1e-14);
        assert!(f.mass(i) <= 1.0);
    }

    #[test]
    fn uniform_density_entropy() {
        // p = 1/(2R) on [−R, R]: ∫ p log² p = log²(2R)
        let g = Grid::new(2.5, 101).unwrap();
        let u: f64 = 1.0 / 5.0;
        let v: Vec<f64> = vec![u * u.ln().powi(2); 101];
        assert_relative_eq!(trapezoid(&v, g.h), 5f64.ln().powi(2), max_relative = 1e-14);
    }

    #[test]
    fn window_outside_the_run_is_rejected() {
        let g = Grid::new(6.0, 121).unwrap();
        let f = solve_forward(&OperatorSpec::heat(1), 0.0, 0.3, &g, 1e-3, &SolverOptions::default()).unwrap();
        let spec = validate_polynomial_params(2.0, 3.0, 4.0, 1).unwrap();
        let params = default_params(&spec, 10.0, &ParamOverrides::default()).unwrap();
        let fam = WeightFamily::new(&params, None);
        let r = functionals(&f, &fam, &choose_window(0.4).unwrap(), 2.0);
        assert!(matches!(r, Err(Error::Window(_))));
    }
}
