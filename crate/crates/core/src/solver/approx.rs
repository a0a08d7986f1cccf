use std::sync::Arc;

use rayon::prelude::*;

use crate::coefficients::{approximate_spec, OperatorSpec, SpaceTimeWeight};
use crate::error::{Error, Result};

use super::forward::{solve_forward, Grid, KernelField, SolverOptions};

/// Compact set on which `|p_n − p|` is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub t_min: f64,
    pub t_max: f64,
    pub y_max: f64,
}

/// The base solve, one solve per cutoff level and the sup distances.
#[derive(Debug, Clone)]
pub struct ApproxSweep {
    pub base: KernelField,
    pub levels: Vec<f64>,
    pub fields: Vec<KernelField>,
    /// `sup_region |p_n − p|` for each level.
    pub distances: Vec<f64>,
}

/// Solves the forward problem for `A` and for each `A_n`, `n ∈ levels`,
/// with the cutoff `φ(W₁(t₀, ·)/n)`. Solves run in parallel.
#[allow(clippy::too_many_arguments)]
pub fn solve_approximated(
    spec: &OperatorSpec,
    levels: &[f64],
    t0: f64,
    w1: Arc<dyn SpaceTimeWeight>,
    x: f64,
    t_end: f64,
    grid: &Grid,
    dt: f64,
    opts: &SolverOptions,
    region: Option<Region>,
) -> Result<ApproxSweep> {
    let specs = levels
        .iter()
        .map(|&n| Ok(approximate_spec(spec, n, t0, w1.clone())?.to_operator()))
        .collect::<Result<Vec<_>>>()?;
    let base = solve_forward(spec, x, t_end, grid, dt, opts)?;
    let fields = specs
        .par_iter()
        .map(|s| solve_forward(s, x, t_end, grid, dt, opts))
        .collect::<Result<Vec<_>>>()?;
    let region = region.unwrap_or(Region {
        t_min: base.times[0],
        t_max: t_end,
        y_max: grid.radius,
    });
    let distances = fields
        .iter()
        .map(|f| sup_distance(&base, f, &region))
        .collect::<Result<Vec<_>>>()?;
    Ok(ApproxSweep {
        base,
        levels: levels.to_vec(),
        fields,
        distances,
    })
}

/// `max |p − q|` over stored times and nodes inside `region`.
pub fn sup_distance(a: &KernelField, b: &KernelField, region: &Region) -> Result<f64> {
    if a.grid != b.grid || a.times != b.times {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    let mut sup = 0.0f64;
    for (i, &t) in a.times.iter().enumerate() {
        if t < region.t_min - 1e-12 || t > region.t_max + 1e-12 {
            continue;
        }
        for (j, &y) in a.grid.coords.iter().enumerate() {
            if y.abs() <= region.y_max {
                sup = sup.max((a.values[i][j] - b.values[i][j]).abs());
            }
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::validate_polynomial_params;
    use crate::lyapunov::{default_params, ParamOverrides, WeightFamily};

    #[test]
    fn cutoff_sweep_shrinks_distance_and_far_level_is_identical() {
        let spec = validate_polynomial_params(2.0, 3.0, 4.0, 1).unwrap();
        let params = default_params(&spec, 10.0, &ParamOverrides::default()).unwrap();
        let fam = WeightFamily::for_shape(&params, spec.shape_exponents());
        let g = Grid::new(10.0, 801).unwrap();
        // anchor t₀ = 1 puts the cutoffs at |y| ≈ 2.2 … 4.3, where p is resolved;
        // the last level cuts off far outside the grid
        let sweep = solve_approximated(
            &spec,
            &[4.0, 16.0, 64.0, 256.0, 1e300],
            1.0,
            Arc::new(fam.w1),
            0.0,
            0.5,
            &g,
            1e-3,
            &SolverOptions::default(),
            None,
        )
        .unwrap();
        let d = &sweep.distances;
        assert!(d[0] > 1e-6, "{d:?}");
        for w in d[..4].windows(2) {
            assert!(w[1] < w[0], "{d:?}");
        }
        assert_eq!(d[4], 0.0);
        assert_eq!(sweep.fields[4].values, sweep.base.values);
    }
}
