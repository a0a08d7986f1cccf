/// A tridiagonal system `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`,
/// pre-factored for repeated solves with different right-hand sides.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    /// Modified super-diagonal `c'_i`.
    c_prime: Vec<f64>,
    /// Reciprocal pivots `1 / (b_i − a_i c'_{i−1})`.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// Factors the matrix (Thomas algorithm, no pivoting). Intended for
    /// diagonally dominant systems.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n, "tridiagonal bands must match");
        let mut c_prime = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let a = if i == 0 { 0.0 } else { lower[i] };
            let piv = diag[i] - a * prev;
            inv_pivot[i] = 1.0 / piv;
            prev = upper[i] * inv_pivot[i];
            c_prime[i] = prev;
        }
        Self {
            lower: lower.to_vec(),
            c_prime,
            inv_pivot,
        }
    }

    /// Solves in place: `rhs` becomes the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut prev = 0.0;
        for i in 0..n {
            let a = if i == 0 { 0.0 } else { self.lower[i] };
            prev = (rhs[i] - a * prev) * self.inv_pivot[i];
            rhs[i] = prev;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_against_dense_product() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let t = Tridiagonal::factor(&lower, &diag, &upper);
        t.solve_in_place(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }
}
