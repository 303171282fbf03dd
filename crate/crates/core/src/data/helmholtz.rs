//! 1-D Helmholtz boundary value problem
//! `u'' + (λ² + c·ω(x)) u = f(x)` on `[-L, L]`, `u(±L) = 0`, discretized with
//! second-order central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzProblem {
    pub half_length: f64,
    pub lambda: f64,
    pub contrast: f64,
    /// Forcing frequencies `μ_k`; `f(x) = Σ_k (λ² − μ_k²) sin(μ_k x)`.
    pub forcing: Vec<f64>,
    pub fine_n: usize,
    pub coarse_n: usize,
}

/// Smallest pivot magnitude relative to the largest matrix entry below
/// which the system is reported as singular.
const PIVOT_FLOOR: f64 = 1e-13;

impl HelmholtzProblem {
    /// `λ = 2`, `c = 0.9λ²`, `μ_k = 300 + 35k` for `k = 0..=10`; 8000 fine
    /// and 1000 coarse intervals per unit of half-length.
    pub fn scattering(half_length: usize) -> Self {
        let lambda = 2.0;
        Self {
            half_length: half_length as f64,
            lambda,
            contrast: 0.9 * lambda * lambda,
            forcing: (0..=10).map(|k| 300.0 + 35.0 * k as f64).collect(),
            fine_n: 8000 * half_length + 1,
            coarse_n: 1000 * half_length + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_length.is_nan() || self.half_length <= 0.0 {
            return Err(Error::invalid("half_length must be positive"));
        }
        if self.fine_n < 3 || self.coarse_n < 2 {
            return Err(Error::invalid("grids need at least 3 fine and 2 coarse points"));
        }
        if !(self.fine_n - 1).is_multiple_of(self.coarse_n - 1) {
            return Err(Error::invalid(format!(
                "fine_n − 1 = {} not divisible by coarse_n − 1 = {}",
                self.fine_n - 1,
                self.coarse_n - 1
            )));
        }
        let mu_max = self.forcing.iter().fold(0.0_f64, |m, &mu| m.max(mu.abs()));
        let needed = 10.0 * mu_max * self.half_length / std::f64::consts::PI;
        if (self.fine_n as f64) < needed {
            return Err(Error::invalid(format!(
                "fine grid of {} points under-resolves μ = {mu_max} (need ≥ {needed:.0})",
                self.fine_n
            )));
        }
        Ok(())
    }

    pub fn fine_grid(&self) -> Vec<f64> {
        uniform_grid(self.half_length, self.fine_n)
    }

    pub fn forcing_at(&self, x: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        self.forcing.iter().map(|mu| (l2 - mu * mu) * (mu * x).sin()).sum()
    }

    /// `λ² + c·ω_j` on the fine grid.
    pub fn coefficient(&self, omega: &[f64]) -> Vec<f64> {
        let l2 = self.lambda * self.lambda;
        omega.iter().map(|w| l2 + self.contrast * w).collect()
    }
}

/// `n` equispaced points on `[-half, half]`, endpoints exact.
pub fn uniform_grid(half: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![-half];
    }
    let h = 2.0 * half / (n - 1) as f64;
    (0..n)
        .map(|j| if j == n - 1 { half } else { -half + j as f64 * h })
        .collect()
}

/// Solves on the fine grid; returns `u` including the zero boundary values.
pub fn helmholtz_solve(prob: &HelmholtzProblem, omega: &[f64]) -> Result<Vec<f64>> {
    prob.validate()?;
    if omega.len() != prob.fine_n {
        return Err(Error::ShapeMismatch {
            op: "helmholtz_solve",
            left: vec![prob.fine_n],
            right: vec![omega.len()],
        });
    }
    let grid = prob.fine_grid();
    let rhs: Vec<f64> = grid.iter().map(|&x| prob.forcing_at(x)).collect();
    let h = 2.0 * prob.half_length / (prob.fine_n - 1) as f64;
    solve_dirichlet(h, &prob.coefficient(omega), &rhs)
}

/// Solves `(u_{j+1} − 2u_j + u_{j−1})/h² + q_j u_j = f_j` at interior points
/// with `u_0 = u_{n−1} = 0`. `q` and `f` are given at all `n` points.
pub fn solve_dirichlet(h: f64, q: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = q.len();
    if f.len() != n || n < 3 {
        return Err(Error::invalid(format!(
            "solve_dirichlet: {} coefficients, {} rhs values (need equal, ≥ 3)",
            n,
            f.len()
        )));
    }
    let m = n - 2;
    let h2 = h * h;
    // Rows scaled by h²: u_{j-1} + (h² q_j − 2) u_j + u_{j+1} = h² f_j.
    let mut sub = vec![1.0; m.saturating_sub(1)];
    let mut sup = vec![1.0; m.saturating_sub(1)];
    let mut diag: Vec<f64> = (1..=m).map(|j| h2 * q[j] - 2.0).collect();
    let mut rhs: Vec<f64> = (1..=m).map(|j| h2 * f[j]).collect();
    let scale = diag.iter().fold(1.0_f64, |s, d| s.max(d.abs()));
    let x = tridiagonal_pivoted(&mut sub, &mut diag, &mut sup, &mut rhs, scale)?;
    let mut u = Vec::with_capacity(n);
    u.push(0.0);
    u.extend(x);
    u.push(0.0);
    Ok(u)
}

/// Gaussian elimination with partial pivoting on a tridiagonal system
/// (row interchanges create one extra superdiagonal, kept in `sub`).
fn tridiagonal_pivoted(
    dl: &mut [f64],
    d: &mut [f64],
    du: &mut [f64],
    b: &mut [f64],
    scale: f64,
) -> Result<Vec<f64>> {
    let n = d.len();
    let mut min_pivot = f64::INFINITY;
    // Second superdiagonal created by interchanges; reuses `dl` storage.
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            min_pivot = min_pivot.min(d[i].abs());
            if d[i] == 0.0 {
                return Err(Error::Singular { pivot_ratio: 0.0 });
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            min_pivot = min_pivot.min(dl[i].abs());
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 1 < n - 1 {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    min_pivot = min_pivot.min(d[n - 1].abs());
    let ratio = min_pivot / scale;
    if ratio.is_nan() || ratio <= PIVOT_FLOOR {
        return Err(Error::Singular { pivot_ratio: ratio });
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    Ok(b.to_vec())
}

/// `‖A u − f‖₂ / ‖f‖₂` of the interior stencil equations (unscaled rows).
pub fn stencil_residual(h: f64, q: &[f64], f: &[f64], u: &[f64]) -> f64 {
    let n = u.len();
    let h2 = h * h;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 1..n - 1 {
        let lhs = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / h2 + q[j] * u[j];
        num += (lhs - f[j]).powi(2);
        den += f[j] * f[j];
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Every `(fine_n − 1)/(coarse_n − 1)`-th point, endpoints included.
pub fn downsample(u: &[f64], coarse_n: usize) -> Result<Vec<f64>> {
    let fine_n = u.len();
    if coarse_n < 2 || fine_n < 2 || !(fine_n - 1).is_multiple_of(coarse_n - 1) {
        return Err(Error::invalid(format!(
            "cannot downsample {fine_n} points to {coarse_n}: (fine − 1) must be a multiple of (coarse − 1)"
        )));
    }
    let stride = (fine_n - 1) / (coarse_n - 1);
    Ok(u.iter().step_by(stride).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn analytic_problem(n: usize, mu: f64) -> HelmholtzProblem {
        HelmholtzProblem {
            half_length: 1.0,
            lambda: 2.0,
            contrast: 3.6,
            forcing: vec![mu],
            fine_n: n,
            coarse_n: 2,
        }
    }

    fn max_error(n: usize, mu: f64) -> f64 {
        let prob = analytic_problem(n, mu);
        let u = helmholtz_solve(&prob, &vec![0.0; n]).unwrap();
        prob.fine_grid()
            .iter()
            .zip(&u)
            .map(|(x, v)| (v - (mu * x).sin()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let mut prob = HelmholtzProblem::scattering(1);
        prob.forcing.clear();
        let u = helmholtz_solve(&prob, &vec![0.3; prob.fine_n]).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn analytic_mode_converges_at_second_order() {
        let mu = 5.0 * PI;
        let e1 = max_error(201, mu);
        let e2 = max_error(401, mu);
        assert!(e1 < 1e-2);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn residual_is_at_solver_precision() {
        let prob = HelmholtzProblem::scattering(1);
        let grid = prob.fine_grid();
        let omega: Vec<f64> = grid.iter().map(|x| (3.0 * x).sin() * 0.8).collect();
        let u = helmholtz_solve(&prob, &omega).unwrap();
        let f: Vec<f64> = grid.iter().map(|&x| prob.forcing_at(x)).collect();
        let h = 2.0 / (prob.fine_n - 1) as f64;
        assert!(stencil_residual(h, &prob.coefficient(&omega), &f, &u) < 1e-9);
    }

    #[test]
    fn pivoting_handles_tiny_leading_diagonal() {
        // Leading diagonal entry near zero forces a row interchange.
        let h = 1.0;
        let q = vec![0.0, 2.0 + 1e-12, 0.5, 1.0, 0.0];
        let f = vec![0.0, 1.0, -2.0, 0.5, 0.0];
        let u = solve_dirichlet(h, &q, &f).unwrap();
        assert!(stencil_residual(h, &q, &f, &u) < 1e-9);
    }

    #[test]
    fn singular_system_reported() {
        // u_{j-1} − 2u_j + u_{j+1} + q u_j with q = 2 − 2cos(π/(m+1)) is singular.
        let m = 6;
        let qv = 2.0 - 2.0 * (PI / (m as f64 + 1.0)).cos();
        let q = vec![qv; m + 2];
        let f = vec![1.0; m + 2];
        assert!(matches!(solve_dirichlet(1.0, &q, &f), Err(Error::Singular { .. })));
    }

    #[test]
    fn downsample_cases() {
        let u: Vec<f64> = (0..8001).map(|j| j as f64).collect();
        let c = downsample(&u, 1001).unwrap();
        assert_eq!(c.len(), 1001);
        assert_eq!(c[1], 8.0);
        assert_eq!((c[0], c[1000]), (u[0], u[8000]));
        assert_eq!(downsample(&u, 8001).unwrap(), u);
        assert!(downsample(&u, 1000).is_err());
    }

    #[test]
    fn scattering_presets_scale_with_length() {
        let p = HelmholtzProblem::scattering(10);
        assert_eq!((p.fine_n, p.coarse_n), (80001, 10001));
        assert_eq!(p.forcing.len(), 11);
        assert_eq!(p.forcing[10], 650.0);
        p.validate().unwrap();
        let mut bad = p.clone();
        bad.fine_n = 2001;
        bad.coarse_n = 1001;
        assert!(bad.validate().is_err());
    }
}
