//! Damped Newton iteration for small polynomial systems. Steps are
//! minimum-norm least-squares solves, so the same routine handles square,
//! under- and overdetermined systems.

use nalgebra::DMatrix;

use crate::linalg::{pseudo_solve, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Converged once `max_k |F_k(x)| ≤ residual_tol`.
    pub residual_tol: f64,
    pub rank_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 100, residual_tol: 1e-10, rank_tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Run damped Newton from `x0` on `system`, which returns `(F(x), J(x))`.
pub fn damped_newton<S>(system: S, x0: Vec<f64>, opts: &NewtonOptions) -> NewtonOutcome
where
    S: Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>),
{
    let mut x = x0;
    let (mut f, mut jac) = system(&x);
    let mut iterations = 0;
    while iterations < opts.max_iter && inf_norm(&f) > opts.residual_tol {
        iterations += 1;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let Some(step) = pseudo_solve(&jac, &neg, opts.rank_tol) else { break };
        if step.iter().any(|s| !s.is_finite()) {
            break;
        }
        let current = two_norm(&f);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + alpha * si).collect();
            let (ft, jt) = system(&trial);
            if two_norm(&ft) < current {
                accepted = Some((trial, ft, jt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, jnew)) = accepted else { break };
        x = xn;
        f = fnew;
        jac = jnew;
        if inf_norm(&x) > 1e8 {
            break;
        }
    }
    // A couple of full steps to polish a converged root.
    if inf_norm(&f) <= opts.residual_tol {
        for _ in 0..2 {
            let neg: Vec<f64> = f.iter().map(|v| -v).collect();
            let Some(step) = pseudo_solve(&jac, &neg, opts.rank_tol) else { break };
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let (ft, jt) = system(&trial);
            if two_norm(&ft) < two_norm(&f) {
                x = trial;
                f = ft;
                jac = jt;
            } else {
                break;
            }
        }
    }
    let residual = inf_norm(&f);
    NewtonOutcome { x, residual, converged: residual <= opts.residual_tol, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_circle_line_intersection() {
        // x² + y² = 1, x = y
        let sys = |v: &[f64]| {
            let f = vec![v[0] * v[0] + v[1] * v[1] - 1.0, v[0] - v[1]];
            let j = DMatrix::from_row_slice(2, 2, &[2.0 * v[0], 2.0 * v[1], 1.0, -1.0]);
            (f, j)
        };
        let out = damped_newton(sys, vec![3.0, 0.5], &NewtonOptions::default());
        assert!(out.converged);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.x[0] - r).abs() < 1e-12 && (out.x[1] - r).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_lands_on_solution_set() {
        let sys = |v: &[f64]| (vec![v[0] * v[1] - 2.0], DMatrix::from_row_slice(1, 2, &[v[1], v[0]]));
        let out = damped_newton(sys, vec![0.3, 0.7], &NewtonOptions::default());
        assert!(out.converged);
        assert!((out.x[0] * out.x[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn reports_failure_without_root() {
        let sys = |v: &[f64]| (vec![v[0] * v[0] + 1.0], DMatrix::from_row_slice(1, 1, &[2.0 * v[0]]));
        let out = damped_newton(sys, vec![0.5], &NewtonOptions::default());
        assert!(!out.converged);
    }
}
