//! Bound-constrained Levenberg-Marquardt for small dense problems.
//!
//! Minimizes `‖r(x)‖²` subject to `lower <= x <= upper`. Bounds are handled by
//! projection plus an active set: variables sitting on a bound with the
//! gradient pushing outwards are frozen for the step. The Jacobian is built
//! from central differences (one-sided at the bounds).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when the accepted step is shorter than this (relative to `1 + ‖x‖`).
    pub step_tolerance: f64,
    /// Stop when the projected gradient of `‖r‖²` falls below this (inf-norm).
    pub gradient_tolerance: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            fd_step: 1e-6,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    SmallStep,
    SmallGradient,
    /// Damping grew without finding a descent step.
    Stalled,
    MaxIterations,
}

impl Termination {
    pub fn converged(self) -> bool {
        !matches!(self, Termination::MaxIterations)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    /// `‖r‖²` at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Box constraints, one interval per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn project(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.max(*lo).min(*hi);
        }
    }
}

struct Problem<'a, F> {
    residual: F,
    m: usize,
    bounds: &'a Bounds,
    evaluations: usize,
}

impl<F: FnMut(&[f64], &mut [f64])> Problem<'_, F> {
    fn eval(&mut self, x: &[f64]) -> DVector<f64> {
        let mut r = vec![0.0; self.m];
        (self.residual)(x, &mut r);
        self.evaluations += 1;
        DVector::from_vec(r)
    }

    fn jacobian(&mut self, x: &[f64], r0: &DVector<f64>, rel_step: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut jac = DMatrix::zeros(self.m, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            let h = rel_step * (1.0 + x[j].abs());
            let (lo, hi) = (self.bounds.lower[j], self.bounds.upper[j]);
            let col = if x[j] - h >= lo && x[j] + h <= hi {
                xp[j] = x[j] + h;
                let rp = self.eval(&xp);
                xp[j] = x[j] - h;
                let rm = self.eval(&xp);
                (rp - rm) / (2.0 * h)
            } else if x[j] + h <= hi {
                xp[j] = x[j] + h;
                (self.eval(&xp) - r0) / h
            } else {
                xp[j] = x[j] - h;
                (r0 - self.eval(&xp)) / h
            };
            xp[j] = x[j];
            jac.set_column(j, &col);
        }
        jac
    }
}

/// Runs bound-constrained Levenberg-Marquardt from `x0`.
///
/// `residual(x, r)` must fill all `m` entries of `r`. The start point is
/// projected onto the bounds first.
pub fn minimize<F>(residual: F, m: usize, x0: &[f64], bounds: &Bounds, cfg: &LmConfig) -> LmReport
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    assert_eq!(bounds.lower.len(), n);
    assert_eq!(bounds.upper.len(), n);
    let mut prob = Problem {
        residual,
        m,
        bounds,
        evaluations: 0,
    };

    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut r = prob.eval(&x);
    let mut cost = r.norm_squared();
    let mut lambda = cfg.initial_damping;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let jac = prob.jacobian(&x, &r, cfg.fd_step);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;

        // Projected gradient of ‖r‖² (factor 2 from the square).
        let mut pg: f64 = 0.0;
        let mut free = Vec::with_capacity(n);
        for i in 0..n {
            let g = 2.0 * grad[i];
            let stepped = (x[i] - g).max(bounds.lower[i]).min(bounds.upper[i]);
            pg = pg.max((x[i] - stepped).abs());
            let at_lower = x[i] <= bounds.lower[i] && g > 0.0;
            let at_upper = x[i] >= bounds.upper[i] && g < 0.0;
            if !(at_lower || at_upper) {
                free.push(i);
            }
        }
        if pg < cfg.gradient_tolerance {
            termination = Termination::SmallGradient;
            break;
        }
        if free.is_empty() {
            termination = Termination::SmallGradient;
            break;
        }

        let k = free.len();
        let mut a = DMatrix::zeros(k, k);
        let mut b = DVector::zeros(k);
        for (ii, &i) in free.iter().enumerate() {
            b[ii] = -grad[i];
            for (jj, &j) in free.iter().enumerate() {
                a[(ii, jj)] = jtj[(i, j)];
            }
        }

        let mut accepted = false;
        let mut tiny_step = false;
        for _ in 0..30 {
            let mut damped = a.clone();
            for ii in 0..k {
                damped[(ii, ii)] += lambda * a[(ii, ii)].max(1e-12);
            }
            let Some(delta) = damped.cholesky().map(|c| c.solve(&b)) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = x.clone();
            for (ii, &i) in free.iter().enumerate() {
                trial[i] += delta[ii];
            }
            bounds.project(&mut trial);
            let step: f64 = trial
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step < cfg.step_tolerance * (1.0 + xnorm) {
                tiny_step = true;
                break;
            }
            let r_trial = prob.eval(&trial);
            let c_trial = r_trial.norm_squared();
            if c_trial < cost {
                x = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if tiny_step {
            termination = Termination::SmallStep;
            break;
        }
        if !accepted {
            termination = Termination::Stalled;
            break;
        }
    }

    LmReport {
        x,
        residual: r.iter().copied().collect(),
        cost,
        iterations,
        evaluations: prob.evaluations,
        termination,
    }
}
