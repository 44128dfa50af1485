//! Barrier optimization over pure covariance matrices.
//!
//! Pure QCMs are exactly the matrices `S Sᵀ` with `S` symplectic, and the
//! chart `Q ↦ exp(ΩQ) exp(ΩQ)ᵀ` over symmetric `Q` is onto: the positive
//! definite symplectic square root of any pure QCM is `exp(ΩQ)` for a
//! symmetric `Q` (the logarithm of a symmetric positive definite
//! symplectic matrix anticommutes with `Ω` after multiplication, which is
//! exactly the image of a symmetric matrix under `Q ↦ ΩQ`). The chart is
//! overparametrized; the optimizer does not care.
//!
//! The domination constraint `γ ≤ V` is enforced with a logarithmic
//! barrier `−μ · ln det(V − γ)`, `μ` decreased geometrically, each stage
//! solved with BFGS over finite-difference gradients. Infeasible points
//! evaluate to `+∞`, which the backtracking line search treats as a
//! rejected step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matcore::SymMatrix;
use crate::rng::GaussStream;

use super::EofConfig;

/// Bipartite minimization of `½ I_M(A:B)_γ` over pure `γ ≤ V`.
pub(crate) struct BipartiteProblem {
    v: SymMatrix,
    omega: DMatrix<f64>,
    a_dim: usize,
}

/// Outcome of one multi-start run.
pub(crate) struct OptimizeOutcome {
    pub gamma: SymMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BipartiteProblem {
    pub fn new(v: SymMatrix, omega: DMatrix<f64>, a_dim: usize) -> Self {
        Self { v, omega, a_dim }
    }

    fn dim(&self) -> usize {
        self.v.dim()
    }

    fn chart_len(&self) -> usize {
        let m = self.dim();
        m * (m + 1) / 2
    }

    fn unpack(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                out[(i, j)] = q[k];
                out[(j, i)] = q[k];
                k += 1;
            }
        }
        out
    }

    fn pack(&self, q_hat: &DMatrix<f64>) -> DVector<f64> {
        let m = self.dim();
        let mut out = DVector::zeros(self.chart_len());
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                out[k] = 0.5 * (q_hat[(i, j)] + q_hat[(j, i)]);
                k += 1;
            }
        }
        out
    }

    /// `γ(Q) = exp(ΩQ) exp(ΩQ)ᵀ`; exactly a pure QCM for every symmetric Q.
    pub fn gamma(&self, q: &DVector<f64>) -> SymMatrix {
        let s = (&self.omega * self.unpack(q)).exp();
        SymMatrix::symmetrized(&s * s.transpose())
    }

    /// Chart point whose `γ` reproduces a given symmetric positive
    /// definite symplectic matrix: `Q = ½ Ωᵀ ln γ`.
    pub fn chart_of(&self, gamma: &SymMatrix) -> Result<DVector<f64>> {
        let eig = gamma.mat().clone().symmetric_eigen();
        let mut log_eigs = eig.eigenvalues.clone();
        for l in log_eigs.iter_mut() {
            if *l <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eig: *l });
            }
            *l = l.ln();
        }
        let log_gamma =
            &eig.eigenvectors * DMatrix::from_diagonal(&log_eigs) * eig.eigenvectors.transpose();
        Ok(self.pack(&(self.omega.transpose() * log_gamma * 0.5)))
    }

    /// `½ I_M(A:B)_γ = ¼ (ln det γ_A + ln det γ_B − ln det γ)`.
    pub fn half_mi(&self, gamma: &SymMatrix) -> Option<f64> {
        let m = gamma.mat();
        let a = self.a_dim;
        let b = self.dim() - a;
        let ld = |view: DMatrix<f64>| -> Option<f64> {
            if view.is_empty() {
                return Some(0.0);
            }
            let chol = view.cholesky()?;
            let mut acc = 0.0;
            for i in 0..chol.l_dirty().nrows() {
                acc += chol.l_dirty()[(i, i)].ln();
            }
            Some(2.0 * acc)
        };
        let ld_a = ld(m.view((0, 0), (a, a)).into_owned())?;
        let ld_b = ld(m.view((a, a), (b, b)).into_owned())?;
        let ld_full = ld(m.clone_owned())?;
        Some(0.25 * (ld_a + ld_b - ld_full))
    }

    /// Barrier objective; `None` when `γ(q)` leaves the feasible region.
    fn objective(&self, q: &DVector<f64>, mu: f64) -> Option<f64> {
        let gamma = self.gamma(q);
        let slack = self.v.sub(&gamma).ok()?;
        let chol = slack.mat().clone().cholesky()?;
        let mut logdet = 0.0;
        for i in 0..self.dim() {
            let pivot = chol.l_dirty()[(i, i)];
            if pivot <= 0.0 || !pivot.is_finite() {
                return None;
            }
            logdet += pivot.ln();
        }
        let value = self.half_mi(&gamma)?;
        Some(value - mu * 2.0 * logdet)
    }

    /// Full barrier schedule from one start. Returns the final chart
    /// point and the iteration count.
    fn solve_from(&self, start: &DVector<f64>, config: &EofConfig) -> (DVector<f64>, usize) {
        let mut x = start.clone();
        let mut total_iter = 0;
        let mut mu = config.barrier_mu0;
        for _ in 0..config.barrier_stages {
            let f = |q: &DVector<f64>| self.objective(q, mu).unwrap_or(f64::INFINITY);
            let (next, iters) = bfgs(&f, &x, config.max_iterations, config.gradient_tol);
            x = next;
            total_iter += iters;
            mu *= config.barrier_factor;
        }
        (x, total_iter)
    }

    /// Multi-start barrier run seeded at the given charts plus random
    /// perturbations of the first. The reduction is a minimum by
    /// `(value, start index)`, independent of evaluation order.
    pub fn optimize(&self, seeds: &[DVector<f64>], config: &EofConfig) -> Result<OptimizeOutcome> {
        if seeds.is_empty() {
            return Err(Error::Optimizer("no feasible starts".into()));
        }
        let mut starts: Vec<DVector<f64>> = Vec::new();
        for s in seeds {
            if self.objective(s, config.barrier_mu0).is_some() {
                starts.push(s.clone());
            }
        }
        if starts.is_empty() {
            return Err(Error::Optimizer(
                "no seed is strictly feasible for the barrier".into(),
            ));
        }
        let base = starts[0].clone();
        let mut rng = GaussStream::new(config.seed);
        while starts.len() < config.n_starts.max(1) {
            // Perturb toward feasibility: halve the step until the barrier
            // accepts the point.
            let noise = DVector::from_fn(base.len(), |_, _| rng.normal());
            let mut scale = config.start_spread;
            let mut accepted = false;
            for _ in 0..20 {
                let candidate = &base + &noise * scale;
                if self.objective(&candidate, config.barrier_mu0).is_some() {
                    starts.push(candidate);
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                starts.push(base.clone());
            }
        }

        let mut best: Option<(f64, usize, DVector<f64>)> = None;
        let mut total_iter = 0;
        for (index, start) in starts.iter().enumerate() {
            let (x, iters) = self.solve_from(start, config);
            total_iter += iters;
            let gamma = self.gamma(&x);
            if let Some(value) = self.half_mi(&gamma) {
                // Keep only feasible finals.
                if self.v.sub(&gamma)?.mat().clone().cholesky().is_some() {
                    let better = match &best {
                        None => true,
                        Some((bv, bi, _)) => value < *bv || (value == *bv && index < *bi),
                    };
                    if better {
                        best = Some((value, index, x));
                    }
                }
            }
        }
        let (value, _, x) =
            best.ok_or_else(|| Error::Optimizer("all starts ended infeasible".into()))?;
        Ok(OptimizeOutcome {
            gamma: self.gamma(&x),
            value,
            iterations: total_iter,
            converged: true,
        })
    }
}

/// Central finite-difference gradient; falls back to one-sided steps at
/// the feasibility boundary.
fn fd_gradient(f: &dyn Fn(&DVector<f64>) -> f64, x: &DVector<f64>, fx: f64) -> DVector<f64> {
    let n = x.len();
    let mut grad = DVector::zeros(n);
    let mut probe = x.clone();
    for i in 0..n {
        let h = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        grad[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else if fp.is_finite() {
            (fp - fx) / h
        } else if fm.is_finite() {
            (fx - fm) / h
        } else {
            0.0
        };
    }
    grad
}

/// Dense BFGS with backtracking Armijo line search. Infinite objective
/// values mark infeasible points.
fn bfgs(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x0: &DVector<f64>,
    max_iter: usize,
    gradient_tol: f64,
) -> (DVector<f64>, usize) {
    let n = x0.len();
    let mut x = x0.clone();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return (x, 0);
    }
    let mut grad = fd_gradient(f, &x, fx);
    let mut h_inv = DMatrix::<f64>::identity(n, n);

    for iter in 0..max_iter {
        if grad.norm() <= gradient_tol * (1.0 + fx.abs()) {
            return (x, iter);
        }
        let mut direction = -(&h_inv * &grad);
        let mut slope = grad.dot(&direction);
        if slope >= 0.0 {
            // Reset a corrupted quasi-Newton model.
            h_inv = DMatrix::identity(n, n);
            direction = -grad.clone();
            slope = grad.dot(&direction);
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut x_new = x.clone();
        let mut f_new = fx;
        for _ in 0..40 {
            let candidate = &x + &direction * step;
            let fc = f(&candidate);
            if fc.is_finite() && fc <= fx + 1e-4 * step * slope {
                x_new = candidate;
                f_new = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (x, iter);
        }

        let grad_new = fd_gradient(f, &x_new, f_new);
        let s = &x_new - &x;
        let y = &grad_new - &grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // Sherman–Morrison form of the BFGS inverse update.
            h_inv += (&s * s.transpose()) * (rho * (1.0 + rho * yhy))
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let f_prev = fx;
        x = x_new;
        fx = f_new;
        grad = grad_new;
        if (f_prev - fx).abs() <= 1e-14 + 1e-12 * fx.abs() {
            return (x, iter + 1);
        }
    }
    (x, max_iter)
}
