//! L2-regularized logistic regression fitted with L-BFGS.
//!
//! Objective: `0.5 * |w|^2 + C * sum_i log(1 + exp(-s_i * (w.x_i + b)))` with
//! `s_i` in {-1, +1}. The bias is not penalized.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// `log(1 + exp(z))` without overflow.
#[inline]
pub(crate) fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Loss and gradient of the objective. The returned gradient has one entry
/// per weight followed by the bias entry.
pub fn logistic_loss_grad(w: &[f64], b: f64, x: &Matrix, y: &[u8], c: f64) -> (f64, Vec<f64>) {
    let d = w.len();
    let mut loss = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let mut grad = Vec::with_capacity(d + 1);
    grad.extend_from_slice(w);
    grad.push(0.0);
    for (row, &label) in x.iter_rows().zip(y) {
        let s = if label == 1 { 1.0 } else { -1.0 };
        let f = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
        let m = s * f;
        loss += c * log1p_exp(-m);
        // d/df log(1 + exp(-s f)) = -s * sigmoid(-s f)
        let coef = -c * s * sigmoid(-m);
        for (g, &v) in grad[..d].iter_mut().zip(row) {
            *g += coef * v;
        }
        grad[d] += coef;
    }
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking. Stops once the largest
/// gradient component is at most `gtol`.
pub(crate) fn lbfgs<F>(mut f: F, theta0: Vec<f64>, gtol: f64, max_iter: usize, memory: usize) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut theta = theta0;
    let (mut loss, mut grad) = f(&theta);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let max_abs = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for iter in 0..max_iter {
        if max_abs(&grad) <= gtol {
            return LbfgsResult {
                theta,
                loss,
                iterations: iter,
                converged: true,
            };
        }
        // two-loop recursion
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(yv) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map_or(1.0, |(s, yv, _)| dot(s, yv) / dot(yv, yv));
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(yv, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - beta) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = grad.iter().map(|v| -v).collect();
            slope = dot(&grad, &dir);
        }

        let mut step = if history.is_empty() {
            1.0 / max_abs(&grad).max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
            let (l, g) = f(&cand);
            if l <= loss + 1e-4 * step * slope {
                accepted = Some((cand, l, g));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss, next_grad)) = accepted else {
            return LbfgsResult {
                theta,
                loss,
                iterations: iter,
                converged: max_abs(&grad) <= gtol,
            };
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == memory {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        theta = next;
        loss = next_loss;
        grad = next_grad;
    }
    let converged = max_abs(&grad) <= gtol;
    LbfgsResult {
        theta,
        loss,
        iterations: max_iter,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

/// Fits the model. The gradient tolerance is `tol * C * n`, i.e. `tol` on
/// the per-sample average scale of the data term.
pub(crate) fn fit_logistic(x: &Matrix, y: &[u8], c: f64, tol: f64, max_iter: usize) -> (LogisticModel, bool) {
    let d = x.cols();
    let gtol = tol * c * x.rows() as f64;
    let res = lbfgs(
        |theta| logistic_loss_grad(&theta[..d], theta[d], x, y, c),
        vec![0.0; d + 1],
        gtol,
        max_iter,
        10,
    );
    let bias = res.theta[d];
    let mut weights = res.theta;
    weights.truncate(d);
    (LogisticModel { weights, bias }, res.converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn random_instance(seed: u64, n: usize, d: usize) -> (Matrix, Vec<u8>, Vec<f64>, f64) {
        let mut rng = seed::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let w = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        (Matrix::from_rows(&rows), y, w, rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_parameters() {
        let (x, y, _, _) = random_instance(1, 7, 3);
        let (loss, _) = logistic_loss_grad(&[0.0; 3], 0.0, &x, &y, 2.0);
        assert!((loss - 2.0 * 7.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let h = 1e-6;
        for s in 0..10 {
            let (x, y, w, b) = random_instance(100 + s, 5, 3);
            let c = 1.0;
            let (_, g) = logistic_loss_grad(&w, b, &x, &y, c);
            let mut theta = w.clone();
            theta.push(b);
            for k in 0..theta.len() {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[k] += h;
                minus[k] -= h;
                let lp = logistic_loss_grad(&plus[..3], plus[3], &x, &y, c).0;
                let lm = logistic_loss_grad(&minus[..3], minus[3], &x, &y, c).0;
                let fd = (lp - lm) / (2.0 * h);
                let rel = (fd - g[k]).abs() / g[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "component {k}: analytic {} vs fd {fd}", g[k]);
            }
        }
    }

    #[test]
    fn small_step_along_negative_gradient_decreases_loss() {
        let x = Matrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]]);
        let y = [0, 0, 1, 1];
        let (mut w, mut b) = (vec![0.0], 0.0);
        let (mut prev, _) = logistic_loss_grad(&w, b, &x, &y, 1.0);
        for _ in 0..50 {
            let (_, g) = logistic_loss_grad(&w, b, &x, &y, 1.0);
            w[0] -= 0.01 * g[0];
            b -= 0.01 * g[1];
            let (l, _) = logistic_loss_grad(&w, b, &x, &y, 1.0);
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn extreme_margins_stay_finite() {
        assert_eq!(log1p_exp(-1000.0), 0.0);
        assert_eq!(log1p_exp(1000.0), 1000.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn lbfgs_reaches_stationary_point() {
        let (x, y, _, _) = random_instance(3, 60, 4);
        let (model, converged) = fit_logistic(&x, &y, 1.0, 1e-8, 500);
        assert!(converged);
        let (_, g) = logistic_loss_grad(&model.weights, model.bias, &x, &y, 1.0);
        assert!(g.iter().all(|v| v.abs() <= 1e-8 * 60.0));
    }

    #[test]
    fn separable_pair() {
        let x = Matrix::from_rows(&[[-1.0], [1.0]]);
        let (model, _) = fit_logistic(&x, &[0, 1], 1.0, 1e-6, 1000);
        assert!(model.probability(&[-1.0]) < 0.5);
        assert!(model.probability(&[1.0]) > 0.5);
    }
}
