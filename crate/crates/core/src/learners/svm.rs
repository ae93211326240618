//! Soft-margin SVM trained by SMO on the dual
//! `min 0.5 a'Qa - e'a` s.t. `0 <= a <= C`, `y'a = 0`, `Q_ij = y_i y_j K_ij`.
//!
//! The working pair is the maximal violating pair; the two-variable update
//! and the bias follow libsvm.

use serde::{Deserialize, Serialize};

use crate::matrix::{squared_distance, Matrix};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }
}

/// `1 / (d * Var(X))` with the variance taken over every element. Falls back
/// to 1 for constant input.
pub fn gamma_scale(x: &Matrix) -> f64 {
    let data = x.as_slice();
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

/// Dense row-major Gram matrix.
pub fn kernel_matrix(x: &Matrix, kernel: &Kernel) -> Matrix {
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    /// Decision function is `sum_i a_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the dual for labels `y` in {-1, +1}. Converges once the maximal
/// KKT violation `max_{I_up} -y_t G_t - min_{I_low} -y_t G_t` drops below
/// `tol`.
pub fn smo_solve(k: &Matrix, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of the dual objective: G = Q a - e
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let (kii, kjj, kij) = (k.get(i, i), k.get(j, j), k.get(i, j));
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (ai_old, aj_old);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - ai_old, aj - aj_old);
        let (ki, kj) = (k.row(i), k.row(j));
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    // rho as in libsvm: average over free vectors, else midpoint of bounds
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    };
    SmoSolution {
        alphas: alpha,
        bias: -rho,
        iterations,
        converged,
    }
}

/// Dual objective `0.5 a'Qa - sum a` (to be minimized).
pub fn dual_objective(k: &Matrix, y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let ki = k.row(i);
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * ki[j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Matrix,
    /// `a_i * y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

pub(crate) fn fit_svm(x: &Matrix, y: &[u8], kernel: Kernel, c: f64, tol: f64, max_iter: usize) -> (SvmModel, bool) {
    let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let gram = kernel_matrix(x, &kernel);
    let sol = smo_solve(&gram, &signs, c, tol, max_iter);
    let support: Vec<usize> = (0..y.len()).filter(|&i| sol.alphas[i] > 0.0).collect();
    let dual_coef = support.iter().map(|&i| sol.alphas[i] * signs[i]).collect();
    (
        SvmModel {
            kernel,
            support_vectors: x.select_rows(&support),
            dual_coef,
            bias: sol.bias,
        },
        sol.converged,
    )
}
