//! Kernel SVM trained with sequential minimal optimization.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::util::{rng_from_seed, sigmoid};

const KERNEL_CACHE_LIMIT: usize = 3000;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &SparseVector, b: &SparseVector) -> f64 {
        match *self {
            Kernel::Linear => a.dot(b),
            Kernel::Rbf { gamma } => {
                let d2 = (a.squared_norm() + b.squared_norm() - 2.0 * a.dot(b)).max(0.0);
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    Linear,
    /// `None` picks `1 / sum of per-feature variances`.
    Rbf(Option<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    pub kernel: KernelChoice,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            c: 1.0,
            kernel: KernelChoice::Rbf(None),
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoModel {
    pub support_vectors: Vec<SparseVector>,
    /// `alpha_i * y_i` with `y_i` in {-1, +1}.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub converged: bool,
    pub passes: usize,
}

impl SmoModel {
    pub fn decision_row(&self, x: &SparseVector) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows().iter().map(|r| self.decision_row(r)).collect()
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        self.decision(x).into_iter().map(sigmoid).collect()
    }
}

/// Sum over features of the population variance.
pub fn total_feature_variance(x: &SparseMatrix) -> f64 {
    let n = x.n_rows() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut sum = vec![0.0; x.dim()];
    let mut sum_sq = vec![0.0; x.dim()];
    for row in x.rows() {
        for (j, v) in row.iter() {
            sum[j] += v;
            sum_sq[j] += v * v;
        }
    }
    sum.iter()
        .zip(&sum_sq)
        .map(|(s, q)| (q / n - (s / n).powi(2)).max(0.0))
        .sum()
}

pub fn default_gamma(x: &SparseMatrix) -> f64 {
    let total = total_feature_variance(x);
    if total > 0.0 && total.is_finite() {
        1.0 / total
    } else {
        1.0
    }
}

enum Gram<'a> {
    Cached(Vec<Vec<f64>>),
    Lazy(&'a [SparseVector], Kernel),
}

impl Gram<'_> {
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Gram::Cached(k) => k[i][j],
            Gram::Lazy(rows, kernel) => kernel.eval(&rows[i], &rows[j]),
        }
    }
}

pub fn fit_svm_smo(x: &SparseMatrix, y: &[Label], params: &SmoParams, seed: u64) -> Result<SmoModel> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if !(params.c > 0.0) || params.tol < 0.0 || params.max_passes == 0 {
        return Err(Error::Parameter("C must be > 0, tol >= 0, max_passes >= 1".into()));
    }
    let kernel = match params.kernel {
        KernelChoice::Linear => Kernel::Linear,
        KernelChoice::Rbf(Some(g)) if g > 0.0 => Kernel::Rbf { gamma: g },
        KernelChoice::Rbf(Some(g)) => return Err(Error::Parameter(format!("gamma must be > 0, got {g}"))),
        KernelChoice::Rbf(None) => Kernel::Rbf { gamma: default_gamma(x) },
    };
    let n = y.len();
    let rows = x.rows();
    let gram = if n <= KERNEL_CACHE_LIMIT {
        Gram::Cached(
            (0..n)
                .map(|i| (0..n).map(|j| kernel.eval(&rows[i], &rows[j])).collect())
                .collect(),
        )
    } else {
        Gram::Lazy(rows, kernel)
    };
    let t: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut b = 0.0;
    // E_k = f(x_k) - t_k
    let mut err: Vec<f64> = t.iter().map(|v| -v).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let mut converged = false;
    let mut passes = 0;
    while passes < params.max_passes {
        passes += 1;
        let mut changed = 0;
        for &i in &order {
            let r = t[i] * err[i];
            if !((r < -params.tol && alpha[i] < c) || (r > params.tol && alpha[i] > 0.0)) {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_gap = -1.0;
            for &j in &order {
                if j == i {
                    continue;
                }
                let gap = (err[i] - err[j]).abs();
                if gap > best_gap {
                    best_gap = gap;
                    best = Some(j);
                }
            }
            let Some(first) = best else { continue };
            let candidates = std::iter::once(first).chain(order.iter().copied().filter(|&j| j != i && j != first));
            for j in candidates {
                if take_step(i, j, &gram, &t, c, &mut alpha, &mut b, &mut err) {
                    changed += 1;
                    break;
                }
            }
        }
        if changed == 0 {
            converged = true;
            break;
        }
    }

    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for k in 0..n {
        if alpha[k] > 0.0 {
            support_vectors.push(rows[k].clone());
            dual_coef.push(alpha[k] * t[k]);
        }
    }
    if !b.is_finite() || dual_coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("SMO produced non-finite coefficients".into()));
    }
    Ok(SmoModel {
        support_vectors,
        dual_coef,
        bias: b,
        kernel,
        c,
        converged,
        passes,
    })
}

#[allow(clippy::too_many_arguments)]
fn take_step(
    i: usize,
    j: usize,
    gram: &Gram<'_>,
    t: &[f64],
    c: f64,
    alpha: &mut [f64],
    b: &mut f64,
    err: &mut [f64],
) -> bool {
    let (ai, aj) = (alpha[i], alpha[j]);
    let (lo, hi) = if t[i] != t[j] {
        ((aj - ai).max(0.0), (c + aj - ai).min(c))
    } else {
        ((ai + aj - c).max(0.0), (ai + aj).min(c))
    };
    if hi - lo < MIN_STEP {
        return false;
    }
    let (kii, kjj, kij) = (gram.get(i, i), gram.get(j, j), gram.get(i, j));
    let eta = 2.0 * kij - kii - kjj;
    if eta >= 0.0 {
        return false;
    }
    let aj_new = (aj - t[j] * (err[i] - err[j]) / eta).clamp(lo, hi);
    if (aj_new - aj).abs() < MIN_STEP {
        return false;
    }
    let ai_new = (ai + t[i] * t[j] * (aj - aj_new)).clamp(0.0, c);
    let (di, dj) = (ai_new - ai, aj_new - aj);
    let b1 = *b - err[i] - t[i] * di * kii - t[j] * dj * kij;
    let b2 = *b - err[j] - t[i] * di * kij - t[j] * dj * kjj;
    let b_new = if ai_new > 0.0 && ai_new < c {
        b1
    } else if aj_new > 0.0 && aj_new < c {
        b2
    } else {
        0.5 * (b1 + b2)
    };
    let db = b_new - *b;
    for (k, e) in err.iter_mut().enumerate() {
        *e += t[i] * di * gram.get(i, k) + t[j] * dj * gram.get(j, k) + db;
    }
    alpha[i] = ai_new;
    alpha[j] = aj_new;
    *b = b_new;
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points(copies: usize) -> (SparseMatrix, Vec<Label>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..copies {
            rows.push(vec![-1.0]);
            y.push(0);
            rows.push(vec![1.0]);
            y.push(1);
        }
        (SparseMatrix::from_dense_rows(1, &rows).unwrap(), y)
    }

    fn linear(c: f64) -> SmoParams {
        SmoParams {
            c,
            kernel: KernelChoice::Linear,
            ..SmoParams::default()
        }
    }

    #[test]
    fn two_point_analytic_solution() {
        let (x, y) = two_points(1);
        let m = fit_svm_smo(&x, &y, &linear(10.0), 0).unwrap();
        assert!(m.converged);
        assert_eq!(m.support_vectors.len(), 2);
        assert!(m.bias.abs() < 1e-12);
        let at_zero = m.decision_row(&SparseVector::from_dense(&[0.0]));
        assert!(at_zero.abs() < 1e-12);
        for &a in &m.dual_coef {
            assert!((a.abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn duplication_keeps_decision_function() {
        let (x1, y1) = two_points(1);
        let (x3, y3) = two_points(3);
        let a = fit_svm_smo(&x1, &y1, &linear(10.0), 5).unwrap();
        let b = fit_svm_smo(&x3, &y3, &linear(10.0), 5).unwrap();
        for v in [-2.0, -0.3, 0.0, 0.4, 1.7] {
            let p = SparseVector::from_dense(&[v]);
            assert!((a.decision_row(&p) - b.decision_row(&p)).abs() < 1e-6);
        }
    }

    #[test]
    fn gamma_guard_on_constant_features() {
        let x = SparseMatrix::from_dense_rows(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(default_gamma(&x), 1.0);
        let y = SparseMatrix::from_dense_rows(1, &[vec![0.0], vec![2.0]]).unwrap();
        assert!((default_gamma(&y) - 1.0).abs() < 1e-15);
    }
}
