//! Linear classifiers trained by stochastic gradient descent, plus the kernel
//! SVM in [`smo`].

pub mod smo;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::util::{rng_from_seed, sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Logistic,
    Hinge,
    Perceptron,
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "hinge" => Ok(Loss::Hinge),
            "perceptron" => Ok(Loss::Perceptron),
            other => Err(Error::Spec(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub loss: Loss,
    pub lambda: f64,
    pub epochs: usize,
    pub eta0: f64,
}

impl LinearParams {
    pub fn new(loss: Loss) -> Self {
        LinearParams {
            loss,
            lambda: 1e-4,
            epochs: 20,
            eta0: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: Loss,
    pub lambda: f64,
    pub epochs: usize,
    /// `eta_t = eta0 / (1 + eta0 * lambda * t)`; the perceptron uses a unit step.
    pub schedule: String,
}

impl LinearModel {
    pub fn decision(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows()
            .iter()
            .map(|r| r.dot_dense(&self.weights) + self.bias)
            .collect()
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        self.decision(x).into_iter().map(sigmoid).collect()
    }
}

/// Per-epoch objective values at the running average of all iterates.
#[derive(Debug, Clone, Default)]
pub struct EpochTrace {
    pub averaged_objective: Vec<f64>,
    pub mistakes: Vec<usize>,
}

pub fn fit_linear(x: &SparseMatrix, y: &[Label], params: &LinearParams, seed: u64) -> Result<LinearModel> {
    fit_linear_traced(x, y, params, seed).map(|(m, _)| m)
}

pub fn fit_linear_traced(
    x: &SparseMatrix,
    y: &[Label],
    params: &LinearParams,
    seed: u64,
) -> Result<(LinearModel, EpochTrace)> {
    if params.epochs < 1 {
        return Err(Error::Parameter("epochs must be >= 1".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if params.lambda < 0.0 || params.eta0 <= 0.0 {
        return Err(Error::Parameter("lambda must be >= 0 and eta0 > 0".into()));
    }
    let dim = x.dim();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut rng = rng_from_seed(seed);
    let mut t: u64 = 0;
    let mut trace = EpochTrace::default();
    let track_average = params.loss == Loss::Hinge;
    let (mut w_sum, mut b_sum) = (vec![0.0; dim], 0.0);

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let row = x.row(i);
            let s = row.dot_dense(&w) + b;
            match params.loss {
                Loss::Perceptron => {
                    let target = if y[i] == 1 { 1.0 } else { -1.0 };
                    if target * s <= 0.0 {
                        mistakes += 1;
                        for (j, v) in row.iter() {
                            w[j] += target * v;
                        }
                        b += target;
                    }
                }
                Loss::Logistic | Loss::Hinge => {
                    let eta = params.eta0 / (1.0 + params.eta0 * params.lambda * t as f64);
                    let shrink = 1.0 - eta * params.lambda;
                    if shrink != 1.0 {
                        w.iter_mut().for_each(|v| *v *= shrink);
                    }
                    let step = if params.loss == Loss::Logistic {
                        // d/ds of the per-sample cross-entropy
                        sigmoid(s) - y[i] as f64
                    } else {
                        let target = if y[i] == 1 { 1.0 } else { -1.0 };
                        if target * s < 1.0 {
                            mistakes += 1;
                            -target
                        } else {
                            0.0
                        }
                    };
                    if step != 0.0 {
                        for (j, v) in row.iter() {
                            w[j] -= eta * step * v;
                        }
                        b -= eta * step;
                    }
                }
            }
            t += 1;
            if track_average {
                w_sum.iter_mut().zip(&w).for_each(|(a, v)| *a += v);
                b_sum += b;
            }
        }
        trace.mistakes.push(mistakes);
        if track_average {
            let avg: Vec<f64> = w_sum.iter().map(|v| v / t as f64).collect();
            trace
                .averaged_objective
                .push(hinge_objective(&avg, b_sum / t as f64, x, y, params.lambda));
        }
    }

    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::Data("linear model diverged".into()));
    }
    Ok((
        LinearModel {
            weights: w,
            bias: b,
            loss: params.loss,
            lambda: params.lambda,
            epochs: params.epochs,
            schedule: match params.loss {
                Loss::Perceptron => "unit".into(),
                _ => "optimal".into(),
            },
        },
        trace,
    ))
}

/// Mean hinge loss plus `lambda/2 |w|^2`.
pub fn hinge_objective(w: &[f64], bias: f64, x: &SparseMatrix, y: &[Label], lambda: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let data: f64 = x
        .rows()
        .iter()
        .zip(y)
        .map(|(r, &l)| {
            let target = if l == 1 { 1.0 } else { -1.0 };
            (1.0 - target * (r.dot_dense(w) + bias)).max(0.0)
        })
        .sum();
    data / n + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Mean cross-entropy plus `lambda/2 |w|^2` and its exact gradient
/// `(dw, dbias)`.
pub fn logistic_loss_grad(
    w: &[f64],
    bias: f64,
    x: &SparseMatrix,
    y: &[Label],
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = y.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; w.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.rows().iter().zip(y) {
        let s = row.dot_dense(w) + bias;
        loss += if label == 1 { softplus(-s) } else { softplus(s) };
        let r = sigmoid(s) - label as f64;
        for (j, v) in row.iter() {
            grad[j] += r * v;
        }
        grad_b += r;
    }
    loss /= n;
    grad_b /= n;
    for (g, wj) in grad.iter_mut().zip(w) {
        *g = *g / n + lambda * wj;
    }
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad, grad_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> (SparseMatrix, Vec<Label>) {
        (
            SparseMatrix::from_dense_rows(1, &[vec![1.0], vec![-1.0]]).unwrap(),
            vec![1, 0],
        )
    }

    #[test]
    fn perceptron_separates_two_points() {
        let (x, y) = line();
        let (m, trace) = fit_linear_traced(&x, &y, &LinearParams::new(Loss::Perceptron), 3).unwrap();
        assert_eq!(*trace.mistakes.last().unwrap(), 0);
        let labels: Vec<Label> = m.decision(&x).iter().map(|&s| u8::from(s > 0.0)).collect();
        assert_eq!(labels, y);
    }

    #[test]
    fn logistic_gradient_at_zero() {
        let x = SparseMatrix::from_dense_rows(1, &[vec![1.0]]).unwrap();
        let (loss, g, gb) = logistic_loss_grad(&[0.0], 0.0, &x, &[1], 0.0);
        assert!((g[0] + 0.5).abs() < 1e-15);
        assert!((gb + 0.5).abs() < 1e-15);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn balanced_zero_weights_loss_is_ln2() {
        let (x, y) = line();
        let (loss, _, _) = logistic_loss_grad(&[0.0], 0.0, &x, &y, 0.3);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_features_bias_gradient() {
        let x = SparseMatrix::from_dense_rows(2, &vec![vec![0.0, 0.0]; 3]).unwrap();
        let y = [1, 0, 1];
        let b = 0.3;
        let (_, g, gb) = logistic_loss_grad(&[0.0, 0.0], b, &x, &y, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        let expected = y.iter().map(|&l| sigmoid(b) - l as f64).sum::<f64>() / 3.0;
        assert!((gb - expected).abs() < 1e-15);
    }

    #[test]
    fn heavy_regularization_shrinks_toward_half() {
        let (x, y) = line();
        let mut p = LinearParams::new(Loss::Logistic);
        p.lambda = 1e6;
        p.eta0 = 1e-7;
        let m = fit_linear(&x, &y, &p, 1).unwrap();
        assert!(m.weights[0].abs() < 1e-3);
        for prob in m.predict_proba(&x) {
            assert!((prob - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_epochs_rejected() {
        let (x, y) = line();
        let mut p = LinearParams::new(Loss::Hinge);
        p.epochs = 0;
        assert!(matches!(fit_linear(&x, &y, &p, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn same_seed_same_model() {
        let x = SparseMatrix::from_dense_rows(2, &[vec![1.0, 0.2], vec![0.1, 1.0], vec![0.9, 0.0], vec![0.0, 0.7]]).unwrap();
        let y = [1, 0, 1, 0];
        let p = LinearParams::new(Loss::Logistic);
        assert_eq!(fit_linear(&x, &y, &p, 9).unwrap(), fit_linear(&x, &y, &p, 9).unwrap());
    }
}
