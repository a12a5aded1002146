//! Gaussian, multinomial and Bernoulli naive Bayes.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::discriminant::{densify_topk, DenseProjection};
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbVariant {
    Gaussian,
    Multinomial,
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum NbTables {
    Multinomial {
        alpha: f64,
        /// ln P(term | label)
        log_likelihood: [Vec<f64>; 2],
    },
    Bernoulli {
        alpha: f64,
        log_present: [Vec<f64>; 2],
        log_absent: [Vec<f64>; 2],
        /// Sum of `log_absent`, the log likelihood of the empty document.
        log_all_absent: [f64; 2],
    },
    Gaussian {
        epsilon: f64,
        projection: DenseProjection,
        mean: [Vec<f64>; 2],
        variance: [Vec<f64>; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub dim: usize,
    pub log_prior: [f64; 2],
    pub tables: NbTables,
}

fn check_inputs(x: &SparseMatrix, y: &[Label]) -> Result<[usize; 2]> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    let mut counts = [0usize; 2];
    for &l in y {
        counts[l as usize] += 1;
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::Data("naive Bayes needs both labels".into()));
    }
    Ok(counts)
}

fn log_priors(counts: [usize; 2]) -> [f64; 2] {
    let n = (counts[0] + counts[1]) as f64;
    [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()]
}

/// `P(t|c) = (count(t,c) + alpha) / (total(c) + alpha * V)`.
pub fn fit_multinomial(x: &SparseMatrix, y: &[Label], alpha: f64) -> Result<NaiveBayesModel> {
    let counts = check_inputs(x, y)?;
    if alpha <= 0.0 {
        return Err(Error::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let v = x.dim();
    let mut feature_totals = [vec![0.0; v], vec![0.0; v]];
    for (row, &label) in x.rows().iter().zip(y) {
        for (i, value) in row.iter() {
            if value < 0.0 {
                return Err(Error::Data(format!(
                    "multinomial naive Bayes needs non-negative features, found {value}"
                )));
            }
            feature_totals[label as usize][i] += value;
        }
    }
    let log_likelihood = feature_totals.map(|totals| {
        let denom = totals.iter().sum::<f64>() + alpha * v as f64;
        totals.iter().map(|c| ((c + alpha) / denom).ln()).collect()
    });
    Ok(NaiveBayesModel {
        dim: v,
        log_prior: log_priors(counts),
        tables: NbTables::Multinomial {
            alpha,
            log_likelihood,
        },
    })
}

/// Presence indicators (`value > 0`) with Laplace smoothing:
/// `P(t present | c) = (docs(t,c) + alpha) / (docs(c) + 2 alpha)`.
pub fn fit_bernoulli(x: &SparseMatrix, y: &[Label], alpha: f64) -> Result<NaiveBayesModel> {
    let counts = check_inputs(x, y)?;
    if alpha <= 0.0 {
        return Err(Error::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let v = x.dim();
    let mut present = [vec![0usize; v], vec![0usize; v]];
    for (row, &label) in x.rows().iter().zip(y) {
        for (i, value) in row.iter() {
            if value > 0.0 {
                present[label as usize][i] += 1;
            }
        }
    }
    let mut log_present = [Vec::new(), Vec::new()];
    let mut log_absent = [Vec::new(), Vec::new()];
    let mut log_all_absent = [0.0; 2];
    for c in 0..2 {
        let denom = counts[c] as f64 + 2.0 * alpha;
        for &n in &present[c] {
            let p = (n as f64 + alpha) / denom;
            log_present[c].push(p.ln());
            log_absent[c].push((1.0 - p).ln());
        }
        log_all_absent[c] = log_absent[c].iter().sum();
    }
    Ok(NaiveBayesModel {
        dim: v,
        log_prior: log_priors(counts),
        tables: NbTables::Bernoulli {
            alpha,
            log_present,
            log_absent,
            log_all_absent,
        },
    })
}

/// Per-label per-feature mean and variance on the top-k projection. Variances
/// are clamped below by `var_smoothing * max feature variance` (or
/// `var_smoothing` when every feature is constant).
pub fn fit_gaussian(
    x: &SparseMatrix,
    y: &[Label],
    var_smoothing: f64,
    top_k: usize,
) -> Result<NaiveBayesModel> {
    let counts = check_inputs(x, y)?;
    let (dense, projection) = densify_topk(x, top_k)?;
    fit_gaussian_dense(&dense, y, counts, var_smoothing, projection, x.dim())
}

fn fit_gaussian_dense(
    dense: &[Vec<f64>],
    y: &[Label],
    counts: [usize; 2],
    var_smoothing: f64,
    projection: DenseProjection,
    dim: usize,
) -> Result<NaiveBayesModel> {
    let k = projection.len();
    let n = dense.len() as f64;
    let mut overall_mean = vec![0.0; k];
    let mut mean = [vec![0.0; k], vec![0.0; k]];
    for (row, &label) in dense.iter().zip(y) {
        for j in 0..k {
            mean[label as usize][j] += row[j];
            overall_mean[j] += row[j];
        }
    }
    for j in 0..k {
        overall_mean[j] /= n;
        for c in 0..2 {
            mean[c][j] /= counts[c] as f64;
        }
    }
    let mut variance = [vec![0.0; k], vec![0.0; k]];
    let mut overall_var = vec![0.0; k];
    for (row, &label) in dense.iter().zip(y) {
        for j in 0..k {
            let d = row[j] - mean[label as usize][j];
            variance[label as usize][j] += d * d;
            let o = row[j] - overall_mean[j];
            overall_var[j] += o * o;
        }
    }
    let max_var = overall_var.iter().map(|v| v / n).fold(0.0, f64::max);
    let epsilon = var_smoothing * if max_var > 0.0 { max_var } else { 1.0 };
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!(
            "var_smoothing must be > 0, got {var_smoothing}"
        )));
    }
    for c in 0..2 {
        for v in &mut variance[c] {
            *v = (*v / counts[c] as f64).max(epsilon);
        }
    }
    Ok(NaiveBayesModel {
        dim,
        log_prior: log_priors(counts),
        tables: NbTables::Gaussian {
            epsilon,
            projection,
            mean,
            variance,
        },
    })
}

/// Gaussian naive Bayes directly on dense rows (identity projection).
pub fn fit_gaussian_on_dense(dense: &[Vec<f64>], y: &[Label], var_smoothing: f64) -> Result<NaiveBayesModel> {
    let dim = dense.first().map_or(0, Vec::len);
    let x = SparseMatrix::from_dense_rows(dim, dense)?;
    let counts = check_inputs(&x, y)?;
    let projection = DenseProjection {
        indices: (0..dim as u32).collect(),
        k: dim.max(1),
    };
    fit_gaussian_dense(dense, y, counts, var_smoothing, projection, dim)
}

pub fn fit_naive_bayes(
    variant: NbVariant,
    x: &SparseMatrix,
    y: &[Label],
    smoothing: f64,
    top_k: usize,
) -> Result<NaiveBayesModel> {
    match variant {
        NbVariant::Multinomial => fit_multinomial(x, y, smoothing),
        NbVariant::Bernoulli => fit_bernoulli(x, y, smoothing),
        NbVariant::Gaussian => fit_gaussian(x, y, smoothing, top_k),
    }
}

fn gaussian_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var)
}

impl NaiveBayesModel {
    pub fn variant(&self) -> NbVariant {
        match self.tables {
            NbTables::Multinomial { .. } => NbVariant::Multinomial,
            NbTables::Bernoulli { .. } => NbVariant::Bernoulli,
            NbTables::Gaussian { .. } => NbVariant::Gaussian,
        }
    }

    /// Per-label `ln P(label) + sum ln P(x_t | label)`.
    pub fn log_joint(&self, x: &SparseVector) -> Result<[f64; 2]> {
        if let Some(max) = x.max_index() {
            if max >= self.dim {
                return Err(Error::Shape(format!(
                    "feature {max} outside model dimension {}",
                    self.dim
                )));
            }
        }
        let mut out = self.log_prior;
        match &self.tables {
            NbTables::Multinomial { log_likelihood, .. } => {
                for c in 0..2 {
                    out[c] += x.iter().map(|(i, v)| v * log_likelihood[c][i]).sum::<f64>();
                }
            }
            NbTables::Bernoulli {
                log_present,
                log_absent,
                log_all_absent,
                ..
            } => {
                for c in 0..2 {
                    out[c] += log_all_absent[c];
                    for (i, v) in x.iter() {
                        if v > 0.0 {
                            out[c] += log_present[c][i] - log_absent[c][i];
                        }
                    }
                }
            }
            NbTables::Gaussian {
                projection,
                mean,
                variance,
                ..
            } => {
                let dense = projection.project(x);
                for c in 0..2 {
                    out[c] += dense
                        .iter()
                        .zip(&mean[c])
                        .zip(&variance[c])
                        .map(|((&v, &m), &s)| gaussian_log_pdf(v, m, s))
                        .sum::<f64>();
                }
            }
        }
        Ok(out)
    }

    pub fn predict_proba_row(&self, x: &SparseVector) -> Result<f64> {
        let j = self.log_joint(x)?;
        Ok(posterior_of_one(j))
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        x.rows().iter().map(|r| self.predict_proba_row(r)).collect()
    }
}

/// `exp(j1) / (exp(j0) + exp(j1))` computed stably.
pub fn posterior_of_one(joint: [f64; 2]) -> f64 {
    let m = joint[0].max(joint[1]);
    let e0 = (joint[0] - m).exp();
    let e1 = (joint[1] - m).exp();
    e1 / (e0 + e1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // d1 = "kötü kötü" (1), d2 = "iyi" (0); columns [kötü, iyi]
    fn two_docs() -> (SparseMatrix, Vec<Label>) {
        let x = SparseMatrix::from_dense_rows(2, &[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        (x, vec![1, 0])
    }

    #[test]
    fn multinomial_hand_values() {
        let (x, y) = two_docs();
        let m = fit_multinomial(&x, &y, 1.0).unwrap();
        let NbTables::Multinomial { log_likelihood, .. } = &m.tables else {
            unreachable!()
        };
        assert!((log_likelihood[1][0].exp() - 0.75).abs() < 1e-12);
        assert!((log_likelihood[0][0].exp() - 1.0 / 3.0).abs() < 1e-12);
        for c in 0..2 {
            let s: f64 = log_likelihood[c].iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
        let q = SparseVector::from_dense(&[1.0, 0.0]);
        let j = m.log_joint(&q).unwrap();
        assert!((j[1] - 0.375f64.ln()).abs() < 1e-12);
        assert!((j[0] - (1.0f64 / 6.0).ln()).abs() < 1e-12);
        let p = m.predict_proba_row(&q).unwrap();
        assert!((p - 0.375 / (0.375 + 1.0 / 6.0)).abs() < 1e-12);
        assert!((p - 0.6923).abs() < 1e-4);
    }

    #[test]
    fn empty_document_scores_priors() {
        let (x, y) = two_docs();
        let m = fit_multinomial(&x, &y, 1.0).unwrap();
        let j = m.log_joint(&SparseVector::new()).unwrap();
        assert_eq!(j, m.log_prior);
        assert_eq!(j[0], j[1]);
    }

    #[test]
    fn bernoulli_presence_probability() {
        let (x, y) = two_docs();
        let m = fit_bernoulli(&x, &y, 1.0).unwrap();
        let NbTables::Bernoulli { log_present, .. } = &m.tables else {
            unreachable!()
        };
        assert!((log_present[1][0].exp() - 2.0 / 3.0).abs() < 1e-12);
        for c in 0..2 {
            for lp in &log_present[c] {
                let p = lp.exp();
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }

    #[test]
    fn gaussian_symmetry() {
        let m = fit_gaussian_on_dense(&[vec![-1.0], vec![1.0]], &[0, 1], 1e-9).unwrap();
        // single sample per label: variance clamps to epsilon
        let NbTables::Gaussian { variance, epsilon, .. } = &m.tables else {
            unreachable!()
        };
        assert!(variance[0][0] >= *epsilon && *epsilon > 0.0);
        let p = m.predict_proba_row(&SparseVector::new()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);

        let m = fit_gaussian_on_dense(
            &[vec![-1.5], vec![-0.5], vec![0.5], vec![1.5]],
            &[0, 0, 1, 1],
            1e-9,
        )
        .unwrap();
        assert!((m.predict_proba_row(&SparseVector::new()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn multinomial_rejects_negative() {
        let x = SparseMatrix::from_dense_rows(1, &[vec![-1.0], vec![1.0]]).unwrap();
        assert!(matches!(fit_multinomial(&x, &[0, 1], 1.0), Err(Error::Data(_))));
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let (x, y) = two_docs();
        let m = fit_multinomial(&x, &y, 1.0).unwrap();
        let q = SparseVector::from_pairs(vec![(5, 1.0)]);
        assert!(matches!(m.log_joint(&q), Err(Error::Shape(_))));
    }
}
