//! Linear and quadratic discriminant analysis on a dense top-k projection.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::util::sigmoid;

/// Variance used when a label has too few samples to estimate a covariance.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Retained feature indices, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseProjection {
    pub indices: Vec<u32>,
    pub k: usize,
}

impl DenseProjection {
    /// Top `k` features by document frequency, ties by lower index.
    pub fn top_k(df: &[usize], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("projection size k must be >= 1".into()));
        }
        let mut order: Vec<u32> = (0..df.len() as u32).collect();
        order.sort_by(|&a, &b| df[b as usize].cmp(&df[a as usize]).then(a.cmp(&b)));
        order.truncate(k.min(df.len()));
        order.sort_unstable();
        Ok(DenseProjection { indices: order, k })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn project(&self, row: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; self.indices.len()];
        let (mut a, mut b) = (0, 0);
        let (ri, rv) = (row.indices(), row.values());
        while a < ri.len() && b < self.indices.len() {
            match ri[a].cmp(&self.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    out[b] = rv[a];
                    a += 1;
                    b += 1;
                }
            }
        }
        out
    }

    pub fn project_all(&self, x: &SparseMatrix) -> Vec<Vec<f64>> {
        x.rows().iter().map(|r| self.project(r)).collect()
    }
}

/// Dense rows over the `k` most frequent features of `x`, plus the projection used.
pub fn densify_topk(x: &SparseMatrix, k: usize) -> Result<(Vec<Vec<f64>>, DenseProjection)> {
    let projection = DenseProjection::top_k(&x.column_support(), k)?;
    Ok((projection.project_all(x), projection))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminantKind {
    Lda,
    Qda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DiscriminantScorer {
    /// score_c(x) = coef_c . x + intercept_c
    Linear {
        coef: [Vec<f64>; 2],
        intercept: [f64; 2],
    },
    /// score_c(x) = -0.5 logdet_c - 0.5 |L_c^-1 (x - mean_c)|^2 + log_prior_c
    Quadratic {
        means: [Vec<f64>; 2],
        /// Row-major packed lower Cholesky factors.
        cholesky: [Vec<f64>; 2],
        log_det: [f64; 2],
        log_prior: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantModel {
    pub kind: DiscriminantKind,
    pub projection: Option<DenseProjection>,
    pub dim: usize,
    pub scorer: DiscriminantScorer,
}

fn class_stats(x: &[Vec<f64>], y: &[Label], dim: usize) -> ([usize; 2], [Vec<f64>; 2]) {
    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; dim], vec![0.0; dim]];
    for (row, &label) in x.iter().zip(y) {
        counts[label as usize] += 1;
        for (m, v) in means[label as usize].iter_mut().zip(row) {
            *m += v;
        }
    }
    for c in 0..2 {
        if counts[c] > 0 {
            for m in &mut means[c] {
                *m /= counts[c] as f64;
            }
        }
    }
    (counts, means)
}

fn scatter(x: &[Vec<f64>], y: &[Label], label: Option<Label>, means: &[Vec<f64>; 2], dim: usize) -> DMatrix<f64> {
    let rows: Vec<usize> = (0..x.len())
        .filter(|&i| label.map_or(true, |l| y[i] == l))
        .collect();
    let mut centered = DMatrix::<f64>::zeros(rows.len(), dim);
    for (r, &i) in rows.iter().enumerate() {
        let m = &means[y[i] as usize];
        for j in 0..dim {
            centered[(r, j)] = x[i][j] - m[j];
        }
    }
    centered.transpose() * &centered
}

/// Cholesky with escalating diagonal jitter when the matrix is numerically singular.
fn robust_cholesky(mut cov: DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("covariance has non-finite entries".into()));
    }
    let n = cov.nrows();
    let scale = (0..n).map(|i| cov[(i, i)].abs()).fold(0.0, f64::max).max(VARIANCE_FLOOR);
    let mut jitter = 0.0;
    for step in 0..12 {
        if let Some(ch) = cov.clone().cholesky() {
            return Ok(ch);
        }
        let next = scale * 1e-12 * 10f64.powi(step);
        for i in 0..n {
            cov[(i, i)] += next - jitter;
        }
        jitter = next;
    }
    Err(Error::Data("covariance is not positive definite".into()))
}

fn pack_lower(l: &DMatrix<f64>) -> Vec<f64> {
    let n = l.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            out.push(l[(i, j)]);
        }
    }
    out
}

fn check_dense(x: &[Vec<f64>], y: &[Label], dim: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape(format!("every row must have {dim} columns")));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite feature value".into()));
    }
    Ok(())
}

/// Pooled covariance shrunk toward its diagonal by `shrinkage`.
pub fn fit_lda(x: &[Vec<f64>], y: &[Label], dim: usize, shrinkage: f64) -> Result<DiscriminantModel> {
    check_dense(x, y, dim)?;
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::Parameter(format!("shrinkage must lie in [0, 1], got {shrinkage}")));
    }
    let (counts, means) = class_stats(x, y, dim);
    let n = x.len();
    let mut cov = if counts.iter().all(|&c| c >= 2) && n > 2 {
        scatter(x, y, None, &means, dim) / (n - 2) as f64
    } else {
        DMatrix::identity(dim, dim) * VARIANCE_FLOOR
    };
    if shrinkage > 0.0 {
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    cov[(i, j)] *= 1.0 - shrinkage;
                } else {
                    cov[(i, i)] = cov[(i, i)].max(VARIANCE_FLOOR);
                }
            }
        }
    }
    let ch = robust_cholesky(cov)?;
    let mut coef = [Vec::new(), Vec::new()];
    let mut intercept = [0.0; 2];
    for c in 0..2 {
        let mu = DVector::from_column_slice(&means[c]);
        let w = ch.solve(&mu);
        let prior = counts[c] as f64 / n as f64;
        intercept[c] = -0.5 * mu.dot(&w) + prior.ln();
        coef[c] = w.iter().copied().collect();
    }
    Ok(DiscriminantModel {
        kind: DiscriminantKind::Lda,
        projection: None,
        dim,
        scorer: DiscriminantScorer::Linear { coef, intercept },
    })
}

/// Per-label covariances with ridge `reg * I`.
pub fn fit_qda(x: &[Vec<f64>], y: &[Label], dim: usize, reg: f64) -> Result<DiscriminantModel> {
    check_dense(x, y, dim)?;
    if reg < 0.0 {
        return Err(Error::Parameter(format!("reg must be >= 0, got {reg}")));
    }
    let (counts, means) = class_stats(x, y, dim);
    let n = x.len();
    let mut cholesky = [Vec::new(), Vec::new()];
    let mut log_det = [0.0; 2];
    let mut log_prior = [0.0; 2];
    for c in 0..2 {
        let mut cov = if counts[c] >= 2 {
            scatter(x, y, Some(c as Label), &means, dim) / (counts[c] - 1) as f64
        } else {
            DMatrix::identity(dim, dim) * VARIANCE_FLOOR
        };
        for i in 0..dim {
            cov[(i, i)] += reg;
        }
        let ch = robust_cholesky(cov)?;
        let l = ch.l();
        log_det[c] = 2.0 * (0..dim).map(|i| l[(i, i)].ln()).sum::<f64>();
        cholesky[c] = pack_lower(&l);
        log_prior[c] = (counts[c] as f64 / n as f64).ln();
    }
    Ok(DiscriminantModel {
        kind: DiscriminantKind::Qda,
        projection: None,
        dim,
        scorer: DiscriminantScorer::Quadratic {
            means,
            cholesky,
            log_det,
            log_prior,
        },
    })
}

/// Fits on the top-k projection of a sparse matrix.
pub fn fit_discriminant(
    kind: DiscriminantKind,
    x: &SparseMatrix,
    y: &[Label],
    top_k: usize,
    regularization: f64,
) -> Result<DiscriminantModel> {
    let (dense, projection) = densify_topk(x, top_k)?;
    let dim = projection.len();
    let mut model = match kind {
        DiscriminantKind::Lda => fit_lda(&dense, y, dim, regularization)?,
        DiscriminantKind::Qda => fit_qda(&dense, y, dim, regularization)?,
    };
    model.projection = Some(projection);
    Ok(model)
}

fn quadratic_form(packed: &[f64], diff: &[f64]) -> f64 {
    // forward substitution L z = diff
    let n = diff.len();
    let mut z = vec![0.0; n];
    let mut offset = 0;
    let mut acc = 0.0;
    for i in 0..n {
        let row = &packed[offset..offset + i + 1];
        let s: f64 = row[..i].iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
        z[i] = (diff[i] - s) / row[i];
        acc += z[i] * z[i];
        offset += i + 1;
    }
    acc
}

impl DiscriminantModel {
    pub fn scores_dense(&self, x: &[f64]) -> [f64; 2] {
        match &self.scorer {
            DiscriminantScorer::Linear { coef, intercept } => {
                let mut out = [0.0; 2];
                for c in 0..2 {
                    out[c] = coef[c].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + intercept[c];
                }
                out
            }
            DiscriminantScorer::Quadratic {
                means,
                cholesky,
                log_det,
                log_prior,
            } => {
                let mut out = [0.0; 2];
                for c in 0..2 {
                    let diff: Vec<f64> = x.iter().zip(&means[c]).map(|(a, m)| a - m).collect();
                    out[c] = -0.5 * log_det[c] - 0.5 * quadratic_form(&cholesky[c], &diff)
                        + log_prior[c];
                }
                out
            }
        }
    }

    pub fn predict_proba_dense(&self, x: &[f64]) -> f64 {
        let s = self.scores_dense(x);
        sigmoid(s[1] - s[0])
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows()
            .iter()
            .map(|row| match &self.projection {
                Some(p) => self.predict_proba_dense(&p.project(row)),
                None => self.predict_proba_dense(&row.to_dense(self.dim)),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let p = DenseProjection::top_k(&[5, 2, 4], 2).unwrap();
        assert_eq!(p.indices, vec![0, 2]);
        let all = DenseProjection::top_k(&[1, 1, 1], 10).unwrap();
        assert_eq!(all.indices, vec![0, 1, 2]);
        let tie = DenseProjection::top_k(&[3, 3, 3], 2).unwrap();
        assert_eq!(tie.indices, vec![0, 1]);
        let (dense, p) = densify_topk(&SparseMatrix::new(3), 2).unwrap();
        assert!(dense.is_empty());
        assert_eq!(p.len(), 2);
        assert!(DenseProjection::top_k(&[1], 0).is_err());
    }

    #[test]
    fn project_picks_columns() {
        let p = DenseProjection {
            indices: vec![1, 3],
            k: 2,
        };
        let row = SparseVector::from_dense(&[9.0, 1.0, 9.0, 2.0]);
        assert_eq!(p.project(&row), vec![1.0, 2.0]);
    }

    fn symmetric_fixture() -> (Vec<Vec<f64>>, Vec<Label>) {
        let x = vec![
            vec![-1.0, 0.5],
            vec![-1.0, -0.5],
            vec![-2.0, 0.0],
            vec![1.0, 0.5],
            vec![1.0, -0.5],
            vec![2.0, 0.0],
        ];
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn lda_midpoint_is_half() {
        let (x, y) = symmetric_fixture();
        let m = fit_lda(&x, &y, 2, 0.1).unwrap();
        assert!((m.predict_proba_dense(&[0.0, 0.0]) - 0.5).abs() < 1e-12);
        assert!(m.predict_proba_dense(&[1.5, 0.0]) > 0.9);
    }

    #[test]
    fn qda_matches_lda_with_equal_covariances() {
        let (x, y) = symmetric_fixture();
        let lda = fit_lda(&x, &y, 2, 0.0).unwrap();
        let qda = fit_qda(&x, &y, 2, 0.0).unwrap();
        for q in [[-0.3, 0.2], [0.1, -1.0], [0.7, 0.7], [-1.5, 1.2], [0.05, 0.0], [3.0, -2.0]] {
            let a = lda.predict_proba_dense(&q) > 0.5;
            let b = qda.predict_proba_dense(&q) > 0.5;
            assert_eq!(a, b, "{q:?}");
        }
    }

    #[test]
    fn singular_input_still_factorizes() {
        // second feature constant zero
        let x = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0], vec![4.0, 0.0]];
        let y = vec![0, 0, 1, 1];
        assert!(fit_lda(&x, &y, 2, 0.1).is_ok());
        assert!(fit_qda(&x, &y, 2, 1e-3).is_ok());
        assert!(fit_lda(&x, &y, 2, 0.0).is_ok());
    }

    #[test]
    fn too_few_samples_fall_back_to_floor() {
        let x = vec![vec![0.0], vec![1.0], vec![1.2]];
        let y = vec![0, 1, 1];
        let q = fit_qda(&x, &y, 1, 0.0).unwrap();
        assert!(q.predict_proba_dense(&[0.0]) < 0.5);
    }

    #[test]
    fn non_finite_rejected() {
        let x = vec![vec![f64::NAN], vec![1.0], vec![0.0], vec![2.0]];
        assert!(matches!(fit_lda(&x, &[0, 0, 1, 1], 1, 0.1), Err(Error::Data(_))));
    }
}
