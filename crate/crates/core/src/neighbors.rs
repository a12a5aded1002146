//! k-nearest neighbours and soft voting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Spec(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub train: SparseMatrix,
    pub labels: Vec<Label>,
    pub k: usize,
    pub metric: Metric,
    #[serde(skip)]
    norms: Vec<f64>,
}

impl PartialEq for KnnModel {
    fn eq(&self, other: &Self) -> bool {
        self.train == other.train && self.labels == other.labels && self.k == other.k && self.metric == other.metric
    }
}

/// `1 - cos(a, b)`; 1 when either vector is all zeros.
pub fn cosine_distance(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - a.dot(b) / (na * nb)
}

pub fn euclidean_distance(a: &SparseVector, b: &SparseVector) -> f64 {
    (a.squared_norm() + b.squared_norm() - 2.0 * a.dot(b)).max(0.0).sqrt()
}

pub fn fit_knn(x: &SparseMatrix, y: &[Label], k: usize, metric: Metric) -> Result<KnnModel> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if k < 1 || k > y.len() {
        return Err(Error::Parameter(format!("k must lie in [1, {}], got {k}", y.len())));
    }
    let mut m = KnnModel {
        train: x.clone(),
        labels: y.to_vec(),
        k,
        metric,
        norms: Vec::new(),
    };
    m.prepare();
    Ok(m)
}

impl KnnModel {
    /// Restores cached norms after deserialization.
    pub fn prepare(&mut self) {
        self.norms = self.train.rows().iter().map(|r| r.norm()).collect();
    }

    fn distance(&self, i: usize, q: &SparseVector, q_norm: f64) -> f64 {
        let row = self.train.row(i);
        let n = self.norms.get(i).copied().unwrap_or_else(|| row.norm());
        match self.metric {
            Metric::Cosine => {
                if n == 0.0 || q_norm == 0.0 {
                    1.0
                } else {
                    1.0 - row.dot(q) / (n * q_norm)
                }
            }
            Metric::Euclidean => (n * n + q_norm * q_norm - 2.0 * row.dot(q)).max(0.0).sqrt(),
        }
    }

    /// Training indices of the `k` nearest rows, nearest first; equal
    /// distances order by index.
    pub fn neighbours(&self, q: &SparseVector) -> Vec<usize> {
        let qn = q.norm();
        let mut d: Vec<(f64, usize)> = (0..self.labels.len()).map(|i| (self.distance(i, q, qn), i)).collect();
        let key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, key);
            d.truncate(self.k);
        }
        d.sort_unstable_by(key);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, q: &SparseVector) -> f64 {
        let pos = self.neighbours(q).iter().filter(|&&i| self.labels[i] == 1).count();
        pos as f64 / self.k as f64
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows().par_iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Mean of the member probabilities for every row. The members of a row are
/// summed in ascending order so the result does not depend on member order.
pub fn soft_vote(member_probs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = member_probs.first() else {
        return Err(Error::Parameter("voting needs at least one member".into()));
    };
    let n = first.len();
    if member_probs.iter().any(|p| p.len() != n) {
        return Err(Error::Shape("members predicted different row counts".into()));
    }
    let m = member_probs.len() as f64;
    Ok((0..n)
        .map(|i| {
            let mut col: Vec<f64> = member_probs.iter().map(|p| p[i]).collect();
            col.sort_by(f64::total_cmp);
            (col.iter().sum::<f64>() / m).clamp(0.0, 1.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (SparseMatrix, Vec<Label>) {
        let x = SparseMatrix::from_dense_rows(
            2,
            &[vec![1.0, 0.0], vec![0.9, 0.1], vec![0.8, 0.3], vec![0.0, 1.0], vec![0.1, 0.9]],
        )
        .unwrap();
        (x, vec![1, 1, 0, 0, 0])
    }

    #[test]
    fn self_match_k1() {
        let (x, y) = fixture();
        let m = fit_knn(&x, &y, 1, Metric::Cosine).unwrap();
        assert_eq!(m.predict_row(x.row(0)), 1.0);
    }

    #[test]
    fn k3_two_of_three() {
        let (x, y) = fixture();
        let m = fit_knn(&x, &y, 3, Metric::Cosine).unwrap();
        let q = SparseVector::from_dense(&[1.0, 0.05]);
        assert_eq!(m.neighbours(&q).len(), 3);
        assert!((m.predict_row(&q) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_query_uses_index_order() {
        let (x, y) = fixture();
        let m = fit_knn(&x, &y, 2, Metric::Cosine).unwrap();
        assert_eq!(m.neighbours(&SparseVector::new()), vec![0, 1]);
    }

    #[test]
    fn k_above_n_rejected() {
        let (x, y) = fixture();
        assert!(matches!(fit_knn(&x, &y, 6, Metric::Cosine), Err(Error::Parameter(_))));
    }

    #[test]
    fn vote_mean() {
        assert_eq!(soft_vote(&[vec![0.6], vec![0.8]]).unwrap()[0], 0.7);
        assert_eq!(soft_vote(&vec![vec![1.0]; 18]).unwrap()[0], 1.0);
    }
}
