//! Row-major sparse feature storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted `(index, value)` pairs over a fixed dimension.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from unsorted pairs; duplicate indices are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut v = SparseVector::default();
        for (i, x) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v.retain_nonzero();
        v
    }

    /// Builds from already sorted, strictly increasing indices.
    pub fn from_sorted(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Shape("index/value length mismatch".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Shape("indices must be strictly increasing".into()));
        }
        let mut v = SparseVector { indices, values };
        v.retain_nonzero();
        Ok(v)
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let mut v = SparseVector::default();
        for (i, &x) in dense.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(i as u32);
                v.values.push(x);
            }
        }
        v
    }

    fn retain_nonzero(&mut self) {
        if self.values.iter().all(|&x| x != 0.0) {
            return;
        }
        let (mut idx, mut val) = (Vec::new(), Vec::new());
        for (&i, &x) in self.indices.iter().zip(&self.values) {
            if x != 0.0 {
                idx.push(i);
                val.push(x);
            }
        }
        self.indices = idx;
        self.values = val;
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &x)| (i as usize, x))
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().map(|&i| i as usize)
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * dense[i]).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        let mut v = SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|x| x * factor).collect(),
        };
        v.retain_nonzero();
        v
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, x) in self.iter() {
            out[i] = x;
        }
        out
    }
}

/// Documents x features, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        SparseMatrix {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: Vec<SparseVector>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if let Some(max) = row.max_index() {
                if max >= dim {
                    return Err(Error::Shape(format!(
                        "row {r} has index {max} outside dimension {dim}"
                    )));
                }
            }
        }
        Ok(SparseMatrix { dim, rows })
    }

    pub fn from_dense_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Shape(format!("dense row {bad} is not of length {dim}")));
        }
        Ok(SparseMatrix {
            dim,
            rows: rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
        })
    }

    pub fn push(&mut self, row: SparseVector) -> Result<()> {
        if let Some(max) = row.max_index() {
            if max >= self.dim {
                return Err(Error::Shape(format!(
                    "index {max} outside dimension {}",
                    self.dim
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }

    pub fn select_rows(&self, positions: &[usize]) -> SparseMatrix {
        SparseMatrix {
            dim: self.dim,
            rows: positions.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVector::nnz).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.values().iter().all(|x| x.is_finite()))
    }

    /// Column-major view: for each feature, the `(row, value)` non-zeros.
    pub fn columns(&self) -> Vec<Vec<(u32, f64)>> {
        let mut cols = vec![Vec::new(); self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for (i, x) in row.iter() {
                cols[i].push((r as u32, x));
            }
        }
        cols
    }

    /// Number of rows with a non-zero in each column.
    pub fn column_support(&self) -> Vec<usize> {
        let mut df = vec![0usize; self.dim];
        for row in &self.rows {
            for (i, _) in row.iter() {
                df[i] += 1;
            }
        }
        df
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.to_dense(self.dim)).collect()
    }
}
