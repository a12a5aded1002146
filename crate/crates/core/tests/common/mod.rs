//! Independent reference implementations and fixtures shared by the
//! integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zorbalik_core::tree::TreeShape;
use zorbalik_core::{Label, SparseMatrix};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn synthetic_csv() -> PathBuf {
    workspace_root().join("data/synthetic_tr.csv")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sparse(rows: &[Vec<f64>]) -> SparseMatrix {
    let dim = rows.first().map_or(0, Vec::len);
    SparseMatrix::from_dense_rows(dim, rows).unwrap()
}

/// A noisy sparse binary problem: label 1 rows lean on the first half of the
/// features.
pub fn noisy_problem(seed: u64, n: usize, dim: usize) -> (SparseMatrix, Vec<Label>) {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let row: Vec<f64> = (0..dim)
            .map(|j| {
                let favoured = (j < dim / 2) == (label == 1);
                let p = if favoured { 0.55 } else { 0.2 };
                if r.gen_bool(p) {
                    r.gen_range(0.05..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        rows.push(row);
        y.push(if r.gen_bool(0.1) { 1 - label } else { label });
    }
    (sparse(&rows), y)
}

// Naive Bayes by direct products of the textbook formulas.

pub fn nb_multinomial_oracle(rows: &[Vec<f64>], y: &[Label], alpha: f64, query: &[f64]) -> f64 {
    let v = rows[0].len();
    let mut joint = [0.0f64; 2];
    for c in 0..2u8 {
        let docs: Vec<&Vec<f64>> = rows.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
        let prior = docs.len() as f64 / rows.len() as f64;
        let total: f64 = docs.iter().map(|r| r.iter().sum::<f64>()).sum();
        let mut p = prior;
        for t in 0..v {
            let count: f64 = docs.iter().map(|r| r[t]).sum();
            let theta = (count + alpha) / (total + alpha * v as f64);
            p *= theta.powf(query[t]);
        }
        joint[c as usize] = p;
    }
    joint[1] / (joint[0] + joint[1])
}

pub fn nb_bernoulli_oracle(rows: &[Vec<f64>], y: &[Label], alpha: f64, query: &[f64]) -> f64 {
    let v = rows[0].len();
    let mut joint = [0.0f64; 2];
    for c in 0..2u8 {
        let docs: Vec<&Vec<f64>> = rows.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
        let mut p = docs.len() as f64 / rows.len() as f64;
        for t in 0..v {
            let present = docs.iter().filter(|r| r[t] > 0.0).count() as f64;
            let theta = (present + alpha) / (docs.len() as f64 + 2.0 * alpha);
            p *= if query[t] > 0.0 { theta } else { 1.0 - theta };
        }
        joint[c as usize] = p;
    }
    joint[1] / (joint[0] + joint[1])
}

pub fn nb_gaussian_oracle(rows: &[Vec<f64>], y: &[Label], var_smoothing: f64, query: &[f64]) -> f64 {
    let v = rows[0].len();
    let n = rows.len() as f64;
    let column_var = |t: usize, pick: &dyn Fn(usize) -> bool| {
        let vals: Vec<f64> = (0..rows.len()).filter(|&i| pick(i)).map(|i| rows[i][t]).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        (m, vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / vals.len() as f64)
    };
    let max_var = (0..v).map(|t| column_var(t, &|_| true).1).fold(0.0, f64::max);
    let eps = var_smoothing * if max_var > 0.0 { max_var } else { 1.0 };
    let mut log_joint = [0.0f64; 2];
    for c in 0..2u8 {
        let count = y.iter().filter(|&&l| l == c).count() as f64;
        let mut lj = (count / n).ln();
        for t in 0..v {
            let (m, var) = column_var(t, &|i| y[i] == c);
            let var = var.max(eps);
            lj += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (query[t] - m).powi(2) / (2.0 * var);
        }
        log_joint[c as usize] = lj;
    }
    1.0 / (1.0 + (log_joint[0] - log_joint[1]).exp())
}

// CART by exhaustive enumeration over dense binary features.

fn gini(n: f64, pos: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

/// The tree every split rule in the spec implies, grown by trying every
/// feature at every node. Thresholds on 0/1 features are 0.5.
pub fn exhaustive_cart(rows: &[Vec<u8>], y: &[Label], samples: &[usize]) -> TreeShape {
    let n = samples.len() as f64;
    let pos = samples.iter().filter(|&&i| y[i] == 1).count() as f64;
    let leaf = TreeShape::Leaf(pos / n);
    if pos == 0.0 || pos == n || samples.len() < 2 {
        return leaf;
    }
    let parent = gini(n, pos);
    let mut best: Option<(f64, usize)> = None;
    for f in 0..rows[0].len() {
        let left: Vec<usize> = samples.iter().copied().filter(|&i| rows[i][f] == 0).collect();
        if left.is_empty() || left.len() == samples.len() {
            continue;
        }
        let nl = left.len() as f64;
        let pl = left.iter().filter(|&&i| y[i] == 1).count() as f64;
        let gain = parent - nl / n * gini(nl, pl) - (n - nl) / n * gini(n - nl, pos - pl);
        let wins = match best {
            None => gain > 1e-12,
            Some((g, _)) => gain > g + 1e-12,
        };
        if wins {
            best = Some((gain, f));
        }
    }
    let Some((_, f)) = best else { return leaf };
    let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| rows[i][f] == 0);
    TreeShape::Split {
        feature: f,
        threshold: 0.5,
        left: Box::new(exhaustive_cart(rows, y, &l)),
        right: Box::new(exhaustive_cart(rows, y, &r)),
    }
}

/// Every multiset of `n` rows drawn from the `2^dim * 2` distinct
/// (features, label) combinations, as index lists into that type table.
pub fn multisets(types: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(types: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for t in start..types {
            cur.push(t);
            go(types, n, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(types, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Decodes a type index into binary features and a label.
pub fn decode_type(t: usize, dim: usize) -> (Vec<u8>, Label) {
    let label = (t & 1) as u8;
    let bits = t >> 1;
    ((0..dim).map(|j| ((bits >> j) & 1) as u8).collect(), label)
}

/// Mean logistic loss computed from scratch.
pub fn log_loss(scores: &[f64], y: &[Label]) -> f64 {
    scores
        .iter()
        .zip(y)
        .map(|(&s, &l)| {
            let m = if l == 1 { -s } else { s };
            m.max(0.0) + (-m.abs()).exp().ln_1p()
        })
        .sum::<f64>()
        / y.len() as f64
}
