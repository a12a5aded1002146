//! CART decision trees and the random forest / extra trees ensembles.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::util::{derive_seed, rng_from_seed};

pub(crate) const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { probability: f64, weight: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

/// Arena of nodes; the root is node 0. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

/// Nested view of a tree, independent of arena layout.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeShape {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeShape>,
        right: Box<TreeShape>,
    },
}

impl DecisionTree {
    pub fn predict_row(&self, x: &SparseVector) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { probability, .. } => return probability,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x.get(feature as usize) <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, left as usize).max(walk(t, right as usize)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn shape(&self) -> TreeShape {
        fn walk(t: &DecisionTree, at: usize) -> TreeShape {
            match t.nodes[at] {
                TreeNode::Leaf { probability, .. } => TreeShape::Leaf(probability),
                TreeNode::Split { feature, threshold, left, right } => TreeShape::Split {
                    feature: feature as usize,
                    threshold,
                    left: Box::new(walk(t, left as usize)),
                    right: Box::new(walk(t, right as usize)),
                },
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            MaxFeatures::All => dim,
            MaxFeatures::Sqrt => ((dim as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(k) => k.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Best midpoint between consecutive distinct values.
    Best,
    /// One uniform draw in `[min, max)` per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub threshold: ThresholdRule,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            threshold: ThresholdRule::Best,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::Parameter("min_samples_split must be >= 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
        }
        if let MaxFeatures::Count(0) = self.max_features {
            return Err(Error::Parameter("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

/// Additive per-sample statistics accumulated on each side of a split.
pub(crate) trait SplitStats: Copy + Default {
    fn add(&mut self, other: &Self);
    fn minus(&self, other: &Self) -> Self;
}

/// Nonzero entries of the node's rows grouped by feature and sorted by value.
pub(crate) struct NodeColumns {
    /// `(feature, value, sample)` sorted by feature then value then sample.
    pub entries: Vec<(u32, f64, u32)>,
    /// Start offsets of each feature group in `entries`.
    pub groups: Vec<(u32, usize, usize)>,
}

impl NodeColumns {
    pub fn gather(x: &SparseMatrix, samples: &[usize]) -> Self {
        let mut entries = Vec::new();
        for &s in samples {
            for (j, v) in x.row(s).iter() {
                entries.push((j as u32, v, s as u32));
            }
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut groups = Vec::new();
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let mut end = start;
            while end < entries.len() && entries[end].0 == f {
                end += 1;
            }
            groups.push((f, start, end));
            start = end;
        }
        NodeColumns { entries, groups }
    }

    /// Features whose value varies across the node.
    pub fn non_constant(&self, n_samples: usize) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, &(_, s, e))| {
                let has_zero = e - s < n_samples;
                has_zero || self.entries[s].1 != self.entries[e - 1].1
            })
            .map(|(g, _)| g)
            .collect()
    }
}

/// Walks the distinct values of one feature group in ascending order, with
/// the implicit zeros as a bucket of their own, and reports every midpoint
/// threshold with the statistics of its left side.
pub(crate) fn scan_feature<S: SplitStats>(
    group: &[(u32, f64, u32)],
    n_samples: usize,
    total: S,
    stat_of: &impl Fn(usize) -> S,
    mut visit: impl FnMut(f64, S, usize),
) {
    let zero_count = n_samples - group.len();
    let zero_stats = if zero_count > 0 {
        let mut nz = S::default();
        for e in group {
            nz.add(&stat_of(e.2 as usize));
        }
        Some(total.minus(&nz))
    } else {
        None
    };
    let split_at = group.partition_point(|e| e.1 < 0.0);
    // (value, stats, count) buckets in ascending value order
    let mut buckets: Vec<(f64, S, usize)> = Vec::new();
    let push = |v: f64, st: S, c: usize, buckets: &mut Vec<(f64, S, usize)>| match buckets.last_mut() {
        Some(last) if last.0 == v => {
            last.1.add(&st);
            last.2 += c;
        }
        _ => buckets.push((v, st, c)),
    };
    for e in &group[..split_at] {
        push(e.1, stat_of(e.2 as usize), 1, &mut buckets);
    }
    if let Some(z) = zero_stats {
        push(0.0, z, zero_count, &mut buckets);
    }
    for e in &group[split_at..] {
        push(e.1, stat_of(e.2 as usize), 1, &mut buckets);
    }
    let mut left = S::default();
    let mut left_count = 0;
    for w in buckets.windows(2) {
        left.add(&w[0].1);
        left_count += w[0].2;
        visit(0.5 * (w[0].0 + w[1].0), left, left_count);
    }
}

/// Left-side statistics for an arbitrary threshold.
pub(crate) fn left_of<S: SplitStats>(
    group: &[(u32, f64, u32)],
    n_samples: usize,
    total: S,
    stat_of: &impl Fn(usize) -> S,
    threshold: f64,
) -> (S, usize) {
    let mut nz_all = S::default();
    let mut left = S::default();
    let mut count = 0;
    for e in group {
        let st = stat_of(e.2 as usize);
        nz_all.add(&st);
        if e.1 <= threshold {
            left.add(&st);
            count += 1;
        }
    }
    let zero_count = n_samples - group.len();
    if zero_count > 0 && 0.0 <= threshold {
        left.add(&total.minus(&nz_all));
        count += zero_count;
    }
    (left, count)
}

pub(crate) fn value_range(group: &[(u32, f64, u32)], n_samples: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (group[0].1, group[group.len() - 1].1);
    if group.len() < n_samples {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Default)]
struct Gini {
    w: f64,
    wy: f64,
}

impl SplitStats for Gini {
    fn add(&mut self, o: &Self) {
        self.w += o.w;
        self.wy += o.wy;
    }

    fn minus(&self, o: &Self) -> Self {
        Gini {
            w: self.w - o.w,
            wy: self.wy - o.wy,
        }
    }
}

impl Gini {
    fn impurity(&self) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        let p = (self.wy / self.w).clamp(0.0, 1.0);
        2.0 * p * (1.0 - p)
    }
}

/// Weighted Gini decrease of splitting `parent` into `left` and the rest.
pub fn gini_gain(parent_w: f64, parent_wy: f64, left_w: f64, left_wy: f64) -> f64 {
    let parent = Gini { w: parent_w, wy: parent_wy };
    let left = Gini { w: left_w, wy: left_wy };
    let right = parent.minus(&left);
    if left.w <= 0.0 || right.w <= 0.0 {
        return 0.0;
    }
    parent.impurity() - (left.w / parent.w) * left.impurity() - (right.w / parent.w) * right.impurity()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn better(candidate: (f64, usize, f64), best: &Option<SplitDecision>) -> bool {
    match best {
        None => candidate.0 > GAIN_EPS,
        Some(b) => {
            candidate.0 > b.gain + GAIN_EPS
                || ((candidate.0 - b.gain).abs() <= GAIN_EPS
                    && (candidate.1, candidate.2) < (b.feature, b.threshold)
                    && candidate.0 > GAIN_EPS)
        }
    }
}

/// Best Gini split of `samples` over the candidate feature groups.
#[allow(clippy::too_many_arguments)]
fn best_split(
    cols: &NodeColumns,
    candidates: &[usize],
    samples_len: usize,
    total: Gini,
    stat_of: &impl Fn(usize) -> Gini,
    min_leaf: usize,
    rule: ThresholdRule,
    rng: &mut ChaCha8Rng,
) -> Option<SplitDecision> {
    let mut best: Option<SplitDecision> = None;
    for &g in candidates {
        let (feature, s, e) = cols.groups[g];
        let group = &cols.entries[s..e];
        let mut consider = |threshold: f64, left: Gini, left_count: usize| {
            if left_count < min_leaf || samples_len - left_count < min_leaf {
                return;
            }
            let gain = gini_gain(total.w, total.wy, left.w, left.wy);
            if better((gain, feature as usize, threshold), &best) {
                best = Some(SplitDecision {
                    feature: feature as usize,
                    threshold,
                    gain,
                });
            }
        };
        match rule {
            ThresholdRule::Best => scan_feature(group, samples_len, total, stat_of, &mut consider),
            ThresholdRule::Random => {
                let (lo, hi) = value_range(group, samples_len);
                let t = rng.gen_range(lo..hi);
                let (left, count) = left_of(group, samples_len, total, stat_of, t);
                consider(t, left, count);
            }
        }
    }
    best
}

/// Best Gini split over every feature of a sparse matrix, as used at a tree
/// root. `None` when no split has positive gain.
pub fn best_gini_split(x: &SparseMatrix, y: &[Label], weights: &[f64]) -> Option<SplitDecision> {
    let samples: Vec<usize> = (0..y.len()).filter(|&i| weights[i] > 0.0).collect();
    let cols = NodeColumns::gather(x, &samples);
    let candidates = cols.non_constant(samples.len());
    let stat_of = |i: usize| Gini {
        w: weights[i],
        wy: weights[i] * y[i] as f64,
    };
    let mut total = Gini::default();
    for &i in &samples {
        total.add(&stat_of(i));
    }
    let mut rng = rng_from_seed(0);
    best_split(&cols, &candidates, samples.len(), total, &stat_of, 1, ThresholdRule::Best, &mut rng)
}

/// Grows one tree on the rows with positive weight.
pub fn build_tree(
    x: &SparseMatrix,
    y: &[Label],
    weights: &[f64],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<DecisionTree> {
    params.validate()?;
    if x.n_rows() != y.len() || weights.len() != y.len() {
        return Err(Error::Shape("rows, labels and weights differ in length".into()));
    }
    let stat_of = |i: usize| Gini {
        w: weights[i],
        wy: weights[i] * y[i] as f64,
    };
    let root: Vec<usize> = (0..y.len()).filter(|&i| weights[i] > 0.0).collect();
    if root.is_empty() {
        return Err(Error::Data("no training rows with positive weight".into()));
    }
    let mut nodes = vec![TreeNode::Leaf {
        probability: 0.0,
        weight: 0.0,
    }];
    let mut stack = vec![(0usize, root, 0usize)];
    while let Some((at, samples, depth)) = stack.pop() {
        let mut total = Gini::default();
        for &i in &samples {
            total.add(&stat_of(i));
        }
        let leaf = TreeNode::Leaf {
            probability: (total.wy / total.w).clamp(0.0, 1.0),
            weight: total.w,
        };
        let pure = total.wy <= 0.0 || total.wy >= total.w;
        if pure || samples.len() < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) {
            nodes[at] = leaf;
            continue;
        }
        let cols = NodeColumns::gather(x, &samples);
        let mut candidates = cols.non_constant(samples.len());
        let m = params.max_features.resolve(x.dim());
        if m < candidates.len() {
            let mut picked: Vec<usize> = sample_indices(rng, candidates.len(), m)
                .into_iter()
                .map(|k| candidates[k])
                .collect();
            picked.sort_unstable();
            candidates = picked;
        }
        let decision = best_split(
            &cols,
            &candidates,
            samples.len(),
            total,
            &stat_of,
            params.min_samples_leaf,
            params.threshold,
            rng,
        );
        let Some(d) = decision else {
            nodes[at] = leaf;
            continue;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| x.row(i).get(d.feature) <= d.threshold);
        let l = nodes.len();
        nodes.push(leaf);
        nodes.push(leaf);
        nodes[at] = TreeNode::Split {
            feature: d.feature as u32,
            threshold: d.threshold,
            left: l as u32,
            right: l as u32 + 1,
        };
        stack.push((l + 1, right, depth + 1));
        stack.push((l, left, depth + 1));
    }
    Ok(DecisionTree { nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestKind {
    Cart,
    RandomForest,
    ExtraTrees,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn defaults(kind: ForestKind) -> Self {
        let tree = TreeParams {
            max_features: match kind {
                ForestKind::Cart => MaxFeatures::All,
                _ => MaxFeatures::Sqrt,
            },
            threshold: match kind {
                ForestKind::ExtraTrees => ThresholdRule::Random,
                _ => ThresholdRule::Best,
            },
            ..TreeParams::default()
        };
        ForestParams {
            n_estimators: if kind == ForestKind::Cart { 1 } else { 100 },
            tree,
            bootstrap: kind == ForestKind::RandomForest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub kind: ForestKind,
    pub trees: Vec<DecisionTree>,
    pub tree_seeds: Vec<u64>,
    pub max_features: usize,
    pub bootstrap: bool,
}

impl ForestModel {
    pub fn predict_row(&self, x: &SparseVector) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows().iter().map(|r| self.predict_row(r)).collect()
    }
}

pub fn fit_tree_ensemble(
    kind: ForestKind,
    x: &SparseMatrix,
    y: &[Label],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    if params.n_estimators < 1 {
        return Err(Error::Parameter("n_estimators must be >= 1".into()));
    }
    if kind == ForestKind::Cart && params.n_estimators != 1 {
        return Err(Error::Parameter("a single decision tree has exactly one estimator".into()));
    }
    params.tree.validate()?;
    let n = y.len();
    let seeds: Vec<u64> = (0..params.n_estimators as u64).map(|i| derive_seed(seed, i)).collect();
    let trees = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = rng_from_seed(s);
            let weights = if params.bootstrap {
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[rng.gen_range(0..n)] += 1.0;
                }
                w
            } else {
                vec![1.0; n]
            };
            build_tree(x, y, &weights, &params.tree, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        kind,
        trees,
        tree_seeds: seeds,
        max_features: params.tree.max_features.resolve(x.dim()),
        bootstrap: params.bootstrap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> (SparseMatrix, Vec<Label>) {
        (
            SparseMatrix::from_dense_rows(1, &[vec![0.0], vec![0.0], vec![1.0], vec![1.0]]).unwrap(),
            vec![0, 0, 1, 1],
        )
    }

    #[test]
    fn four_point_root_split() {
        let (x, y) = four();
        let d = best_gini_split(&x, &y, &[1.0; 4]).unwrap();
        assert_eq!(d.feature, 0);
        assert_eq!(d.threshold, 0.5);
        assert!((d.gain - 0.5).abs() < 1e-15);
        let cart = fit_tree_ensemble(ForestKind::Cart, &x, &y, &ForestParams::defaults(ForestKind::Cart), 0).unwrap();
        assert_eq!(
            cart.trees[0].shape(),
            TreeShape::Split {
                feature: 0,
                threshold: 0.5,
                left: Box::new(TreeShape::Leaf(0.0)),
                right: Box::new(TreeShape::Leaf(1.0)),
            }
        );
    }

    #[test]
    fn pure_labels_have_no_split() {
        let (x, _) = four();
        assert!(best_gini_split(&x, &[1, 1, 1, 1], &[1.0; 4]).is_none());
    }

    #[test]
    fn identical_features_lower_index_wins() {
        let x = SparseMatrix::from_dense_rows(2, &[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(best_gini_split(&x, &[0, 0, 1, 1], &[1.0; 4]).unwrap().feature, 0);
    }

    #[test]
    fn negative_values_and_zero_bucket() {
        let x = SparseMatrix::from_dense_rows(1, &[vec![-2.0], vec![0.0], vec![3.0]]).unwrap();
        let d = best_gini_split(&x, &[0, 1, 1], &[1.0; 3]).unwrap();
        assert_eq!(d.threshold, -1.0);
    }

    #[test]
    fn single_label_is_single_leaf() {
        let (x, _) = four();
        let m = fit_tree_ensemble(ForestKind::Cart, &x, &[1; 4], &ForestParams::defaults(ForestKind::Cart), 0).unwrap();
        assert_eq!(m.trees[0].shape(), TreeShape::Leaf(1.0));
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<Label> = (0..16).map(|i| (i % 2) as u8).collect();
        let x = SparseMatrix::from_dense_rows(1, &rows).unwrap();
        let mut p = ForestParams::defaults(ForestKind::Cart);
        p.tree.max_depth = Some(2);
        let m = fit_tree_ensemble(ForestKind::Cart, &x, &y, &p, 0).unwrap();
        assert!(m.trees[0].depth() <= 2);
    }

    #[test]
    fn zero_estimators_rejected() {
        let (x, y) = four();
        let mut p = ForestParams::defaults(ForestKind::RandomForest);
        p.n_estimators = 0;
        assert!(matches!(
            fit_tree_ensemble(ForestKind::RandomForest, &x, &y, &p, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn extra_trees_thresholds_inside_range() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0, ((i * 7) % 12) as f64]).collect();
        let y: Vec<Label> = (0..12).map(|i| u8::from(i >= 6)).collect();
        let x = SparseMatrix::from_dense_rows(2, &rows).unwrap();
        let p = ForestParams::defaults(ForestKind::ExtraTrees);
        let m = fit_tree_ensemble(ForestKind::ExtraTrees, &x, &y, &p, 3).unwrap();
        assert_eq!(m.trees.len(), 100);
        for t in &m.trees {
            for n in &t.nodes {
                if let TreeNode::Split { feature, threshold, .. } = *n {
                    let hi = if feature == 0 { 1.0 } else { 11.0 };
                    assert!((0.0..hi).contains(&threshold));
                }
            }
        }
    }
}
