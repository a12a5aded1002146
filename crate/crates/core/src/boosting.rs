//! AdaBoost, gradient boosting with logistic loss, second-order boosting and
//! histogram-based leaf-wise boosting.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::tree::{build_tree, scan_feature, NodeColumns, SplitStats, TreeParams, GAIN_EPS};
use crate::util::{mean_log_loss, rng_from_seed, sigmoid};

pub const HESSIAN_FLOOR: f64 = 1e-16;
const ERR_CLAMP: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostKind {
    Adaboost,
    Gbm,
    XgbStyle,
    LgbmStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegNode {
    Leaf { value: f64, samples: u32 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<RegNode>,
}

impl RegressionTree {
    pub fn leaf(value: f64, samples: usize) -> Self {
        RegressionTree {
            nodes: vec![RegNode::Leaf {
                value,
                samples: samples as u32,
            }],
        }
    }

    fn leaf_index(&self, x: &SparseVector) -> usize {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                RegNode::Leaf { .. } => return at,
                RegNode::Split { feature, threshold, left, right } => {
                    at = if x.get(feature as usize) <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn predict_row(&self, x: &SparseVector) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            RegNode::Leaf { value, .. } => value,
            RegNode::Split { .. } => unreachable!(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, RegNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, at: usize) -> usize {
            match t.nodes[at] {
                RegNode::Leaf { .. } => 0,
                RegNode::Split { left, right, .. } => 1 + walk(t, left as usize).max(walk(t, right as usize)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStage {
    pub tree: RegressionTree,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub kind: BoostKind,
    pub base_score: f64,
    pub stages: Vec<BoostStage>,
    pub rounds: usize,
    pub learning_rate: f64,
    /// Histogram boundaries used during training (leaf-wise only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_boundaries: Option<Vec<Vec<f64>>>,
}

impl BoostedModel {
    pub fn decision_row(&self, x: &SparseVector) -> f64 {
        self.stages
            .iter()
            .fold(self.base_score, |acc, s| acc + s.weight * s.tree.predict_row(x))
    }

    pub fn decision(&self, x: &SparseMatrix) -> Vec<f64> {
        x.rows().iter().map(|r| self.decision_row(r)).collect()
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<f64> {
        let scale = if self.kind == BoostKind::Adaboost { 2.0 } else { 1.0 };
        self.decision(x).into_iter().map(|f| sigmoid(scale * f)).collect()
    }
}

/// Training diagnostics of one boosting run.
#[derive(Debug, Clone, Default)]
pub struct BoostTrace {
    /// Mean training log loss before the first stage and after each accepted one.
    pub train_loss: Vec<f64>,
    /// Weighted error of each accepted AdaBoost stump.
    pub stump_errors: Vec<f64>,
    pub growth: Vec<Vec<GrowthStep>>,
}

fn check_xy(x: &SparseMatrix, y: &[Label]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    Ok(())
}

fn base_score(y: &[Label]) -> f64 {
    let p = (y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64).clamp(1e-15, 1.0 - 1e-15);
    (p / (1.0 - p)).ln()
}

/// `0.5 ln((1 - err) / err)` with `err` clamped away from 0 and 1.
pub fn adaboost_stage_weight(err: f64) -> f64 {
    let e = err.clamp(ERR_CLAMP, 1.0 - ERR_CLAMP);
    0.5 * ((1.0 - e) / e).ln()
}

pub fn fit_adaboost(x: &SparseMatrix, y: &[Label], rounds: usize, seed: u64) -> Result<BoostedModel> {
    fit_adaboost_traced(x, y, rounds, seed).map(|(m, _)| m)
}

pub fn fit_adaboost_traced(x: &SparseMatrix, y: &[Label], rounds: usize, seed: u64) -> Result<(BoostedModel, BoostTrace)> {
    if rounds < 1 {
        return Err(Error::Parameter("adaboost needs at least one round".into()));
    }
    check_xy(x, y)?;
    let n = y.len();
    let mut w = vec![1.0 / n as f64; n];
    let stump = TreeParams {
        max_depth: Some(1),
        ..TreeParams::default()
    };
    let mut rng = rng_from_seed(seed);
    let mut stages = Vec::new();
    let mut trace = BoostTrace::default();
    for _ in 0..rounds {
        let tree = build_tree(x, y, &w, &stump, &mut rng)?;
        let h: Vec<f64> = x
            .rows()
            .iter()
            .map(|r| if tree.predict_row(r) > 0.5 { 1.0 } else { -1.0 })
            .collect();
        let err: f64 = (0..n).filter(|&i| (h[i] > 0.0) != (y[i] == 1)).map(|i| w[i]).sum();
        if err >= 0.5 {
            break;
        }
        let alpha = adaboost_stage_weight(err);
        trace.stump_errors.push(err);
        let mut nodes = Vec::with_capacity(tree.nodes.len());
        for node in &tree.nodes {
            nodes.push(match *node {
                crate::tree::TreeNode::Leaf { probability, weight } => RegNode::Leaf {
                    value: if probability > 0.5 { 1.0 } else { -1.0 },
                    samples: weight.round() as u32,
                },
                crate::tree::TreeNode::Split { feature, threshold, left, right } => RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                },
            });
        }
        stages.push(BoostStage {
            tree: RegressionTree { nodes },
            weight: alpha,
        });
        if err <= ERR_CLAMP {
            break;
        }
        let mut total = 0.0;
        for i in 0..n {
            let t = if y[i] == 1 { 1.0 } else { -1.0 };
            w[i] *= (-alpha * t * h[i]).exp();
            total += w[i];
        }
        w.iter_mut().for_each(|v| *v /= total);
    }
    let model = BoostedModel {
        kind: BoostKind::Adaboost,
        base_score: 0.0,
        stages,
        rounds,
        learning_rate: 1.0,
        bin_boundaries: None,
    };
    Ok((model, trace))
}

/// Gradient, hessian and sample count.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GradStats {
    pub g: f64,
    pub h: f64,
    pub n: f64,
}

impl SplitStats for GradStats {
    fn add(&mut self, o: &Self) {
        self.g += o.g;
        self.h += o.h;
        self.n += o.n;
    }

    fn minus(&self, o: &Self) -> Self {
        GradStats {
            g: self.g - o.g,
            h: self.h - o.h,
            n: self.n - o.n,
        }
    }
}

/// Split scoring and leaf values of a second-order tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Squared-error fit to the negative gradient with Newton leaves.
    Residual,
    /// `G^2 / (H + lambda)` scores with `-G / (H + lambda)` leaves.
    SecondOrder { lambda: f64, min_child_weight: f64 },
}

impl Criterion {
    fn score(&self, s: &GradStats) -> f64 {
        match *self {
            Criterion::Residual => {
                if s.n > 0.0 {
                    s.g * s.g / s.n
                } else {
                    0.0
                }
            }
            Criterion::SecondOrder { lambda, .. } => s.g * s.g / (s.h + lambda),
        }
    }

    pub fn gain(&self, total: &GradStats, left: &GradStats) -> Option<f64> {
        let right = total.minus(left);
        if left.n < 0.5 || right.n < 0.5 {
            return None;
        }
        if let Criterion::SecondOrder { min_child_weight, .. } = *self {
            if left.h < min_child_weight || right.h < min_child_weight {
                return None;
            }
        }
        Some(self.score(left) + self.score(&right) - self.score(total))
    }

    pub fn leaf_value(&self, s: &GradStats) -> f64 {
        match *self {
            Criterion::Residual => -s.g / s.h.max(HESSIAN_FLOOR),
            Criterion::SecondOrder { lambda, .. } => -s.g / (s.h + lambda),
        }
    }
}

/// `-G / (H + lambda)`.
pub fn second_order_leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// `G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)`.
pub fn second_order_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - (gl + gr).powi(2) / (hl + hr + lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn prefer(gain: f64, feature: usize, threshold: f64, best: &Option<GradSplit>) -> bool {
    if gain <= GAIN_EPS {
        return false;
    }
    match best {
        None => true,
        Some(b) => {
            gain > b.gain + GAIN_EPS
                || ((gain - b.gain).abs() <= GAIN_EPS && (feature, threshold) < (b.feature, b.threshold))
        }
    }
}

fn grads(f: &[f64], y: &[Label]) -> Vec<GradStats> {
    f.iter()
        .zip(y)
        .map(|(&s, &l)| {
            let p = sigmoid(s);
            GradStats {
                g: p - l as f64,
                h: (p * (1.0 - p)).max(HESSIAN_FLOOR),
                n: 1.0,
            }
        })
        .collect()
}

/// Best exact split of `samples` scanning every distinct value of every
/// feature.
pub fn best_exact_split(x: &SparseMatrix, samples: &[usize], stats: &[GradStats], criterion: &Criterion) -> Option<GradSplit> {
    let cols = NodeColumns::gather(x, samples);
    let mut total = GradStats::default();
    for &i in samples {
        total.add(&stats[i]);
    }
    let stat_of = |i: usize| stats[i];
    let mut best = None;
    for g in cols.non_constant(samples.len()) {
        let (feature, s, e) = cols.groups[g];
        scan_feature(&cols.entries[s..e], samples.len(), total, &stat_of, |t, left, _| {
            if let Some(gain) = criterion.gain(&total, &left) {
                if prefer(gain, feature as usize, t, &best) {
                    best = Some(GradSplit {
                        feature: feature as usize,
                        threshold: t,
                        gain,
                    });
                }
            }
        });
    }
    best
}

fn grow_depthwise(x: &SparseMatrix, stats: &[GradStats], criterion: &Criterion, max_depth: usize) -> RegressionTree {
    let all: Vec<usize> = (0..stats.len()).collect();
    let mut nodes = vec![RegNode::Leaf { value: 0.0, samples: 0 }];
    let mut stack = vec![(0usize, all, 0usize)];
    while let Some((at, samples, depth)) = stack.pop() {
        let mut total = GradStats::default();
        for &i in &samples {
            total.add(&stats[i]);
        }
        let leaf = RegNode::Leaf {
            value: criterion.leaf_value(&total),
            samples: samples.len() as u32,
        };
        let split = if depth < max_depth && samples.len() >= 2 {
            best_exact_split(x, &samples, stats, criterion)
        } else {
            None
        };
        let Some(d) = split else {
            nodes[at] = leaf;
            continue;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| x.row(i).get(d.feature) <= d.threshold);
        let l = nodes.len();
        nodes.push(leaf);
        nodes.push(leaf);
        nodes[at] = RegNode::Split {
            feature: d.feature as u32,
            threshold: d.threshold,
            left: l as u32,
            right: l as u32 + 1,
        };
        stack.push((l + 1, right, depth + 1));
        stack.push((l, left, depth + 1));
    }
    RegressionTree { nodes }
}

/// Adds `eta * tree` to the scores, halving the step until the training
/// loss does not increase. Returns the accepted weight, or `None` when no
/// positive step keeps the loss from rising.
fn accept_stage(f: &mut [f64], y: &[Label], tree: &RegressionTree, x: &SparseMatrix, eta: f64, loss: &mut f64) -> Option<f64> {
    let contrib: Vec<f64> = x.rows().iter().map(|r| tree.predict_row(r)).collect();
    let mut weight = eta;
    for _ in 0..=MAX_HALVINGS {
        let trial: Vec<f64> = f.iter().zip(&contrib).map(|(a, c)| a + weight * c).collect();
        let l = mean_log_loss(&trial, y);
        if l <= *loss {
            f.copy_from_slice(&trial);
            *loss = l;
            return Some(weight);
        }
        weight *= 0.5;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
}

pub fn fit_gradient_boosting(kind: BoostKind, x: &SparseMatrix, y: &[Label], params: &GradientParams) -> Result<BoostedModel> {
    fit_gradient_boosting_traced(kind, x, y, params).map(|(m, _)| m)
}

pub fn fit_gradient_boosting_traced(
    kind: BoostKind,
    x: &SparseMatrix,
    y: &[Label],
    params: &GradientParams,
) -> Result<(BoostedModel, BoostTrace)> {
    check_xy(x, y)?;
    let criterion = match kind {
        BoostKind::Gbm => Criterion::Residual,
        BoostKind::XgbStyle => Criterion::SecondOrder {
            lambda: params.lambda,
            min_child_weight: params.min_child_weight,
        },
        other => return Err(Error::Parameter(format!("{other:?} is not a depth-wise booster"))),
    };
    if params.max_depth < 1 || params.learning_rate < 0.0 || params.lambda < 0.0 || params.min_child_weight < 0.0 {
        return Err(Error::Parameter("max_depth >= 1 and non-negative rates required".into()));
    }
    let base = base_score(y);
    let mut f = vec![base; y.len()];
    let mut loss = mean_log_loss(&f, y);
    let mut trace = BoostTrace {
        train_loss: vec![loss],
        ..BoostTrace::default()
    };
    let mut stages = Vec::new();
    for _ in 0..params.rounds {
        let stats = grads(&f, y);
        let tree = grow_depthwise(x, &stats, &criterion, params.max_depth);
        match accept_stage(&mut f, y, &tree, x, params.learning_rate, &mut loss) {
            Some(weight) => {
                stages.push(BoostStage { tree, weight });
                trace.train_loss.push(loss);
            }
            None => break,
        }
    }
    Ok((
        BoostedModel {
            kind,
            base_score: base,
            stages,
            rounds: params.rounds,
            learning_rate: params.learning_rate,
            bin_boundaries: None,
        },
        trace,
    ))
}

pub const MAX_BINS: usize = 255;

/// Per-feature histogram bins. A value `v` falls in bin
/// `#{boundaries < v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDataset {
    pub boundaries: Vec<Vec<f64>>,
    /// Bin of the value 0 for each feature.
    pub zero_bin: Vec<u16>,
    /// Nonzero `(feature, bin)` pairs per row.
    pub rows: Vec<Vec<(u32, u16)>>,
    offsets: Vec<usize>,
}

pub fn bin_of(boundaries: &[f64], v: f64) -> u16 {
    boundaries.partition_point(|&b| b < v) as u16
}

pub fn feature_boundaries(values: &[f64], n_zero: usize, max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = values.iter().copied().filter(|v| *v != 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let m = distinct.len();
    let mut bounds = Vec::new();
    for j in 1..max_bins {
        let k = j * m / max_bins;
        if k >= 1 && k < m {
            let (lo, hi) = (distinct[k - 1], distinct[k]);
            if n_zero > 0 && lo < 0.0 && hi > 0.0 {
                continue;
            }
            bounds.push(0.5 * (lo + hi));
        }
    }
    if n_zero > 0 && m > 0 {
        let pos = distinct.iter().copied().find(|&v| v > 0.0);
        let neg = distinct.iter().rev().copied().find(|&v| v < 0.0);
        if let Some(p) = pos {
            bounds.push(0.5 * p);
        }
        if let Some(q) = neg {
            bounds.push(0.5 * q);
        }
    }
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    bounds
}

pub fn build_histograms(x: &SparseMatrix, max_bins: usize) -> Result<BinnedDataset> {
    if !(2..=MAX_BINS).contains(&max_bins) {
        return Err(Error::Parameter(format!("max_bins must lie in [2, {MAX_BINS}], got {max_bins}")));
    }
    let n = x.n_rows();
    let columns = x.columns();
    let boundaries: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| {
            let values: Vec<f64> = col.iter().map(|&(_, v)| v).collect();
            feature_boundaries(&values, n - col.len(), max_bins)
        })
        .collect();
    let zero_bin = boundaries.iter().map(|b| bin_of(b, 0.0)).collect();
    let rows = x
        .rows()
        .iter()
        .map(|r| r.iter().map(|(j, v)| (j as u32, bin_of(&boundaries[j], v))).collect())
        .collect();
    let mut offsets = Vec::with_capacity(boundaries.len() + 1);
    let mut acc = 0;
    for b in &boundaries {
        offsets.push(acc);
        acc += b.len() + 1;
    }
    offsets.push(acc);
    Ok(BinnedDataset {
        boundaries,
        zero_bin,
        rows,
        offsets,
    })
}

impl BinnedDataset {
    pub fn n_bins(&self, feature: usize) -> usize {
        self.boundaries[feature].len() + 1
    }

    pub fn n_features(&self) -> usize {
        self.boundaries.len()
    }

    fn histogram(&self, samples: &[usize], stats: &[GradStats]) -> (Vec<GradStats>, GradStats) {
        let mut hist = vec![GradStats::default(); *self.offsets.last().unwrap_or(&0)];
        let mut nz = vec![GradStats::default(); self.n_features()];
        let mut total = GradStats::default();
        for &i in samples {
            let s = stats[i];
            total.add(&s);
            for &(f, b) in &self.rows[i] {
                hist[self.offsets[f as usize] + b as usize].add(&s);
                nz[f as usize].add(&s);
            }
        }
        for f in 0..self.n_features() {
            let zero = total.minus(&nz[f]);
            hist[self.offsets[f] + self.zero_bin[f] as usize].add(&zero);
        }
        (hist, total)
    }

    /// Best histogram split of `samples`; each child needs `min_child` samples.
    pub fn best_split(&self, samples: &[usize], stats: &[GradStats], lambda: f64, min_child: usize) -> Option<GradSplit> {
        let (hist, total) = self.histogram(samples, stats);
        let criterion = Criterion::SecondOrder {
            lambda,
            min_child_weight: 0.0,
        };
        let mut best = None;
        for f in 0..self.n_features() {
            let bins = &hist[self.offsets[f]..self.offsets[f + 1]];
            let mut left = GradStats::default();
            for b in 0..bins.len() - 1 {
                left.add(&bins[b]);
                if left.n < min_child as f64 || total.n - left.n < min_child as f64 {
                    continue;
                }
                if let Some(gain) = criterion.gain(&total, &left) {
                    let t = self.boundaries[f][b];
                    if prefer(gain, f, t, &best) {
                        best = Some(GradSplit {
                            feature: f,
                            threshold: t,
                            gain,
                        });
                    }
                }
            }
        }
        best
    }

    fn goes_left(&self, row: usize, feature: usize, threshold: f64) -> bool {
        let limit = bin_of(&self.boundaries[feature], threshold);
        let bin = self.rows[row]
            .iter()
            .find(|&&(f, _)| f as usize == feature)
            .map_or(self.zero_bin[feature], |&(_, b)| b);
        bin <= limit
    }
}

/// One leaf-wise split: the sample sets of all leaves before the split and
/// the leaf that was chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthStep {
    pub leaves: Vec<Vec<usize>>,
    pub chosen: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafwiseParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_child: usize,
    pub lambda: f64,
    pub max_bins: usize,
}

fn grow_leafwise(
    binned: &BinnedDataset,
    stats: &[GradStats],
    params: &LeafwiseParams,
    steps: &mut Vec<GrowthStep>,
) -> RegressionTree {
    let criterion = Criterion::SecondOrder {
        lambda: params.lambda,
        min_child_weight: 0.0,
    };
    struct Open {
        node: usize,
        samples: Vec<usize>,
        split: Option<GradSplit>,
    }
    let all: Vec<usize> = (0..stats.len()).collect();
    let mut nodes = vec![RegNode::Leaf { value: 0.0, samples: 0 }];
    let first = binned.best_split(&all, stats, params.lambda, params.min_child);
    let mut leaves = vec![Open {
        node: 0,
        samples: all,
        split: first,
    }];
    while leaves.len() < params.max_leaves {
        let mut pick: Option<(usize, f64)> = None;
        for (k, leaf) in leaves.iter().enumerate() {
            if let Some(s) = leaf.split {
                if pick.map_or(true, |(_, g)| s.gain > g + GAIN_EPS) {
                    pick = Some((k, s.gain));
                }
            }
        }
        let Some((k, gain)) = pick else { break };
        steps.push(GrowthStep {
            leaves: leaves.iter().map(|l| l.samples.clone()).collect(),
            chosen: k,
            gain,
        });
        let parent = leaves.remove(k);
        let d = parent.split.expect("picked leaf has a split");
        let (left, right): (Vec<usize>, Vec<usize>) = parent
            .samples
            .iter()
            .partition(|&&i| binned.goes_left(i, d.feature, d.threshold));
        let l = nodes.len();
        nodes.push(RegNode::Leaf { value: 0.0, samples: 0 });
        nodes.push(RegNode::Leaf { value: 0.0, samples: 0 });
        nodes[parent.node] = RegNode::Split {
            feature: d.feature as u32,
            threshold: d.threshold,
            left: l as u32,
            right: l as u32 + 1,
        };
        let ls = binned.best_split(&left, stats, params.lambda, params.min_child);
        let rs = binned.best_split(&right, stats, params.lambda, params.min_child);
        leaves.insert(k, Open { node: l, samples: left, split: ls });
        leaves.insert(k + 1, Open { node: l + 1, samples: right, split: rs });
    }
    for leaf in &leaves {
        let mut total = GradStats::default();
        for &i in &leaf.samples {
            total.add(&stats[i]);
        }
        nodes[leaf.node] = RegNode::Leaf {
            value: criterion.leaf_value(&total),
            samples: leaf.samples.len() as u32,
        };
    }
    RegressionTree { nodes }
}

pub fn fit_leafwise_boosting(x: &SparseMatrix, y: &[Label], params: &LeafwiseParams) -> Result<BoostedModel> {
    fit_leafwise_boosting_traced(x, y, params).map(|(m, _)| m)
}

pub fn fit_leafwise_boosting_traced(x: &SparseMatrix, y: &[Label], params: &LeafwiseParams) -> Result<(BoostedModel, BoostTrace)> {
    check_xy(x, y)?;
    if params.max_leaves < 2 {
        return Err(Error::Parameter("max_leaves must be >= 2".into()));
    }
    if params.learning_rate < 0.0 || params.lambda < 0.0 {
        return Err(Error::Parameter("learning rate and lambda must be >= 0".into()));
    }
    let binned = build_histograms(x, params.max_bins)?;
    let base = base_score(y);
    let mut f = vec![base; y.len()];
    let mut loss = mean_log_loss(&f, y);
    let mut trace = BoostTrace {
        train_loss: vec![loss],
        ..BoostTrace::default()
    };
    let mut stages = Vec::new();
    for _ in 0..params.rounds {
        let stats = grads(&f, y);
        let mut steps = Vec::new();
        let tree = grow_leafwise(&binned, &stats, params, &mut steps);
        match accept_stage(&mut f, y, &tree, x, params.learning_rate, &mut loss) {
            Some(weight) => {
                stages.push(BoostStage { tree, weight });
                trace.train_loss.push(loss);
                trace.growth.push(steps);
            }
            None => break,
        }
    }
    Ok((
        BoostedModel {
            kind: BoostKind::LgbmStyle,
            base_score: base,
            stages,
            rounds: params.rounds,
            learning_rate: params.learning_rate,
            bin_boundaries: Some(binned.boundaries),
        },
        trace,
    ))
}

/// Recomputes gradient statistics at the scores a model assigns to `x`.
pub fn gradient_stats(scores: &[f64], y: &[Label]) -> Vec<GradStats> {
    grads(scores, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (SparseMatrix, Vec<Label>) {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0, ((i * 3) % 10) as f64]).collect();
        let y = (0..10).map(|i| u8::from(i >= 5)).collect();
        (SparseMatrix::from_dense_rows(2, &rows).unwrap(), y)
    }

    #[test]
    fn stage_weight_formula() {
        assert!((adaboost_stage_weight(0.25) - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((adaboost_stage_weight(0.25) - 0.549306).abs() < 1e-6);
    }

    #[test]
    fn adaboost_separable() {
        let (x, y) = separable();
        let m = fit_adaboost(&x, &y, 50, 0).unwrap();
        assert_eq!(m.stages.len(), 1);
        let acc = m.predict_proba(&x).iter().zip(&y).filter(|(p, &l)| (**p > 0.5) == (l == 1)).count();
        assert_eq!(acc, 10);
        assert!(matches!(fit_adaboost(&x, &y, 0, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_rounds_predict_prior() {
        let (x, _) = separable();
        let y: Vec<Label> = vec![1, 0, 0, 0, 1, 0, 0, 1, 0, 0];
        let p = GradientParams {
            rounds: 0,
            learning_rate: 0.1,
            max_depth: 3,
            lambda: 1.0,
            min_child_weight: 1.0,
        };
        let m = fit_gradient_boosting(BoostKind::Gbm, &x, &y, &p).unwrap();
        for v in m.predict_proba(&x) {
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn leaf_weight_example() {
        assert!((second_order_leaf_weight(-2.0, 4.0, 1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn eta_zero_is_prior_only() {
        let (x, y) = separable();
        let mk = |rounds| GradientParams {
            rounds,
            learning_rate: 0.0,
            max_depth: 2,
            lambda: 1.0,
            min_child_weight: 0.0,
        };
        let a = fit_gradient_boosting(BoostKind::XgbStyle, &x, &y, &mk(0)).unwrap();
        let b = fit_gradient_boosting(BoostKind::XgbStyle, &x, &y, &mk(5)).unwrap();
        assert_eq!(a.predict_proba(&x), b.predict_proba(&x));
    }

    #[test]
    fn histogram_example() {
        let x = SparseMatrix::from_dense_rows(1, &[vec![0.0], vec![0.1], vec![0.5], vec![1.0]]).unwrap();
        let b = build_histograms(&x, 2).unwrap();
        assert_eq!(b.boundaries[0], vec![0.05, 0.3]);
        assert_eq!(b.zero_bin[0], 0);
        let bins: Vec<u16> = [0.1, 0.5, 1.0].iter().map(|&v| bin_of(&b.boundaries[0], v)).collect();
        assert_eq!(bins, vec![1, 2, 2]);
        assert!(matches!(build_histograms(&x, 256), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_splits_signed_values() {
        let x = SparseMatrix::from_dense_rows(1, &[vec![-0.5], vec![0.0], vec![0.5]]).unwrap();
        assert_eq!(build_histograms(&x, 255).unwrap().boundaries[0], vec![-0.25, 0.25]);
        let x = SparseMatrix::from_dense_rows(1, &[vec![-0.5], vec![0.5]]).unwrap();
        assert_eq!(build_histograms(&x, 255).unwrap().boundaries[0], vec![0.0]);
    }

    #[test]
    fn constant_feature_single_bin() {
        let x = SparseMatrix::from_dense_rows(2, &[vec![0.7, 0.0], vec![0.7, 0.0]]).unwrap();
        let b = build_histograms(&x, 16).unwrap();
        assert_eq!(b.n_bins(0), 1);
        assert_eq!(b.n_bins(1), 1);
    }

    #[test]
    fn min_child_above_n_is_prior() {
        let (x, y) = separable();
        let p = LeafwiseParams {
            rounds: 5,
            learning_rate: 0.1,
            max_leaves: 31,
            min_child: 100,
            lambda: 1.0,
            max_bins: 255,
        };
        let m = fit_leafwise_boosting(&x, &y, &p).unwrap();
        assert!(m.stages.iter().all(|s| s.tree.n_leaves() == 1));
    }
}
