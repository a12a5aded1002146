//! Stratified k-fold grid search over hyperparameter lattices.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion_matrix, summarize_metrics};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::model::{fit_model, ClassifierSpec, ModelKind, ParamValue};
use crate::util::rng_from_seed;

pub const DEFAULT_FOLDS: usize = 3;

/// Fold membership: `folds[f]` lists row positions, ascending.
pub fn stratified_folds(y: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {k}")));
    }
    if y.len() < k {
        return Err(Error::Stratification(format!("{} rows cannot fill {k} folds", y.len())));
    }
    let mut rng = rng_from_seed(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in 0..2u8 {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Rows read while fitting and scoring one fold.
#[derive(Debug, Clone, Copy)]
pub struct FoldAccess<'a> {
    pub fit_rows: &'a [usize],
    pub eval_rows: &'a [usize],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub spec: ClassifierSpec,
    pub fold_f1: Vec<f64>,
    pub fold_accuracy: Vec<f64>,
    pub mean_f1: f64,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: ClassifierSpec,
    pub table: Vec<CvRow>,
}

pub fn grid_search(
    grid: &[ClassifierSpec],
    x: &FeatureMatrix,
    y: &[Label],
    folds: usize,
    seed: u64,
) -> Result<GridResult> {
    grid_search_with_probe(grid, x, y, folds, seed, &mut |_| {})
}

/// Grid search reporting every fold's row access to `probe`. Selection is by
/// mean F1, then mean accuracy, then grid order.
pub fn grid_search_with_probe(
    grid: &[ClassifierSpec],
    x: &FeatureMatrix,
    y: &[Label],
    folds: usize,
    seed: u64,
    probe: &mut dyn FnMut(FoldAccess<'_>),
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty hyperparameter grid".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    let fold_sets = stratified_folds(y, folds, seed)?;
    let mut table = Vec::with_capacity(grid.len());
    for spec in grid {
        let mut fold_f1 = Vec::with_capacity(folds);
        let mut fold_accuracy = Vec::with_capacity(folds);
        for (f, eval_rows) in fold_sets.iter().enumerate() {
            let fit_rows: Vec<usize> = fold_sets
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            probe(FoldAccess {
                fit_rows: &fit_rows,
                eval_rows,
            });
            let y_fit: Vec<Label> = fit_rows.iter().map(|&i| y[i]).collect();
            let y_eval: Vec<Label> = eval_rows.iter().map(|&i| y[i]).collect();
            let model = fit_model(spec, &x.select_rows(&fit_rows), &y_fit, seed)?;
            let pred = model.predict_labels(&x.select_rows(eval_rows))?;
            let m = summarize_metrics(&confusion_matrix(&y_eval, &pred)?);
            fold_f1.push(m.f1_pos);
            fold_accuracy.push(m.accuracy);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        table.push(CvRow {
            spec: spec.clone(),
            mean_f1: mean(&fold_f1),
            mean_accuracy: mean(&fold_accuracy),
            fold_f1,
            fold_accuracy,
        });
    }
    let mut best = 0;
    for (i, row) in table.iter().enumerate().skip(1) {
        let b = &table[best];
        if row.mean_f1 > b.mean_f1 || (row.mean_f1 == b.mean_f1 && row.mean_accuracy > b.mean_accuracy) {
            best = i;
        }
    }
    Ok(GridResult {
        best: table[best].spec.clone(),
        table,
    })
}

fn lattice(kind: ModelKind, axes: &[(&str, Vec<ParamValue>)]) -> Vec<ClassifierSpec> {
    let mut specs = vec![ClassifierSpec::new(kind)];
    for (name, values) in axes {
        let mut next = Vec::with_capacity(specs.len() * values.len());
        for s in &specs {
            for v in values {
                let mut t = s.clone();
                t.set(name, v.clone()).expect("default grids use declared parameters");
                next.push(t);
            }
        }
        specs = next;
    }
    specs
}

/// A small lattice (at most six points) around each kind's defaults.
pub fn default_grid(kind: ModelKind) -> Vec<ClassifierSpec> {
    use ParamValue::{Choice, Int, Real};
    let w = |s: &str| Choice(s.to_string());
    match kind {
        ModelKind::GaussianNb => lattice(kind, &[("var_smoothing", vec![Real(1e-9), Real(1e-6), Real(1e-3)])]),
        ModelKind::MultinomialNb | ModelKind::BernoulliNb => {
            lattice(kind, &[("alpha", vec![Real(0.1), Real(0.5), Real(1.0)])])
        }
        ModelKind::DecisionTree => lattice(kind, &[("max_depth", vec![w("none"), Int(20), Int(50)])]),
        ModelKind::RandomForest | ModelKind::ExtraTrees => {
            lattice(kind, &[("n_estimators", vec![Int(100), Int(200)])])
        }
        ModelKind::Lda => lattice(kind, &[("shrinkage", vec![Real(0.1), Real(0.3), Real(0.5)])]),
        ModelKind::Qda => lattice(kind, &[("reg", vec![Real(1e-3), Real(1e-2), Real(1e-1)])]),
        ModelKind::Adaboost => lattice(kind, &[("n_rounds", vec![Int(50), Int(100)])]),
        ModelKind::Gbm => lattice(kind, &[("learning_rate", vec![Real(0.1), Real(0.3)])]),
        ModelKind::XgbStyle => lattice(kind, &[("max_depth", vec![Int(3), Int(6)])]),
        ModelKind::LgbmStyle => lattice(
            kind,
            &[("max_leaves", vec![Int(15), Int(31)]), ("min_child", vec![Int(5), Int(20)])],
        ),
        ModelKind::LogisticRegression | ModelKind::LinearSvc => {
            lattice(kind, &[("lambda", vec![Real(1e-5), Real(1e-4), Real(1e-3)])])
        }
        ModelKind::Perceptron => lattice(kind, &[("epochs", vec![Int(10), Int(20)])]),
        ModelKind::Sgd => lattice(
            kind,
            &[("loss", vec![w("hinge"), w("logistic")]), ("lambda", vec![Real(1e-4), Real(1e-3)])],
        ),
        ModelKind::Svm => lattice(kind, &[("c", vec![Real(1.0), Real(10.0)]), ("kernel", vec![w("rbf"), w("linear")])]),
        ModelKind::Knn => lattice(kind, &[("k", vec![Int(3), Int(5), Int(11)])]),
        ModelKind::Voting => vec![ClassifierSpec::new(kind)],
    }
}
