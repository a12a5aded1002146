//! The nineteen-model benchmark.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{default_grid, grid_search_with_probe, DEFAULT_FOLDS};
use super::metrics::{confusion_matrix, summarize_metrics, ConfusionMatrix, EvalReport};
use crate::corpus::{stratified_split_indices, Label, LabeledCorpus};
use crate::error::Result;
use crate::features::TfidfFeaturizer;
use crate::model::{fit_model, ClassifierSpec, ModelKind, ParamValue, TrainedModel};
use crate::normalize::{normalize_corpus, NormalizerConfig, TokenStream};

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub test_fraction: f64,
    pub seed: u64,
    pub min_df: usize,
    pub grid_search: bool,
    pub folds: usize,
    pub normalizer: NormalizerConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            test_fraction: 0.3,
            seed: 42,
            min_df: 2,
            grid_search: false,
            folds: DEFAULT_FOLDS,
            normalizer: NormalizerConfig::bundled(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: ModelKind,
    pub hyperparameters: std::collections::BTreeMap<String, ParamValue>,
    pub confusion: ConfusionMatrix,
    pub metrics: EvalReport,
    /// Fit plus test-set prediction time. Not serialized, so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub corpus: String,
    pub n_documents: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_size: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub min_df: usize,
    pub grid_search: bool,
    /// Sorted by F1 descending; ties keep roster order.
    pub results: Vec<ModelResult>,
}

impl BenchmarkReport {
    pub fn result(&self, kind: ModelKind) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.model == kind)
    }
}

/// Everything a benchmark run fits, kept for callers that want the models.
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub featurizer: TfidfFeaturizer,
    pub models: Vec<TrainedModel>,
}

pub fn run_benchmark(corpus: &LabeledCorpus, config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    Ok(run_benchmark_full(corpus, config, &|_| {})?.report)
}

/// Runs the benchmark; `probe` receives the document ids read by every
/// cross-validation fold.
pub fn run_benchmark_full(
    corpus: &LabeledCorpus,
    config: &BenchmarkConfig,
    probe: &(dyn Fn(&[usize]) + Sync),
) -> Result<BenchmarkRun> {
    let (train_pos, test_pos) = stratified_split_indices(corpus, config.test_fraction, config.seed)?;
    let tokens: Vec<TokenStream> = normalize_corpus(corpus.texts(), &config.normalizer);
    let pick = |pos: &[usize]| -> (Vec<TokenStream>, Vec<Label>) {
        (
            pos.iter().map(|&i| tokens[i].clone()).collect(),
            pos.iter().map(|&i| corpus.docs[i].label).collect(),
        )
    };
    let (train_tokens, y_train) = pick(&train_pos);
    let (test_tokens, y_test) = pick(&test_pos);
    let featurizer = TfidfFeaturizer::fit(&train_tokens, config.min_df);
    let x_train = featurizer.transform(&train_tokens);
    let x_test = featurizer.transform(&test_tokens);
    let train_ids: Vec<usize> = train_pos.iter().map(|&i| corpus.docs[i].id).collect();

    let members: Vec<ModelKind> = ModelKind::voting_members().collect();
    let fitted = members
        .par_iter()
        .map(|&kind| -> Result<(TrainedModel, ModelResult)> {
            let start = Instant::now();
            let spec = if config.grid_search {
                let mut report_rows = |access: super::grid::FoldAccess<'_>| {
                    let ids: Vec<usize> = access
                        .fit_rows
                        .iter()
                        .chain(access.eval_rows)
                        .map(|&p| train_ids[p])
                        .collect();
                    probe(&ids);
                };
                grid_search_with_probe(
                    &default_grid(kind),
                    &x_train,
                    &y_train,
                    config.folds,
                    config.seed,
                    &mut report_rows,
                )?
                .best
            } else {
                ClassifierSpec::new(kind)
            };
            let model = fit_model(&spec, &x_train, &y_train, config.seed)?;
            let result = evaluate(&model, &x_test, &y_test, start)?;
            Ok((model, result))
        })
        .collect::<Result<Vec<_>>>()?;

    let (models, mut results): (Vec<TrainedModel>, Vec<ModelResult>) = fitted.into_iter().unzip();
    let start = Instant::now();
    let voting = TrainedModel::voting_from_members(models.clone())?;
    results.push(evaluate(&voting, &x_test, &y_test, start)?);
    let mut models = models;
    models.push(voting);

    results.sort_by(|a, b| b.metrics.f1_pos.total_cmp(&a.metrics.f1_pos));
    let report = BenchmarkReport {
        corpus: corpus.provenance.clone(),
        n_documents: corpus.len(),
        n_train: train_pos.len(),
        n_test: test_pos.len(),
        vocabulary_size: featurizer.vocabulary().len(),
        seed: config.seed,
        test_fraction: config.test_fraction,
        min_df: config.min_df,
        grid_search: config.grid_search,
        results,
    };
    Ok(BenchmarkRun {
        report,
        featurizer,
        models,
    })
}

fn evaluate(
    model: &TrainedModel,
    x: &crate::features::FeatureMatrix,
    y: &[Label],
    start: Instant,
) -> Result<ModelResult> {
    let pred = model.predict_labels(x)?;
    let confusion = confusion_matrix(y, &pred)?;
    Ok(ModelResult {
        model: model.kind(),
        hyperparameters: model.spec.hyperparameters.clone(),
        confusion,
        metrics: summarize_metrics(&confusion),
        wall_time: start.elapsed(),
    })
}
