//! The classifier contract shared by every model kind.

mod persist;
mod spec;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use persist::{load_model, model_from_json, model_to_json, save_model, FORMAT_VERSION};
pub use spec::*;

use crate::bayes::{fit_naive_bayes, NaiveBayesModel, NbVariant};
use crate::boosting::{
    fit_adaboost, fit_gradient_boosting, fit_leafwise_boosting, BoostKind, BoostedModel, GradientParams,
    LeafwiseParams,
};
use crate::corpus::Label;
use crate::discriminant::{fit_discriminant, DiscriminantKind, DiscriminantModel};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSpace};
use crate::linear::smo::{fit_svm_smo, KernelChoice, SmoModel, SmoParams};
use crate::linear::{fit_linear, LinearModel, LinearParams, Loss};
use crate::neighbors::{fit_knn, soft_vote, KnnModel};
use crate::sparse::SparseMatrix;
use crate::tree::{fit_tree_ensemble, ForestKind, ForestModel, ForestParams, MaxFeatures};

/// Fitted parameters of one kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPayload {
    /// Single-label training data.
    Constant { probability: f64 },
    NaiveBayes(NaiveBayesModel),
    Linear(LinearModel),
    Smo(SmoModel),
    Discriminant(DiscriminantModel),
    Forest(ForestModel),
    Boosted(BoostedModel),
    Knn(KnnModel),
    Voting { members: Vec<VotingMember> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingMember {
    pub spec: ClassifierSpec,
    pub payload: ModelPayload,
}

impl ModelPayload {
    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        let raw = match self {
            ModelPayload::Constant { probability } => vec![*probability; x.n_rows()],
            ModelPayload::NaiveBayes(m) => m.predict_proba(x)?,
            ModelPayload::Linear(m) => m.predict_proba(x),
            ModelPayload::Smo(m) => m.predict_proba(x),
            ModelPayload::Discriminant(m) => m.predict_proba(x),
            ModelPayload::Forest(m) => m.predict_proba(x),
            ModelPayload::Boosted(m) => m.predict_proba(x),
            ModelPayload::Knn(m) => m.predict_proba(x),
            ModelPayload::Voting { members } => {
                let probs = members
                    .par_iter()
                    .map(|m| m.payload.predict_proba(x))
                    .collect::<Result<Vec<_>>>()?;
                soft_vote(&probs)?
            }
        };
        Ok(raw.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
    }

    fn restore(&mut self) {
        match self {
            ModelPayload::Knn(m) => m.prepare(),
            ModelPayload::Voting { members } => members.iter_mut().for_each(|m| m.payload.restore()),
            _ => {}
        }
    }
}

/// A fitted classifier bound to the feature space it was trained on.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub space: Arc<FeatureSpace>,
    pub fingerprint: String,
    pub payload: ModelPayload,
    pub seed: u64,
    pub n_train: usize,
}

/// Hard label: 1 iff the probability exceeds 0.5.
pub fn label_of(probability: f64) -> Label {
    u8::from(probability > 0.5)
}

fn check_training(x: &SparseMatrix, y: &[Label]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::Data("cannot fit on zero rows".into()));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::Data(format!("label {bad} is not binary")));
    }
    if !x.all_finite() {
        return Err(Error::Data("non-finite feature value".into()));
    }
    Ok(())
}

fn depth_param(spec: &ClassifierSpec) -> Result<Option<usize>> {
    match spec.param("max_depth")? {
        ParamValue::Choice(s) if s == "none" => Ok(None),
        _ => spec.usize("max_depth").map(Some),
    }
}

fn max_features_param(spec: &ClassifierSpec) -> Result<MaxFeatures> {
    match spec.param("max_features")? {
        ParamValue::Choice(s) if s == "sqrt" => Ok(MaxFeatures::Sqrt),
        ParamValue::Choice(s) if s == "all" => Ok(MaxFeatures::All),
        _ => spec.usize("max_features").map(MaxFeatures::Count),
    }
}

fn choice_param<'a>(spec: &'a ClassifierSpec, name: &str) -> Result<&'a str> {
    match spec.param(name)? {
        ParamValue::Choice(s) => Ok(s.as_str()),
        other => Err(Error::Spec(format!("`{name}` = {other} is not a word"))),
    }
}

fn linear_params(spec: &ClassifierSpec, loss: Loss) -> Result<LinearParams> {
    let mut p = LinearParams::new(loss);
    p.epochs = spec.usize("epochs")?;
    if loss != Loss::Perceptron {
        p.lambda = spec.real("lambda")?;
        p.eta0 = spec.real("eta0")?;
    }
    Ok(p)
}

/// Fits the kind-specific payload on a bare sparse matrix.
pub fn fit_payload(spec: &ClassifierSpec, x: &SparseMatrix, y: &[Label], seed: u64) -> Result<ModelPayload> {
    check_training(x, y)?;
    if y.iter().all(|&l| l == y[0]) {
        return Ok(ModelPayload::Constant {
            probability: y[0] as f64,
        });
    }
    let payload = match spec.kind {
        ModelKind::GaussianNb => ModelPayload::NaiveBayes(fit_naive_bayes(
            NbVariant::Gaussian,
            x,
            y,
            spec.real("var_smoothing")?,
            spec.usize("top_k")?,
        )?),
        ModelKind::MultinomialNb => {
            ModelPayload::NaiveBayes(fit_naive_bayes(NbVariant::Multinomial, x, y, spec.real("alpha")?, 0)?)
        }
        ModelKind::BernoulliNb => {
            ModelPayload::NaiveBayes(fit_naive_bayes(NbVariant::Bernoulli, x, y, spec.real("alpha")?, 0)?)
        }
        ModelKind::DecisionTree => {
            let mut p = ForestParams::defaults(ForestKind::Cart);
            p.tree.max_depth = depth_param(spec)?;
            p.tree.min_samples_split = spec.usize("min_samples_split")?;
            p.tree.min_samples_leaf = spec.usize("min_samples_leaf")?;
            ModelPayload::Forest(fit_tree_ensemble(ForestKind::Cart, x, y, &p, seed)?)
        }
        ModelKind::RandomForest | ModelKind::ExtraTrees => {
            let kind = if spec.kind == ModelKind::RandomForest {
                ForestKind::RandomForest
            } else {
                ForestKind::ExtraTrees
            };
            let mut p = ForestParams::defaults(kind);
            p.n_estimators = spec.usize("n_estimators")?;
            p.tree.max_depth = depth_param(spec)?;
            p.tree.min_samples_split = spec.usize("min_samples_split")?;
            p.tree.min_samples_leaf = spec.usize("min_samples_leaf")?;
            p.tree.max_features = max_features_param(spec)?;
            p.bootstrap = spec.boolean("bootstrap")?;
            ModelPayload::Forest(fit_tree_ensemble(kind, x, y, &p, seed)?)
        }
        ModelKind::Lda => ModelPayload::Discriminant(fit_discriminant(
            DiscriminantKind::Lda,
            x,
            y,
            spec.usize("top_k")?,
            spec.real("shrinkage")?,
        )?),
        ModelKind::Qda => ModelPayload::Discriminant(fit_discriminant(
            DiscriminantKind::Qda,
            x,
            y,
            spec.usize("top_k")?,
            spec.real("reg")?,
        )?),
        ModelKind::Adaboost => ModelPayload::Boosted(fit_adaboost(x, y, spec.usize("n_rounds")?, seed)?),
        ModelKind::Gbm => ModelPayload::Boosted(fit_gradient_boosting(
            BoostKind::Gbm,
            x,
            y,
            &GradientParams {
                rounds: spec.usize("n_rounds")?,
                learning_rate: spec.real("learning_rate")?,
                max_depth: spec.usize("max_depth")?,
                lambda: 0.0,
                min_child_weight: 0.0,
            },
        )?),
        ModelKind::XgbStyle => ModelPayload::Boosted(fit_gradient_boosting(
            BoostKind::XgbStyle,
            x,
            y,
            &GradientParams {
                rounds: spec.usize("n_rounds")?,
                learning_rate: spec.real("learning_rate")?,
                max_depth: spec.usize("max_depth")?,
                lambda: spec.real("lambda")?,
                min_child_weight: spec.real("min_child_weight")?,
            },
        )?),
        ModelKind::LgbmStyle => ModelPayload::Boosted(fit_leafwise_boosting(
            x,
            y,
            &LeafwiseParams {
                rounds: spec.usize("n_rounds")?,
                learning_rate: spec.real("learning_rate")?,
                max_leaves: spec.usize("max_leaves")?,
                min_child: spec.usize("min_child")?,
                lambda: spec.real("lambda")?,
                max_bins: spec.usize("max_bins")?,
            },
        )?),
        ModelKind::LogisticRegression => {
            ModelPayload::Linear(fit_linear(x, y, &linear_params(spec, Loss::Logistic)?, seed)?)
        }
        ModelKind::LinearSvc => ModelPayload::Linear(fit_linear(x, y, &linear_params(spec, Loss::Hinge)?, seed)?),
        ModelKind::Perceptron => {
            ModelPayload::Linear(fit_linear(x, y, &linear_params(spec, Loss::Perceptron)?, seed)?)
        }
        ModelKind::Sgd => {
            let loss: Loss = choice_param(spec, "loss")?.parse()?;
            ModelPayload::Linear(fit_linear(x, y, &linear_params(spec, loss)?, seed)?)
        }
        ModelKind::Svm => {
            let kernel = match choice_param(spec, "kernel")? {
                "linear" => KernelChoice::Linear,
                _ => KernelChoice::Rbf(match spec.param("gamma")? {
                    ParamValue::Choice(_) => None,
                    _ => Some(spec.real("gamma")?),
                }),
            };
            let p = SmoParams {
                c: spec.real("c")?,
                kernel,
                tol: spec.real("tol")?,
                max_passes: spec.usize("max_passes")?,
            };
            ModelPayload::Smo(fit_svm_smo(x, y, &p, seed)?)
        }
        ModelKind::Knn => ModelPayload::Knn(fit_knn(
            x,
            y,
            spec.usize("k")?,
            choice_param(spec, "metric")?.parse()?,
        )?),
        ModelKind::Voting => {
            let kinds: Vec<ModelKind> = ModelKind::voting_members().collect();
            let members = kinds
                .par_iter()
                .map(|&k| {
                    let s = ClassifierSpec::new(k);
                    fit_payload(&s, x, y, seed).map(|payload| VotingMember { spec: s, payload })
                })
                .collect::<Result<Vec<_>>>()?;
            ModelPayload::Voting { members }
        }
    };
    Ok(payload)
}

/// Fits `spec` on `x`; identical arguments give identical payloads.
pub fn fit_model(spec: &ClassifierSpec, x: &FeatureMatrix, y: &[Label], seed: u64) -> Result<TrainedModel> {
    if x.matrix.dim() != x.space.dim {
        return Err(Error::Shape(format!(
            "matrix has {} columns but its space has {}",
            x.matrix.dim(),
            x.space.dim
        )));
    }
    let payload = fit_payload(spec, &x.matrix, y, seed)?;
    Ok(TrainedModel {
        spec: spec.clone(),
        space: Arc::clone(&x.space),
        fingerprint: x.space.fingerprint(),
        payload,
        seed,
        n_train: y.len(),
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn check_compatible(&self, x: &FeatureMatrix) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &x.space) {
            let found = x.space.fingerprint();
            if found != self.fingerprint {
                return Err(Error::Compatibility {
                    expected: self.fingerprint.clone(),
                    found,
                });
            }
        }
        if x.matrix.dim() != self.space.dim {
            return Err(Error::Shape(format!(
                "matrix has {} columns, model expects {}",
                x.matrix.dim(),
                self.space.dim
            )));
        }
        Ok(())
    }

    /// Probability of label 1 for every row, in `[0, 1]`.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_compatible(x)?;
        self.payload.predict_proba(&x.matrix)
    }

    pub fn predict_labels(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        Ok(self.predict_proba(x)?.into_iter().map(label_of).collect())
    }

    /// Soft-voting ensemble over already fitted members. Every non-voting
    /// kind must appear exactly once and all members must share one feature
    /// space.
    pub fn voting_from_members(members: Vec<TrainedModel>) -> Result<TrainedModel> {
        let Some(first) = members.first() else {
            return Err(Error::Parameter("voting needs members".into()));
        };
        let mut kinds: Vec<ModelKind> = members.iter().map(|m| m.kind()).collect();
        kinds.sort();
        let expected: Vec<ModelKind> = ModelKind::voting_members().collect();
        if kinds != expected {
            return Err(Error::Parameter(
                "voting members must be the eighteen non-voting kinds, once each".into(),
            ));
        }
        for m in &members {
            if m.fingerprint != first.fingerprint {
                return Err(Error::Compatibility {
                    expected: first.fingerprint.clone(),
                    found: m.fingerprint.clone(),
                });
            }
        }
        let space = Arc::clone(&first.space);
        let fingerprint = first.fingerprint.clone();
        let (seed, n_train) = (first.seed, first.n_train);
        Ok(TrainedModel {
            spec: ClassifierSpec::new(ModelKind::Voting),
            space,
            fingerprint,
            payload: ModelPayload::Voting {
                members: members
                    .into_iter()
                    .map(|m| VotingMember {
                        spec: m.spec,
                        payload: m.payload,
                    })
                    .collect(),
            },
            seed,
            n_train,
        })
    }

    /// Members of a voting model as standalone models, in stored order.
    pub fn voting_members(&self) -> Option<Vec<TrainedModel>> {
        match &self.payload {
            ModelPayload::Voting { members } => Some(
                members
                    .iter()
                    .map(|m| TrainedModel {
                        spec: m.spec.clone(),
                        space: Arc::clone(&self.space),
                        fingerprint: self.fingerprint.clone(),
                        payload: m.payload.clone(),
                        seed: self.seed,
                        n_train: self.n_train,
                    })
                    .collect(),
            ),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_threshold() {
        assert_eq!(label_of(0.7), 1);
        assert_eq!(label_of(0.5), 0);
        assert_eq!(label_of(0.49999), 0);
    }

    #[test]
    fn single_label_is_constant_for_every_kind() {
        let x = FeatureMatrix::anonymous(SparseMatrix::from_dense_rows(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        for kind in ModelKind::ALL {
            let m = fit_model(&ClassifierSpec::new(kind), &x, &[1, 1], 0).unwrap();
            for p in m.predict_proba(&x).unwrap() {
                assert!(p >= 1.0 - 1e-9, "{kind}");
            }
        }
    }

    #[test]
    fn fingerprint_mismatch_rejected() {
        let a = FeatureMatrix::anonymous(SparseMatrix::from_dense_rows(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let b = FeatureMatrix::anonymous(SparseMatrix::from_dense_rows(3, &[vec![1.0, 0.0, 0.0]]).unwrap());
        let m = fit_model(&ClassifierSpec::new(ModelKind::MultinomialNb), &a, &[0, 1], 0).unwrap();
        assert!(matches!(m.predict_proba(&b), Err(Error::Compatibility { .. })));
    }
}
