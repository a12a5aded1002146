use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nineteen classifier kinds, in roster order. `Voting` is always last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GaussianNb,
    MultinomialNb,
    BernoulliNb,
    DecisionTree,
    ExtraTrees,
    Lda,
    Qda,
    Adaboost,
    Gbm,
    RandomForest,
    LogisticRegression,
    Perceptron,
    LinearSvc,
    XgbStyle,
    Knn,
    Svm,
    Sgd,
    LgbmStyle,
    Voting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 19] = [
        ModelKind::GaussianNb,
        ModelKind::MultinomialNb,
        ModelKind::BernoulliNb,
        ModelKind::DecisionTree,
        ModelKind::ExtraTrees,
        ModelKind::Lda,
        ModelKind::Qda,
        ModelKind::Adaboost,
        ModelKind::Gbm,
        ModelKind::RandomForest,
        ModelKind::LogisticRegression,
        ModelKind::Perceptron,
        ModelKind::LinearSvc,
        ModelKind::XgbStyle,
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::Sgd,
        ModelKind::LgbmStyle,
        ModelKind::Voting,
    ];

    /// Every kind except `Voting`.
    pub fn voting_members() -> impl Iterator<Item = ModelKind> {
        Self::ALL.into_iter().filter(|k| *k != ModelKind::Voting)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::MultinomialNb => "multinomial_nb",
            ModelKind::BernoulliNb => "bernoulli_nb",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::ExtraTrees => "extra_trees",
            ModelKind::Lda => "lda",
            ModelKind::Qda => "qda",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Gbm => "gbm",
            ModelKind::RandomForest => "random_forest",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::Perceptron => "perceptron",
            ModelKind::LinearSvc => "linear_svc",
            ModelKind::XgbStyle => "xgb_style",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::Sgd => "sgd",
            ModelKind::LgbmStyle => "lgbm_style",
            ModelKind::Voting => "voting",
        }
    }

    /// Row label used in rendered reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "Gaussian Naive Bayes",
            ModelKind::MultinomialNb => "Multinomial Naive Bayes",
            ModelKind::BernoulliNb => "Bernoulli Naive Bayes",
            ModelKind::DecisionTree => "Decision Tree",
            ModelKind::ExtraTrees => "Extra Trees",
            ModelKind::Lda => "Linear Discriminant Analysis",
            ModelKind::Qda => "Quadratic Discriminant Analysis",
            ModelKind::Adaboost => "AdaBoost",
            ModelKind::Gbm => "Gradient Boosting",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::LogisticRegression => "Logistic Regression",
            ModelKind::Perceptron => "Perceptron",
            ModelKind::LinearSvc => "Linear SVC",
            ModelKind::XgbStyle => "XGBoost-style Boosting",
            ModelKind::Knn => "K-Nearest Neighbors",
            ModelKind::Svm => "Support Vector Machine",
            ModelKind::Sgd => "Stochastic Gradient Descent",
            ModelKind::LgbmStyle => "LightGBM-style Boosting",
            ModelKind::Voting => "Voting Classifier",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown model kind `{s}`")))
    }
}

/// One hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Choice(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Choice(s) => f.write_str(s),
        }
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}
impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}
impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}
impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}
impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Choice(v.to_string())
    }
}

/// Which values a word-valued parameter also accepts besides its words.
#[derive(Clone, Copy, PartialEq)]
enum Numeric {
    No,
    Integer,
    PositiveReal,
}

struct ParamDef {
    name: &'static str,
    default: ParamValue,
    choices: &'static [&'static str],
    numeric: Numeric,
}

const fn def(name: &'static str, default: ParamValue) -> ParamDef {
    ParamDef {
        name,
        default,
        choices: &[],
        numeric: Numeric::No,
    }
}

fn real(name: &'static str, v: f64) -> ParamDef {
    def(name, ParamValue::Real(v))
}
fn int(name: &'static str, v: i64) -> ParamDef {
    def(name, ParamValue::Int(v))
}
fn choice(name: &'static str, v: &str, choices: &'static [&'static str]) -> ParamDef {
    ParamDef {
        name,
        default: ParamValue::Choice(v.to_string()),
        choices,
        numeric: Numeric::No,
    }
}

fn choice_or(
    name: &'static str,
    v: &str,
    choices: &'static [&'static str],
    numeric: Numeric,
) -> ParamDef {
    ParamDef {
        numeric,
        ..choice(name, v, choices)
    }
}

// `max_depth` is either a positive integer or "none"; `max_features` an integer or "sqrt"/"all".
const DEPTH_WORDS: &[&str] = &["none"];
const FEATURE_WORDS: &[&str] = &["sqrt", "all"];

fn tree_defs(bootstrap: bool, max_features: &str) -> Vec<ParamDef> {
    vec![
        int("n_estimators", 100),
        choice_or("max_depth", "none", DEPTH_WORDS, Numeric::Integer),
        int("min_samples_split", 2),
        int("min_samples_leaf", 1),
        choice_or("max_features", max_features, FEATURE_WORDS, Numeric::Integer),
        def("bootstrap", ParamValue::Bool(bootstrap)),
    ]
}

fn definitions(kind: ModelKind) -> Vec<ParamDef> {
    match kind {
        ModelKind::GaussianNb => vec![int("top_k", 2000), real("var_smoothing", 1e-9)],
        ModelKind::MultinomialNb | ModelKind::BernoulliNb => vec![real("alpha", 1.0)],
        ModelKind::DecisionTree => vec![
            choice_or("max_depth", "none", DEPTH_WORDS, Numeric::Integer),
            int("min_samples_split", 2),
            int("min_samples_leaf", 1),
        ],
        ModelKind::RandomForest => tree_defs(true, "sqrt"),
        ModelKind::ExtraTrees => tree_defs(false, "sqrt"),
        ModelKind::Lda => vec![int("top_k", 2000), real("shrinkage", 0.1)],
        ModelKind::Qda => vec![int("top_k", 2000), real("reg", 1e-3)],
        ModelKind::Adaboost => vec![int("n_rounds", 50)],
        ModelKind::Gbm => vec![
            int("n_rounds", 100),
            real("learning_rate", 0.1),
            int("max_depth", 3),
        ],
        ModelKind::XgbStyle => vec![
            int("n_rounds", 50),
            real("learning_rate", 0.3),
            int("max_depth", 3),
            real("lambda", 1.0),
            real("min_child_weight", 1.0),
        ],
        ModelKind::LgbmStyle => vec![
            int("n_rounds", 100),
            real("learning_rate", 0.1),
            int("max_leaves", 31),
            int("min_child", 20),
            real("lambda", 1.0),
            int("max_bins", 255),
        ],
        ModelKind::LogisticRegression | ModelKind::LinearSvc => vec![
            real("lambda", 1e-4),
            int("epochs", 20),
            real("eta0", 0.1),
        ],
        ModelKind::Perceptron => vec![int("epochs", 20)],
        ModelKind::Sgd => vec![
            choice("loss", "hinge", &["hinge", "logistic", "perceptron"]),
            real("lambda", 1e-4),
            int("epochs", 10),
            real("eta0", 0.1),
        ],
        ModelKind::Svm => vec![
            real("c", 1.0),
            choice("kernel", "rbf", &["rbf", "linear"]),
            choice_or("gamma", "scale", &["scale"], Numeric::PositiveReal),
            real("tol", 1e-3),
            int("max_passes", 1000),
        ],
        ModelKind::Knn => vec![
            int("k", 5),
            choice("metric", "cosine", &["cosine", "euclidean"]),
        ],
        ModelKind::Voting => vec![],
    }
}

/// A model kind with a complete hyperparameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ModelKind,
    pub hyperparameters: BTreeMap<String, ParamValue>,
}

impl ClassifierSpec {
    pub fn new(kind: ModelKind) -> Self {
        let hyperparameters = definitions(kind)
            .into_iter()
            .map(|d| (d.name.to_string(), d.default))
            .collect();
        ClassifierSpec {
            kind,
            hyperparameters,
        }
    }

    /// Validated builder; rejects unknown names and mistyped values.
    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Result<Self> {
        self.set(name, value.into())?;
        Ok(self)
    }

    pub fn set(&mut self, name: &str, value: ParamValue) -> Result<()> {
        let defs = definitions(self.kind);
        let d = defs.iter().find(|d| d.name == name).ok_or_else(|| {
            Error::Spec(format!("{} has no hyperparameter `{name}`", self.kind))
        })?;
        let value = coerce(self.kind, d, value)?;
        self.hyperparameters.insert(name.to_string(), value);
        Ok(())
    }

    /// Rebuilds from a name/value map, filling defaults for missing names.
    pub fn from_map(kind: ModelKind, params: &BTreeMap<String, ParamValue>) -> Result<Self> {
        let mut spec = ClassifierSpec::new(kind);
        for (k, v) in params {
            spec.set(k, v.clone())?;
        }
        Ok(spec)
    }

    fn get(&self, name: &str) -> Result<&ParamValue> {
        self.hyperparameters
            .get(name)
            .ok_or_else(|| Error::Spec(format!("{} has no hyperparameter `{name}`", self.kind)))
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        match self.get(name)? {
            ParamValue::Real(x) => Ok(*x),
            ParamValue::Int(i) => Ok(*i as f64),
            other => Err(Error::Spec(format!("`{name}` = {other} is not a number"))),
        }
    }

    pub fn int(&self, name: &str) -> Result<i64> {
        match self.get(name)? {
            ParamValue::Int(i) => Ok(*i),
            other => Err(Error::Spec(format!("`{name}` = {other} is not an integer"))),
        }
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        let v = self.int(name)?;
        usize::try_from(v).map_err(|_| Error::Parameter(format!("`{name}` must be >= 0, got {v}")))
    }

    pub fn boolean(&self, name: &str) -> Result<bool> {
        match self.get(name)? {
            ParamValue::Bool(b) => Ok(*b),
            other => Err(Error::Spec(format!("`{name}` = {other} is not a boolean"))),
        }
    }

    pub fn param(&self, name: &str) -> Result<&ParamValue> {
        self.get(name)
    }

    /// Short `name=value` listing for reports.
    pub fn describe(&self) -> String {
        self.hyperparameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn coerce(kind: ModelKind, d: &ParamDef, value: ParamValue) -> Result<ParamValue> {
    let bad = |v: &ParamValue| {
        Error::Spec(format!(
            "{kind}: `{}` cannot take value {v} (default {})",
            d.name, d.default
        ))
    };
    match (&d.default, &value) {
        (ParamValue::Real(_), ParamValue::Real(x)) if x.is_finite() => Ok(value),
        (ParamValue::Real(_), ParamValue::Int(i)) => Ok(ParamValue::Real(*i as f64)),
        (ParamValue::Int(_), ParamValue::Int(_)) => Ok(value),
        (ParamValue::Bool(_), ParamValue::Bool(_)) => Ok(value),
        (ParamValue::Choice(_), ParamValue::Choice(s)) if d.choices.contains(&s.as_str()) => {
            Ok(value)
        }
        (ParamValue::Choice(_), ParamValue::Int(i)) => match d.numeric {
            Numeric::Integer if *i > 0 => Ok(value),
            Numeric::PositiveReal if *i > 0 => Ok(ParamValue::Real(*i as f64)),
            _ => Err(bad(&value)),
        },
        (ParamValue::Choice(_), ParamValue::Real(x))
            if d.numeric == Numeric::PositiveReal && x.is_finite() && *x > 0.0 =>
        {
            Ok(value)
        }
        _ => Err(bad(&value)),
    }
}
