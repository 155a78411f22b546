//! Gaussian Naive Bayes, Parzen-window PNN and Random Forest classifiers
//! behind one trained-model type.

mod forest;
mod naive_bayes;
mod pnn;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Label, LabeledDataset};

pub use forest::{train_random_forest, FeatureSubset, ForestConfig, ForestModel, Tree, TreeNode};
pub use naive_bayes::{train_naive_bayes, ClassStats, NaiveBayesModel, VARIANCE_FLOOR};
pub use pnn::{train_pnn, PnnConfig, PnnModel};

/// Version stamped into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("training data must contain both classes")]
    SingleClassTraining,
    #[error("Naive Bayes needs at least 2 records per class")]
    TooFewRecords,
    #[error("vector has {found} features, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
    #[error("model document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassifierKind {
    NaiveBayes,
    Pnn,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::Pnn,
        ClassifierKind::RandomForest,
    ];
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::NaiveBayes => "NAIVE_BAYES",
            ClassifierKind::Pnn => "PNN",
            ClassifierKind::RandomForest => "RANDOM_FOREST",
        })
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "naive_bayes" | "nb" => Ok(Self::NaiveBayes),
            "pnn" => Ok(Self::Pnn),
            "random_forest" | "rf" => Ok(Self::RandomForest),
            other => Err(format!("unknown classifier `{other}`")),
        }
    }
}

/// Which classifier to train, with per-kind hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub pnn: PnnConfig,
    #[serde(default)]
    pub forest: ForestConfig,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            pnn: PnnConfig::default(),
            forest: ForestConfig::default(),
        }
    }

    /// Same config with the forest seed replaced; other kinds ignore seeds.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.forest.seed = seed;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelParams {
    NaiveBayes(NaiveBayesModel),
    Pnn(PnnModel),
    RandomForest(ForestModel),
}

/// A trained classifier together with the feature schema it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    #[serde(flatten)]
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn new(feature_names: Vec<String>, params: ModelParams) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            feature_names,
            params,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            ModelParams::Pnn(_) => ClassifierKind::Pnn,
            ModelParams::RandomForest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let model: TrainedModel = serde_json::from_str(text).map_err(|e| ClassifierError::Document(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifierError::Document(format!(
                "unsupported format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}

pub(crate) fn check_trainable(ds: &LabeledDataset) -> Result<(), ClassifierError> {
    if !ds.has_both_classes() {
        return Err(ClassifierError::SingleClassTraining);
    }
    Ok(())
}

pub fn train(dataset: &LabeledDataset, cfg: &ClassifierConfig) -> Result<TrainedModel, ClassifierError> {
    match cfg.kind {
        ClassifierKind::NaiveBayes => train_naive_bayes(dataset),
        ClassifierKind::Pnn => train_pnn(dataset, &cfg.pnn),
        ClassifierKind::RandomForest => train_random_forest(dataset, &cfg.forest),
    }
}

/// Applies a trained model to one feature vector.
pub fn predict(model: &TrainedModel, vector: &[f64]) -> Result<Label, ClassifierError> {
    if vector.len() != model.feature_names.len() {
        return Err(ClassifierError::SchemaMismatch {
            expected: model.feature_names.len(),
            found: vector.len(),
        });
    }
    Ok(match &model.params {
        ModelParams::NaiveBayes(m) => m.predict(vector),
        ModelParams::Pnn(m) => m.predict(vector),
        ModelParams::RandomForest(m) => m.predict(vector),
    })
}

/// Sums in a canonical (sorted) order so results do not depend on the
/// order of training records.
pub(crate) fn stable_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}
