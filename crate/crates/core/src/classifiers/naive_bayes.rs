use serde::{Deserialize, Serialize};

use super::{check_trainable, stable_sum, ClassifierError, ModelParams, TrainedModel};
use crate::dataset::{Label, LabeledDataset};

/// Lower bound applied to every per-class feature variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ClassStats {
    fn log_joint(&self, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.prior.ln()
            + x.iter()
                .zip(self.means.iter().zip(&self.variances))
                .map(|(&v, (&mu, &var))| -0.5 * (ln_2pi + var.ln()) - (v - mu).powi(2) / (2.0 * var))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub clean: ClassStats,
    pub defect_prone: ClassStats,
}

impl NaiveBayesModel {
    /// Log prior plus summed Gaussian log densities, per class.
    pub fn log_joint(&self, x: &[f64]) -> [(Label, f64); 2] {
        [
            (Label::Clean, self.clean.log_joint(x)),
            (Label::DefectProne, self.defect_prone.log_joint(x)),
        ]
    }

    /// Highest log-joint wins; equality goes to clean.
    pub fn predict(&self, x: &[f64]) -> Label {
        let [(_, c), (_, d)] = self.log_joint(x);
        if d > c {
            Label::DefectProne
        } else {
            Label::Clean
        }
    }
}

fn class_stats(ds: &LabeledDataset, label: Label) -> ClassStats {
    let rows: Vec<&[f64]> = ds
        .records
        .iter()
        .filter(|r| r.label == label)
        .map(|r| r.features.as_slice())
        .collect();
    let n = rows.len() as f64;
    let (means, variances) = (0..ds.n_features())
        .map(|j| {
            let mean = stable_sum(rows.iter().map(|r| r[j]).collect()) / n;
            let var = stable_sum(rows.iter().map(|r| (r[j] - mean).powi(2)).collect()) / n;
            (mean, var.max(VARIANCE_FLOOR))
        })
        .unzip();
    ClassStats {
        prior: n / ds.len() as f64,
        means,
        variances,
    }
}

/// Fits per-class priors and per-feature Gaussian (mean, population
/// variance) estimates.
pub fn train_naive_bayes(dataset: &LabeledDataset) -> Result<TrainedModel, ClassifierError> {
    check_trainable(dataset)?;
    if dataset.count(Label::Clean) < 2 || dataset.count(Label::DefectProne) < 2 {
        return Err(ClassifierError::TooFewRecords);
    }
    Ok(TrainedModel::new(
        dataset.feature_names.clone(),
        ModelParams::NaiveBayes(NaiveBayesModel {
            clean: class_stats(dataset, Label::Clean),
            defect_prone: class_stats(dataset, Label::DefectProne),
        }),
    ))
}
