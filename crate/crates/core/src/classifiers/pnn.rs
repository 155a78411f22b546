use serde::{Deserialize, Serialize};

use super::{check_trainable, stable_sum, ClassifierError, ModelParams, TrainedModel};
use crate::dataset::{Label, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PnnConfig {
    /// Gaussian kernel width, in standardized units when `standardize` is on.
    pub bandwidth: f64,
    /// Scale features to zero mean, unit variance with training statistics.
    pub standardize: bool,
}

impl Default for PnnConfig {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnnModel {
    pub bandwidth: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Training vectors after scaling, sorted.
    pub clean: Vec<Vec<f64>>,
    pub defect_prone: Vec<Vec<f64>>,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + stable_sum(values.iter().map(|v| (v - max).exp()).collect()).ln()
}

impl PnnModel {
    fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn log_score(&self, points: &[Vec<f64>], z: &[f64]) -> f64 {
        let two_h2 = 2.0 * self.bandwidth * self.bandwidth;
        let exponents: Vec<f64> = points
            .iter()
            .map(|p| -p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / two_h2)
            .collect();
        log_sum_exp(&exponents) - (points.len() as f64).ln()
    }

    /// Natural log of the per-class kernel density
    /// `(1/n_c) * sum_i exp(-|x - x_i|^2 / (2 h^2))`, as (clean, defect_prone).
    /// Computed in log space so tiny bandwidths do not underflow.
    pub fn class_log_scores(&self, x: &[f64]) -> (f64, f64) {
        let z = self.scale(x);
        (self.log_score(&self.clean, &z), self.log_score(&self.defect_prone, &z))
    }

    pub fn class_scores(&self, x: &[f64]) -> (f64, f64) {
        let (c, d) = self.class_log_scores(x);
        (c.exp(), d.exp())
    }

    /// Larger kernel density wins; ties go to clean.
    pub fn predict(&self, x: &[f64]) -> Label {
        let (c, d) = self.class_log_scores(x);
        if d > c {
            Label::DefectProne
        } else {
            Label::Clean
        }
    }
}

/// Stores (optionally standardized) training vectors per class.
pub fn train_pnn(dataset: &LabeledDataset, cfg: &PnnConfig) -> Result<TrainedModel, ClassifierError> {
    if !(cfg.bandwidth > 0.0 && cfg.bandwidth.is_finite()) {
        return Err(ClassifierError::InvalidConfig("bandwidth must be positive".into()));
    }
    check_trainable(dataset)?;
    let m = dataset.n_features();
    let n = dataset.len() as f64;
    let (means, scales): (Vec<f64>, Vec<f64>) = if cfg.standardize {
        (0..m)
            .map(|j| {
                let mean = stable_sum(dataset.records.iter().map(|r| r.features[j]).collect()) / n;
                let var = stable_sum(dataset.records.iter().map(|r| (r.features[j] - mean).powi(2)).collect()) / n;
                let sd = var.sqrt();
                (mean, if sd > 0.0 { sd } else { 1.0 })
            })
            .unzip()
    } else {
        (vec![0.0; m], vec![1.0; m])
    };
    let mut model = PnnModel {
        bandwidth: cfg.bandwidth,
        means,
        scales,
        clean: Vec::new(),
        defect_prone: Vec::new(),
    };
    for r in &dataset.records {
        let z = model.scale(&r.features);
        match r.label {
            Label::Clean => model.clean.push(z),
            Label::DefectProne => model.defect_prone.push(z),
        }
    }
    let lex = |a: &Vec<f64>, b: &Vec<f64>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    model.clean.sort_by(lex);
    model.defect_prone.sort_by(lex);
    Ok(TrainedModel::new(
        dataset.feature_names.clone(),
        ModelParams::Pnn(model),
    ))
}
