//! SMOTE oversampling of the minority class.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Label, LabeledDataset, LabeledRecord};
use crate::ingest::path_key;
use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("SMOTE needs at least 2 minority records, found {found}")]
    TooFewMinority { found: usize },
    #[error("invalid SMOTE config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Desired minority/majority ratio after balancing.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoteReport {
    pub minority: Label,
    pub minority_before: usize,
    pub majority: usize,
    pub synthetic: usize,
    pub k_used: usize,
    /// Set when `k_neighbors` exceeded `minority - 1` and was reduced.
    pub k_clamped: bool,
}

/// Where a synthetic record came from: indices of its two parents in the
/// output dataset and the interpolation weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub base: usize,
    pub neighbor: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutcome {
    pub dataset: LabeledDataset,
    pub report: SmoteReport,
    /// One entry per synthetic record, in output order.
    pub lineage: Vec<Lineage>,
}

/// Synthetic points a minority class of `majority` would need to reach
/// `ratio`, given `minority` existing points.
fn needed_synthetic(minority: usize, majority: usize, ratio: f64) -> usize {
    let target = (ratio * majority as f64 - 1e-9).ceil().max(0.0) as usize;
    target.saturating_sub(minority)
}

/// Per-feature (mean, scale) used only for neighbor distances. Constant
/// features get scale 1.
fn standardizer(ds: &LabeledDataset) -> Vec<(f64, f64)> {
    let n = ds.len() as f64;
    (0..ds.n_features())
        .map(|j| {
            let mean = ds.records.iter().map(|r| r.features[j]).sum::<f64>() / n;
            let var = ds.records.iter().map(|r| (r.features[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 0.0 { sd } else { 1.0 })
        })
        .collect()
}

/// Indices (into `points`) of the `k` nearest neighbors of `points[i]`,
/// excluding `i` itself. Ties go to the lower index.
fn nearest(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| {
            let dist = p.iter().zip(&points[i]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            (dist, j)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Oversamples the smaller class until minority/majority reaches
/// `target_ratio`.
///
/// Original records are kept verbatim and in order; synthetic records are
/// appended. Minority records are used as bases round-robin; each synthetic
/// point is `x + u * (nn - x)` with `u` uniform in [0, 1) and `nn` drawn from
/// the base's `k` nearest minority neighbors under standardized Euclidean
/// distance. When `k_neighbors > minority - 1` it is clamped and the report
/// says so.
pub fn smote(dataset: &LabeledDataset, cfg: &SmoteConfig) -> Result<SmoteOutcome, BalanceError> {
    if cfg.k_neighbors == 0 {
        return Err(BalanceError::InvalidConfig("k_neighbors must be at least 1".into()));
    }
    if !(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0) {
        return Err(BalanceError::InvalidConfig("target_ratio must lie in (0, 1]".into()));
    }
    let n_pos = dataset.count(Label::DefectProne);
    let n_neg = dataset.count(Label::Clean);
    let minority = if n_pos <= n_neg {
        Label::DefectProne
    } else {
        Label::Clean
    };
    let (n_min, n_maj) = if minority == Label::DefectProne {
        (n_pos, n_neg)
    } else {
        (n_neg, n_pos)
    };

    let needed = needed_synthetic(n_min, n_maj, cfg.target_ratio);
    let mut report = SmoteReport {
        minority,
        minority_before: n_min,
        majority: n_maj,
        synthetic: needed,
        k_used: cfg.k_neighbors,
        k_clamped: false,
    };
    if needed == 0 {
        return Ok(SmoteOutcome {
            dataset: dataset.clone(),
            report,
            lineage: Vec::new(),
        });
    }
    if n_min < 2 {
        return Err(BalanceError::TooFewMinority { found: n_min });
    }
    let k = cfg.k_neighbors.min(n_min - 1);
    if k < cfg.k_neighbors {
        log::warn!(
            "SMOTE: k_neighbors {} exceeds minority size {} - 1, using {k}",
            cfg.k_neighbors,
            n_min
        );
        report.k_used = k;
        report.k_clamped = true;
    }

    let scale = standardizer(dataset);
    let member_idx: Vec<usize> = (0..dataset.len())
        .filter(|&i| dataset.records[i].label == minority)
        .collect();
    let members: Vec<&LabeledRecord> = member_idx.iter().map(|&i| &dataset.records[i]).collect();
    let scaled: Vec<Vec<f64>> = members
        .iter()
        .map(|r| r.features.iter().zip(&scale).map(|(v, (m, s))| (v - m) / s).collect())
        .collect();
    let neighbors: Vec<Vec<usize>> = (0..members.len()).map(|i| nearest(&scaled, i, k)).collect();

    let mut taken: HashSet<String> = dataset.records.iter().map(|r| path_key(&r.file_path)).collect();
    let mut rng = rng_from_seed(cfg.seed);
    let mut records = dataset.records.clone();
    records.reserve(needed);
    let mut lineage = Vec::with_capacity(needed);
    let mut serial = 0usize;
    for s in 0..needed {
        let base = s % members.len();
        let nn = neighbors[base][rng.gen_range(0..k)];
        let u: f64 = rng.gen();
        let x = &members[base].features;
        let y = &members[nn].features;
        let features = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| (a + u * (b - a)).clamp(a.min(b), a.max(b)))
            .collect();
        let file_path = loop {
            let candidate = format!("smote/{serial:06}");
            serial += 1;
            if taken.insert(path_key(&candidate)) {
                break candidate;
            }
        };
        records.push(LabeledRecord {
            file_path,
            features,
            label: minority,
        });
        lineage.push(Lineage {
            base: member_idx[base],
            neighbor: member_idx[nn],
            weight: u,
        });
    }
    Ok(SmoteOutcome {
        dataset: dataset.with_records(records),
        report,
        lineage,
    })
}
