use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matrix::{prepare_split, run_setup, EvalProtocol, MatrixError, PreparedSplit};
use super::measures::{measures, ConfusionMatrix, MeasureSet};
use crate::builder::{partition_submodules, BuildError};
use crate::classifiers::{ClassifierConfig, ClassifierKind, ForestConfig};
use crate::dataset::{LabeledDataset, SourceMix};
use crate::rng::derive_seed;
use crate::selection::FsMethod;

/// Smallest submodule the study accepts: enough for both split halves to
/// hold a record of each class.
pub const MIN_SUBMODULE_RECORDS: usize = 4;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("the study needs at least 2 submodules, got {0}")]
    TooFewSubmodules(usize),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// The three dataset variants of one submodule, over the same files.
#[derive(Debug, Clone)]
pub struct SubmoduleVariants {
    pub file_metrics_only: LabeledDataset,
    pub warnings_only: LabeledDataset,
    pub combined: LabeledDataset,
}

impl SubmoduleVariants {
    pub fn get(&self, mix: SourceMix) -> &LabeledDataset {
        match mix {
            SourceMix::FileMetricsOnly => &self.file_metrics_only,
            SourceMix::WarningsOnly => &self.warnings_only,
            SourceMix::Combined => &self.combined,
        }
    }
}

/// Partitions a combined dataset into `n` submodules and derives the
/// single-source variants of each.
pub fn study_submodules(combined: &LabeledDataset, n: usize, seed: u64) -> Result<Vec<SubmoduleVariants>, BuildError> {
    if n.saturating_mul(MIN_SUBMODULE_RECORDS) > combined.len() {
        return Err(BuildError::TooManyPartitions {
            requested: n,
            records: combined.len(),
        });
    }
    Ok(partition_submodules(combined, n, seed)?
        .into_iter()
        .map(|part| {
            let (file_metrics_only, warnings_only) = part.split_sources();
            SubmoduleVariants {
                file_metrics_only,
                warnings_only,
                combined: part,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub n_submodules: usize,
    pub seed: u64,
    pub use_smote: bool,
    /// Selection method for the with-FS conditions.
    pub fs: FsMethod,
    pub forest: ForestConfig,
    pub protocol: EvalProtocol,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n_submodules: 20,
            seed: 0,
            use_smote: true,
            fs: FsMethod::Elimination,
            forest: ForestConfig::default(),
            protocol: EvalProtocol::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std_dev: f64,
}

/// Mean and sample standard deviation, computed on values shifted by the
/// first one so that equal inputs give exactly that value and 0.
pub fn mean_std(values: &[f64]) -> MeanStd {
    let Some(&first) = values.first() else {
        return MeanStd {
            mean: f64::NAN,
            std_dev: 0.0,
        };
    };
    let n = values.len() as f64;
    let shifted: Vec<f64> = values.iter().map(|v| v - first).collect();
    let mean_shift = shifted.iter().sum::<f64>() / n;
    let std_dev = if values.len() < 2 {
        0.0
    } else {
        let ss = shifted.iter().map(|d| (d - mean_shift).powi(2)).sum::<f64>();
        (ss / (n - 1.0)).sqrt()
    };
    MeanStd {
        mean: first + mean_shift,
        std_dev,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub accuracy: MeanStd,
    pub kappa: MeanStd,
    pub recall: MeanStd,
    pub f_measure: MeanStd,
}

impl MeasureSummary {
    fn of(runs: &[SubmoduleRun]) -> Option<Self> {
        if runs.is_empty() {
            return None;
        }
        let col = |f: fn(&MeasureSet) -> f64| mean_std(&runs.iter().map(|r| f(&r.measures)).collect::<Vec<_>>());
        Some(Self {
            accuracy: col(|m| m.accuracy),
            kappa: col(|m| m.kappa),
            recall: col(|m| m.recall),
            f_measure: col(|m| m.f_measure),
        })
    }

    fn rows(&self) -> [(&'static str, MeanStd); 4] {
        [
            ("accuracy", self.accuracy),
            ("kappa", self.kappa),
            ("recall", self.recall),
            ("f_measure", self.f_measure),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmoduleRun {
    pub submodule: usize,
    pub measures: MeasureSet,
    pub confusion: ConfusionMatrix,
    pub selected_features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmoduleFailure {
    pub submodule: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub dataset: SourceMix,
    pub feature_selection: bool,
    pub runs: Vec<SubmoduleRun>,
    pub failures: Vec<SubmoduleFailure>,
    /// Absent when every submodule failed.
    pub summary: Option<MeasureSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub seed: u64,
    pub n_submodules: usize,
    pub conditions: Vec<ConditionResult>,
}

impl StudyResult {
    pub fn condition(&self, dataset: SourceMix, feature_selection: bool) -> Option<&ConditionResult> {
        self.conditions
            .iter()
            .find(|c| c.dataset == dataset && c.feature_selection == feature_selection)
    }

    /// Conditions with no successful submodule.
    pub fn empty_conditions(&self) -> usize {
        self.conditions.iter().filter(|c| c.summary.is_none()).count()
    }

    /// Four lines per condition (accuracy, kappa, recall, F-measure) with
    /// mean and standard deviation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,feature_selection,measure,mean,std_dev,submodules,failed\n");
        for c in &self.conditions {
            let fs = if c.feature_selection { "WITH" } else { "WITHOUT" };
            match &c.summary {
                Some(s) => {
                    for (name, ms) in s.rows() {
                        let _ = writeln!(
                            out,
                            "{},{fs},{name},{},{},{},{}",
                            c.dataset,
                            ms.mean,
                            ms.std_dev,
                            c.runs.len(),
                            c.failures.len()
                        );
                    }
                }
                None => {
                    for name in ["accuracy", "kappa", "recall", "f_measure"] {
                        let _ = writeln!(out, "{},{fs},{name},,,0,{}", c.dataset, c.failures.len());
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Condition order: each variant without feature selection, then each
/// with it.
const CONDITIONS: [(SourceMix, bool); 6] = [
    (SourceMix::FileMetricsOnly, false),
    (SourceMix::WarningsOnly, false),
    (SourceMix::Combined, false),
    (SourceMix::FileMetricsOnly, true),
    (SourceMix::WarningsOnly, true),
    (SourceMix::Combined, true),
];

/// Evaluates Random Forest (with SMOTE by default) on every submodule under
/// the six variant/feature-selection conditions and aggregates the
/// measures. Failed submodules are recorded and left out of the summary.
pub fn run_submodule_study(submodules: &[SubmoduleVariants], cfg: &StudyConfig) -> Result<StudyResult, StudyError> {
    if submodules.len() < 2 {
        return Err(StudyError::TooFewSubmodules(submodules.len()));
    }
    let n = submodules.len();
    // Submodules share seeds, so identical submodules give identical runs.
    let prep_seed = derive_seed(cfg.seed, 1_000);
    let prep_jobs: Vec<(usize, SourceMix)> = (0..n)
        .flat_map(|s| SourceMix::ALL.into_iter().map(move |m| (s, m)))
        .collect();
    let prepared: Vec<Result<PreparedSplit, MatrixError>> = prep_jobs
        .par_iter()
        .map(|&(s, mix)| prepare_split(submodules[s].get(mix), cfg.use_smote, &cfg.protocol, prep_seed))
        .collect();
    let prep_index = |s: usize, mix: SourceMix| s * 3 + SourceMix::ALL.iter().position(|&m| m == mix).unwrap();

    let classifier = ClassifierConfig {
        forest: cfg.forest,
        ..ClassifierConfig::new(ClassifierKind::RandomForest)
    };
    let jobs: Vec<(usize, usize)> = (0..CONDITIONS.len())
        .flat_map(|c| (0..n).map(move |s| (c, s)))
        .collect();
    let outcomes: Vec<Result<SubmoduleRun, SubmoduleFailure>> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (mix, with_fs) = CONDITIONS[c];
            let fail = |e: &MatrixError| SubmoduleFailure {
                submodule: s,
                error: e.to_string(),
            };
            let prep = prepared[prep_index(s, mix)].as_ref().map_err(fail)?;
            let fs = if with_fs { cfg.fs } else { FsMethod::None };
            let seed = derive_seed(prep_seed, 10 + c as u64);
            let (cm, selected) = run_setup(prep, fs, &classifier, &cfg.protocol, seed).map_err(|e| fail(&e))?;
            Ok(SubmoduleRun {
                submodule: s,
                measures: measures(&cm),
                confusion: cm,
                selected_features: selected,
            })
        })
        .collect();

    let mut conditions: Vec<ConditionResult> = CONDITIONS
        .iter()
        .map(|&(dataset, feature_selection)| ConditionResult {
            dataset,
            feature_selection,
            runs: Vec::new(),
            failures: Vec::new(),
            summary: None,
        })
        .collect();
    for (&(c, _), o) in jobs.iter().zip(outcomes) {
        match o {
            Ok(run) => conditions[c].runs.push(run),
            Err(f) => {
                log::warn!("submodule {} failed under condition {}: {}", f.submodule, c, f.error);
                conditions[c].failures.push(f);
            }
        }
    }
    for c in &mut conditions {
        c.summary = MeasureSummary::of(&c.runs);
    }
    Ok(StudyResult {
        seed: cfg.seed,
        n_submodules: n,
        conditions,
    })
}
