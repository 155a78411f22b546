use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::measures::{confusion, measures, ConfusionMatrix, MeasureSet};
use super::split::{stratified_split, SplitError};
use crate::balancing::{smote, BalanceError, SmoteConfig};
use crate::classifiers::{train, ClassifierConfig, ClassifierError, ClassifierKind, ForestConfig, PnnConfig};
use crate::dataset::LabeledDataset;
use crate::rng::derive_seed;
use crate::selection::{select_features, AnnealingSchedule, FsMethod, ScoreKind, SelectionError, WrapperEvaluator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("experiment plan has an empty {0} list")]
    EmptyPlan(&'static str),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Whether SMOTE balances the whole dataset before the split or only the
/// training half.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SmoteStage {
    #[default]
    BeforeSplit,
    TrainOnly,
}

/// Settings shared by matrix cells and study runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalProtocol {
    pub smote: SmoteConfig,
    pub smote_stage: SmoteStage,
    /// Training share of the train/eval split.
    pub split_fraction: f64,
    /// Run feature selection on the whole (balanced) dataset instead of the
    /// training half.
    pub fs_on_full: bool,
    /// Training share inside the wrapper's own holdout.
    pub fs_split_fraction: f64,
    pub fs_score: ScoreKind,
    pub annealing: AnnealingSchedule,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            smote: SmoteConfig::default(),
            smote_stage: SmoteStage::BeforeSplit,
            split_fraction: 0.5,
            fs_on_full: false,
            fs_split_fraction: 0.5,
            fs_score: ScoreKind::FMeasure,
            annealing: AnnealingSchedule::default(),
        }
    }
}

/// Train and eval halves of one dataset, balanced per the protocol.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    /// Dataset the split was cut from (after SMOTE when it runs first).
    pub full: LabeledDataset,
    pub train: LabeledDataset,
    pub eval: LabeledDataset,
}

pub(crate) fn prepare_split(
    data: &LabeledDataset,
    use_smote: bool,
    protocol: &EvalProtocol,
    seed: u64,
) -> Result<PreparedSplit, MatrixError> {
    let smote_cfg = SmoteConfig {
        seed: derive_seed(seed, 1),
        ..protocol.smote
    };
    let full = if use_smote && protocol.smote_stage == SmoteStage::BeforeSplit {
        smote(data, &smote_cfg)?.dataset
    } else {
        data.clone()
    };
    let (mut train, eval) = stratified_split(&full, protocol.split_fraction, derive_seed(seed, 2))?;
    if use_smote && protocol.smote_stage == SmoteStage::TrainOnly {
        train = smote(&train, &smote_cfg)?.dataset;
    }
    Ok(PreparedSplit { full, train, eval })
}

/// Feature selection, training and evaluation of one setup on a prepared
/// split. Returns the confusion matrix and the retained feature names.
pub(crate) fn run_setup(
    prepared: &PreparedSplit,
    fs: FsMethod,
    classifier: &ClassifierConfig,
    protocol: &EvalProtocol,
    seed: u64,
) -> Result<(ConfusionMatrix, Vec<String>), MatrixError> {
    let fs_source = if protocol.fs_on_full {
        &prepared.full
    } else {
        &prepared.train
    };
    let evaluator = WrapperEvaluator {
        classifier: classifier.with_seed(derive_seed(seed, 1)),
        split_fraction: protocol.fs_split_fraction,
        seed: derive_seed(seed, 2),
        score: protocol.fs_score,
    };
    let schedule = AnnealingSchedule {
        seed: derive_seed(seed, 3),
        ..protocol.annealing
    };
    let mask = select_features(fs_source, fs, &evaluator, &schedule)?;
    let model = train(
        &mask.apply(&prepared.train),
        &classifier.with_seed(derive_seed(seed, 4)),
    )?;
    let cm = confusion(&model, &mask.apply(&prepared.eval))?;
    Ok((cm, mask.selected_names(&prepared.train.feature_names)))
}

/// The cross product of setups to evaluate. Rows come out in list order:
/// classifier, then SMOTE, then feature selection, then smells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    pub classifiers: Vec<ClassifierKind>,
    pub smote: Vec<bool>,
    pub fs: Vec<FsMethod>,
    pub smells: Vec<bool>,
    pub seed: u64,
    pub pnn: PnnConfig,
    pub forest: ForestConfig,
    pub protocol: EvalProtocol,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            classifiers: ClassifierKind::ALL.to_vec(),
            smote: vec![false, true],
            fs: vec![FsMethod::Annealing, FsMethod::Elimination, FsMethod::None],
            smells: vec![false, true],
            seed: 0,
            pnn: PnnConfig::default(),
            forest: ForestConfig::default(),
            protocol: EvalProtocol::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn n_cells(&self) -> usize {
        dedup(&self.classifiers).len() * dedup(&self.smote).len() * dedup(&self.fs).len() * dedup(&self.smells).len()
    }
}

/// The two datasets the matrix compares: with and without warning features.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub without_smells: LabeledDataset,
    pub with_smells: LabeledDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub classifier: ClassifierKind,
    pub smote: bool,
    pub feature_selection: FsMethod,
    pub smells: bool,
    pub measures: MeasureSet,
    pub confusion: ConfusionMatrix,
    pub selected_features: Vec<String>,
    pub train_records: usize,
    pub eval_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub classifier: ClassifierKind,
    pub smote: bool,
    pub feature_selection: FsMethod,
    pub smells: bool,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub seed: u64,
    pub rows: Vec<RunResult>,
    pub failures: Vec<CellFailure>,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

impl MatrixReport {
    /// Row with the highest F-measure; the first such row on ties.
    pub fn best(&self) -> Option<&RunResult> {
        self.rows.iter().fold(None, |best: Option<&RunResult>, r| match best {
            Some(b) if b.measures.f_measure >= r.measures.f_measure => Some(b),
            _ => Some(r),
        })
    }

    pub fn find(&self, classifier: ClassifierKind, smote: bool, fs: FsMethod, smells: bool) -> Option<&RunResult> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.smote == smote && r.feature_selection == fs && r.smells == smells)
    }

    /// One line per successful cell: setup columns, then F-measure and the
    /// confusion counts, then the remaining measures.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "classifier,smote,feature_selection,smells,f_measure,tp,fp,tn,fn,precision,recall,accuracy,kappa,train_records,eval_records,selected_features\n",
        );
        for r in &self.rows {
            let m = &r.measures;
            let c = &r.confusion;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.classifier,
                yes_no(r.smote),
                r.feature_selection,
                yes_no(r.smells),
                m.f_measure,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                m.precision,
                m.recall,
                m.accuracy,
                m.kappa,
                r.train_records,
                r.eval_records,
                r.selected_features.join(";"),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn dedup<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Stable per-cell stream id, independent of which other cells the plan
/// contains.
fn cell_stream(classifier: ClassifierKind, smote: bool, fs: FsMethod, smells: bool) -> u64 {
    100 + classifier as u64 * 12 + u64::from(smote) * 6 + fs as u64 * 2 + u64::from(smells)
}

/// Runs every cell of the plan. Cells run in parallel; each derives its
/// randomness from the master seed and its own setup, so the report does
/// not depend on scheduling. Failed cells are reported, not fatal.
pub fn run_experiment_matrix(data: &ExperimentData, plan: &ExperimentPlan) -> Result<MatrixReport, MatrixError> {
    let classifiers = dedup(&plan.classifiers);
    let smote_opts = dedup(&plan.smote);
    let fs_opts = dedup(&plan.fs);
    let smell_opts = dedup(&plan.smells);
    for (name, empty) in [
        ("classifier", classifiers.is_empty()),
        ("smote", smote_opts.is_empty()),
        ("feature selection", fs_opts.is_empty()),
        ("smells", smell_opts.is_empty()),
    ] {
        if empty {
            return Err(MatrixError::EmptyPlan(name));
        }
    }

    // Every classifier sees the same balanced split for a given dataset.
    let prep_keys: Vec<(bool, bool)> = smell_opts
        .iter()
        .flat_map(|&sm| smote_opts.iter().map(move |&so| (sm, so)))
        .collect();
    let prepared: BTreeMap<(bool, bool), Result<PreparedSplit, MatrixError>> = prep_keys
        .par_iter()
        .map(|&(smells, use_smote)| {
            let data = if smells {
                &data.with_smells
            } else {
                &data.without_smells
            };
            let seed = derive_seed(plan.seed, 2 * u64::from(smells) + u64::from(use_smote));
            (
                (smells, use_smote),
                prepare_split(data, use_smote, &plan.protocol, seed),
            )
        })
        .collect();

    let mut cells = Vec::new();
    for &c in &classifiers {
        for &so in &smote_opts {
            for &fs in &fs_opts {
                for &sm in &smell_opts {
                    cells.push((c, so, fs, sm));
                }
            }
        }
    }
    let outcomes: Vec<Result<RunResult, CellFailure>> = cells
        .par_iter()
        .map(|&(classifier, use_smote, fs, smells)| {
            let fail = |e: &MatrixError| CellFailure {
                classifier,
                smote: use_smote,
                feature_selection: fs,
                smells,
                error: e.to_string(),
            };
            let prep = prepared[&(smells, use_smote)].as_ref().map_err(fail)?;
            let cfg = ClassifierConfig {
                kind: classifier,
                pnn: plan.pnn,
                forest: plan.forest,
            };
            let seed = derive_seed(plan.seed, cell_stream(classifier, use_smote, fs, smells));
            let (cm, selected) = run_setup(prep, fs, &cfg, &plan.protocol, seed).map_err(|e| fail(&e))?;
            Ok(RunResult {
                classifier,
                smote: use_smote,
                feature_selection: fs,
                smells,
                measures: measures(&cm),
                confusion: cm,
                selected_features: selected,
                train_records: prep.train.len(),
                eval_records: prep.eval.len(),
            })
        })
        .collect();

    let mut report = MatrixReport {
        seed: plan.seed,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for o in outcomes {
        match o {
            Ok(r) => report.rows.push(r),
            Err(f) => {
                log::warn!(
                    "cell {} / smote {} / {} / smells {} failed: {}",
                    f.classifier,
                    yes_no(f.smote),
                    f.feature_selection,
                    yes_no(f.smells),
                    f.error
                );
                report.failures.push(f);
            }
        }
    }
    Ok(report)
}
