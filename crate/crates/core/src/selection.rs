//! Wrapper feature selection: greedy backward elimination and simulated
//! annealing over feature masks, both scored by training the actual
//! classifier on a seeded stratified holdout.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{train, ClassifierConfig, ClassifierError};
use crate::dataset::LabeledDataset;
use crate::evaluation::{confusion, measures, stratified_split, SplitError};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("holdout split lacks one of the classes")]
    DegenerateSplit,
    #[error("mask has {found} bits for {expected} features or selects nothing")]
    InvalidMask { expected: usize, found: usize },
    #[error("dataset has no features")]
    NoFeatures,
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Which features are kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask(pub Vec<bool>);

impl FeatureMask {
    pub fn all(m: usize) -> Self {
        FeatureMask(vec![true; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i]).collect()
    }

    pub fn apply(&self, ds: &LabeledDataset) -> LabeledDataset {
        ds.select_features(&self.indices())
    }

    /// Names of the retained features, in schema order.
    pub fn selected_names(&self, feature_names: &[String]) -> Vec<String> {
        self.indices().into_iter().map(|i| feature_names[i].clone()).collect()
    }

    /// Rebuilds a mask from retained feature names.
    pub fn from_names(selected: &[String], feature_names: &[String]) -> Self {
        FeatureMask(feature_names.iter().map(|n| selected.contains(n)).collect())
    }

    fn check(&self, m: usize) -> Result<(), SelectionError> {
        if self.len() != m || self.count() == 0 {
            return Err(SelectionError::InvalidMask {
                expected: m,
                found: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScoreKind {
    FMeasure,
    Accuracy,
}

/// Scores a feature subset of a dataset.
pub trait SubsetScorer: Sync {
    fn score(&self, dataset: &LabeledDataset, mask: &FeatureMask) -> Result<f64, SelectionError>;
}

/// Trains `classifier` on a stratified `split_fraction` share of the
/// projected data and scores it on the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapperEvaluator {
    pub classifier: ClassifierConfig,
    pub split_fraction: f64,
    pub seed: u64,
    pub score: ScoreKind,
}

impl WrapperEvaluator {
    pub fn new(classifier: ClassifierConfig, seed: u64) -> Self {
        Self {
            classifier,
            split_fraction: 0.5,
            seed,
            score: ScoreKind::FMeasure,
        }
    }
}

impl SubsetScorer for WrapperEvaluator {
    fn score(&self, dataset: &LabeledDataset, mask: &FeatureMask) -> Result<f64, SelectionError> {
        wrapper_score(dataset, mask, self)
    }
}

pub fn wrapper_score(
    dataset: &LabeledDataset,
    mask: &FeatureMask,
    evaluator: &WrapperEvaluator,
) -> Result<f64, SelectionError> {
    mask.check(dataset.n_features())?;
    let projected = mask.apply(dataset);
    let (train_half, eval_half) =
        stratified_split(&projected, evaluator.split_fraction, evaluator.seed).map_err(|e| match e {
            SplitError::SingleClass => SelectionError::DegenerateSplit,
            SplitError::InvalidFraction(f) => {
                SelectionError::InvalidConfig(format!("split fraction {f} outside (0, 1)"))
            }
        })?;
    if !train_half.has_both_classes() || !eval_half.has_both_classes() {
        return Err(SelectionError::DegenerateSplit);
    }
    let model = train(&train_half, &evaluator.classifier)?;
    let m = measures(&confusion(&model, &eval_half)?);
    Ok(match evaluator.score {
        ScoreKind::FMeasure => m.f_measure,
        ScoreKind::Accuracy => m.accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub removed: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub mask: FeatureMask,
    /// Score of `mask`; absent when no subset had to be scored.
    pub score: Option<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationOutcome {
    pub selection: SelectionOutcome,
    pub steps: Vec<EliminationStep>,
}

/// Greedy backward elimination.
///
/// Starting from all features, each step scores every single-feature
/// removal and drops the feature whose removal scores highest (ties: lowest
/// index), until one feature is left. Returns the best mask among those
/// reached; ties go to the larger mask, which is also the earlier one. The
/// full mask itself is not scored, so `m` features cost `m(m+1)/2 - 1`
/// scorer calls and a single feature is returned unscored.
pub fn backward_elimination(
    dataset: &LabeledDataset,
    scorer: &impl SubsetScorer,
) -> Result<EliminationOutcome, SelectionError> {
    let m = dataset.n_features();
    if m == 0 {
        return Err(SelectionError::NoFeatures);
    }
    let mut current = FeatureMask::all(m);
    let mut best: Option<(FeatureMask, f64)> = None;
    let mut evaluations = 0;
    let mut steps = Vec::new();
    while current.count() > 1 {
        let active = current.indices();
        let scores: Vec<f64> = active
            .par_iter()
            .map(|&f| {
                let mut candidate = current.clone();
                candidate.0[f] = false;
                scorer.score(dataset, &candidate)
            })
            .collect::<Result<_, _>>()?;
        evaluations += active.len();
        let (pick, &score) = scores
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, &f64)>, (i, s)| match acc {
                Some((_, b)) if *s <= *b => acc,
                _ => Some((i, s)),
            })
            .expect("at least two active features");
        current.0[active[pick]] = false;
        steps.push(EliminationStep {
            removed: active[pick],
            score,
        });
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((current.clone(), score));
        }
    }
    let (mask, score) = match best {
        Some((mask, s)) => (mask, Some(s)),
        None => (current, None),
    };
    Ok(EliminationOutcome {
        selection: SelectionOutcome {
            mask,
            score,
            evaluations,
        },
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealingSchedule {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_rate: 0.95,
            iterations: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealingOutcome {
    pub selection: SelectionOutcome,
    /// Best score after each iteration.
    pub best_history: Vec<f64>,
    /// Moves accepted although they lowered the current score.
    pub worse_accepted: usize,
}

/// Simulated annealing over feature masks.
///
/// Starts from all features. Each iteration flips one uniformly chosen bit
/// (redrawing if that would empty the mask), accepts improvements, and
/// accepts other moves with probability `exp((new - current) / T)`. `T` is
/// multiplied by the cooling rate after every iteration. Scores are cached
/// per mask, so revisiting a mask does not retrain.
pub fn simulated_annealing_select(
    dataset: &LabeledDataset,
    scorer: &impl SubsetScorer,
    schedule: &AnnealingSchedule,
) -> Result<AnnealingOutcome, SelectionError> {
    let t0 = schedule.initial_temperature;
    if t0.is_nan() || t0 <= 0.0 || !(schedule.cooling_rate > 0.0 && schedule.cooling_rate < 1.0) {
        return Err(SelectionError::InvalidConfig(
            "temperature must be positive and cooling rate in (0, 1)".into(),
        ));
    }
    let m = dataset.n_features();
    if m == 0 {
        return Err(SelectionError::NoFeatures);
    }
    let mut cache: HashMap<FeatureMask, f64> = HashMap::new();
    let mut evaluations = 0;
    let mut eval = |mask: &FeatureMask| -> Result<f64, SelectionError> {
        if let Some(&s) = cache.get(mask) {
            return Ok(s);
        }
        let s = scorer.score(dataset, mask)?;
        evaluations += 1;
        cache.insert(mask.clone(), s);
        Ok(s)
    };

    let mut rng = rng_from_seed(schedule.seed);
    let mut current = FeatureMask::all(m);
    let mut current_score = eval(&current)?;
    let mut best = (current.clone(), current_score);
    let mut best_history = Vec::with_capacity(schedule.iterations);
    let mut worse_accepted = 0;
    let mut temperature = schedule.initial_temperature;
    let iterations = if m == 1 { 0 } else { schedule.iterations };
    for _ in 0..iterations {
        let mut neighbor = current.clone();
        loop {
            let bit = rng.gen_range(0..m);
            neighbor.0[bit] = !neighbor.0[bit];
            if neighbor.count() > 0 {
                break;
            }
            neighbor.0[bit] = !neighbor.0[bit];
        }
        let score = eval(&neighbor)?;
        let accept = if score > current_score {
            true
        } else {
            let p = ((score - current_score) / temperature).exp();
            rng.gen::<f64>() < p
        };
        if accept {
            if score < current_score {
                worse_accepted += 1;
            }
            current = neighbor;
            current_score = score;
            if current_score > best.1 {
                best = (current.clone(), current_score);
            }
        }
        best_history.push(best.1);
        temperature *= schedule.cooling_rate;
    }
    Ok(AnnealingOutcome {
        selection: SelectionOutcome {
            mask: best.0,
            score: Some(best.1),
            evaluations,
        },
        best_history,
        worse_accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FsMethod {
    None,
    Elimination,
    Annealing,
}

impl fmt::Display for FsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FsMethod::None => "NONE",
            FsMethod::Elimination => "ELIMINATION",
            FsMethod::Annealing => "ANNEALING",
        })
    }
}

impl std::str::FromStr for FsMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "elimination" | "backward" => Ok(Self::Elimination),
            "annealing" | "sa" => Ok(Self::Annealing),
            other => Err(format!("unknown feature selection method `{other}`")),
        }
    }
}

/// Runs the chosen method and returns the selected mask (all features for
/// `None`).
pub fn select_features(
    dataset: &LabeledDataset,
    method: FsMethod,
    evaluator: &WrapperEvaluator,
    schedule: &AnnealingSchedule,
) -> Result<FeatureMask, SelectionError> {
    Ok(match method {
        FsMethod::None => FeatureMask::all(dataset.n_features()),
        FsMethod::Elimination => backward_elimination(dataset, evaluator)?.selection.mask,
        FsMethod::Annealing => simulated_annealing_select(dataset, evaluator, schedule)?.selection.mask,
    })
}
