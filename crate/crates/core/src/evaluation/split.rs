use rand::seq::SliceRandom;
use thiserror::Error;

use crate::dataset::{Label, LabeledDataset};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("stratified split needs both classes")]
    SingleClass,
    #[error("split fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
}

/// Per-class train counts: each within one of `fraction * count`, with the
/// total as close as possible to `fraction * n`.
fn train_counts(pos: usize, neg: usize, fraction: f64) -> (usize, usize) {
    let pos_train = (fraction * pos as f64).round() as usize;
    let neg_lo = (fraction * neg as f64).floor() as usize;
    let neg_hi = (fraction * neg as f64).ceil() as usize;
    let total = (fraction * (pos + neg) as f64).round() as usize;
    let neg_train = total.saturating_sub(pos_train).clamp(neg_lo, neg_hi);
    (pos_train, neg_train)
}

/// Splits into (train, eval) preserving class proportions. Within each class
/// the train members are a seeded random choice; both halves keep the
/// original record order.
pub fn stratified_split(
    dataset: &LabeledDataset,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset), SplitError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SplitError::InvalidFraction(fraction));
    }
    if !dataset.has_both_classes() {
        return Err(SplitError::SingleClass);
    }
    let mut rng = rng_from_seed(seed);
    let (pos_train, neg_train) = train_counts(dataset.count(Label::DefectProne), dataset.count(Label::Clean), fraction);
    let mut in_train = vec![false; dataset.len()];
    for (label, k) in [(Label::DefectProne, pos_train), (Label::Clean, neg_train)] {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.records[i].label == label)
            .collect();
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            in_train[i] = true;
        }
    }
    let (train, eval): (Vec<_>, Vec<_>) = dataset.records.iter().cloned().zip(in_train).partition(|(_, t)| *t);
    Ok((
        dataset.with_records(train.into_iter().map(|(r, _)| r).collect()),
        dataset.with_records(eval.into_iter().map(|(r, _)| r).collect()),
    ))
}
