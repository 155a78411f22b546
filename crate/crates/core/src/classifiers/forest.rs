use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_trainable, ClassifierError, ModelParams, TrainedModel};
use crate::dataset::{Label, LabeledDataset};
use crate::rng::{rng_from_seed, PipelineRng};

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// `max(1, floor(sqrt(m)))`
    Sqrt,
    All,
    Fixed(usize),
}

impl FeatureSubset {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => ((m as f64).sqrt().floor() as usize).max(1),
            FeatureSubset::All => m,
            FeatureSubset::Fixed(k) => k.clamp(1, m.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub features_per_split: FeatureSubset,
    /// Draw a bootstrap sample per tree. Off means every tree sees the full
    /// training set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_split: 2,
            features_per_split: FeatureSubset::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: Label,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary decision tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(label: Label) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { label }],
        }
    }

    /// A depth-one tree.
    pub fn stump(feature: usize, threshold: f64, left: Label, right: Label) -> Self {
        Tree {
            nodes: vec![
                TreeNode::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { label: left },
                TreeNode::Leaf { label: right },
            ],
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn from_trees(trees: Vec<Tree>) -> Self {
        Self { trees }
    }

    /// Majority vote; a tied vote goes to clean.
    pub fn predict(&self, x: &[f64]) -> Label {
        let defect = self.trees.iter().filter(|t| t.predict(x) == Label::DefectProne).count();
        if 2 * defect > self.trees.len() {
            Label::DefectProne
        } else {
            Label::Clean
        }
    }
}

/// Majority label; ties go to clean.
fn majority(pos: usize, neg: usize) -> Label {
    if pos > neg {
        Label::DefectProne
    } else {
        Label::Clean
    }
}

/// Split quality as an exact fraction. Minimising weighted Gini impurity is
/// the same as maximising `(a^2 + b^2) / n_l + (c^2 + d^2) / n_r`, kept here
/// as numerator/denominator so ties compare exactly.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn new(left: (u64, u64), right: (u64, u64)) -> Self {
        let nl = (left.0 + left.1) as u128;
        let nr = (right.0 + right.1) as u128;
        let sl = (left.0 as u128).pow(2) + (left.1 as u128).pow(2);
        let sr = (right.0 as u128).pow(2) + (right.1 as u128).pow(2);
        Purity {
            num: sl * nr + sr * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct Candidate {
    purity: Purity,
    feature: usize,
    threshold: f64,
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo / 2.0 + hi / 2.0;
    if t >= hi || t < lo {
        lo
    } else {
        t
    }
}

/// Best threshold for one feature, or `None` if the feature is constant on
/// this node. Among equal purities the lowest threshold wins.
fn best_threshold(
    xs: &[Vec<f64>],
    ys: &[Label],
    idx: &[usize],
    feature: usize,
    scratch: &mut Vec<(f64, bool)>,
) -> Option<(Purity, f64)> {
    scratch.clear();
    scratch.extend(idx.iter().map(|&i| (xs[i][feature], ys[i] == Label::DefectProne)));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    if scratch.first()?.0 == scratch.last()?.0 {
        return None;
    }
    let total_pos = scratch.iter().filter(|p| p.1).count() as u64;
    let total = scratch.len() as u64;
    let mut left_pos = 0u64;
    let mut best: Option<(Purity, f64)> = None;
    for k in 0..scratch.len() - 1 {
        left_pos += u64::from(scratch[k].1);
        if scratch[k].0 == scratch[k + 1].0 {
            continue;
        }
        let nl = k as u64 + 1;
        let p = Purity::new(
            (left_pos, nl - left_pos),
            (total_pos - left_pos, total - nl - (total_pos - left_pos)),
        );
        if best.as_ref().is_none_or(|(b, _)| p.cmp(b) == Ordering::Greater) {
            best = Some((p, midpoint(scratch[k].0, scratch[k + 1].0)));
        }
    }
    best
}

struct TreeBuilder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [Label],
    cfg: &'a ForestConfig,
    per_split: usize,
    nodes: Vec<TreeNode>,
    scratch: Vec<(f64, bool)>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, idx: &[usize], depth: usize, rng: &mut PipelineRng) -> usize {
        let pos = idx.iter().filter(|&&i| self.ys[i] == Label::DefectProne).count();
        let neg = idx.len() - pos;
        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            label: majority(pos, neg),
        });
        let stop =
            pos == 0 || neg == 0 || idx.len() < self.cfg.min_split || self.cfg.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return slot;
        }

        // Features constant on this node do not count toward the quota.
        let m = self.xs[0].len();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut usable = 0;
        for &f in &order {
            if usable >= self.per_split {
                break;
            }
            let Some((purity, threshold)) = best_threshold(self.xs, self.ys, idx, f, &mut self.scratch) else {
                continue;
            };
            usable += 1;
            let better = match &best {
                None => true,
                Some(b) => match purity.cmp(&b.purity) {
                    Ordering::Greater => true,
                    Ordering::Equal => f < b.feature,
                    Ordering::Less => false,
                },
            };
            if better {
                best = Some(Candidate {
                    purity,
                    feature: f,
                    threshold,
                });
            }
        }
        let Some(split) = best else {
            return slot;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.xs[i][split.feature] <= split.threshold);
        let left = self.build(&left_idx, depth + 1, rng);
        let right = self.build(&right_idx, depth + 1, rng);
        self.nodes[slot] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        slot
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn grow_tree(xs: &[Vec<f64>], ys: &[Label], cfg: &ForestConfig, tree_index: usize) -> Tree {
    let mut rng = rng_from_seed(cfg.seed.wrapping_add(tree_index as u64));
    let n = xs.len();
    let sample: Vec<usize> = if cfg.bootstrap {
        let mut s: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };
    let mut builder = TreeBuilder {
        xs,
        ys,
        cfg,
        per_split: cfg.features_per_split.resolve(xs[0].len()),
        nodes: Vec::new(),
        scratch: Vec::with_capacity(n),
    };
    builder.build(&sample, 0, &mut rng);
    Tree { nodes: builder.nodes }
}

/// Grows `n_trees` CART trees on bootstrap samples of the training set.
///
/// Records are first sorted (features, then label) so the forest does not
/// depend on training-record order. Tree `t` draws from the stream seeded
/// with `seed + t`, so parallel and sequential builds agree.
pub fn train_random_forest(dataset: &LabeledDataset, cfg: &ForestConfig) -> Result<TrainedModel, ClassifierError> {
    if cfg.n_trees == 0 || cfg.min_split == 0 || cfg.max_depth == Some(0) {
        return Err(ClassifierError::InvalidConfig(
            "n_trees, min_split and max_depth must be positive".into(),
        ));
    }
    check_trainable(dataset)?;
    if dataset.n_features() == 0 {
        return Err(ClassifierError::InvalidConfig("no features".into()));
    }
    let mut rows: Vec<(&[f64], Label)> = dataset
        .records
        .iter()
        .map(|r| (r.features.as_slice(), r.label))
        .collect();
    rows.sort_by(|a, b| lex_cmp(a.0, b.0).then(a.1.cmp(&b.1)));
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.0.to_vec()).collect();
    let ys: Vec<Label> = rows.iter().map(|r| r.1).collect();

    let trees: Vec<Tree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&xs, &ys, cfg, t))
        .collect();
    Ok(TrainedModel::new(
        dataset.feature_names.clone(),
        ModelParams::RandomForest(ForestModel { trees }),
    ))
}
