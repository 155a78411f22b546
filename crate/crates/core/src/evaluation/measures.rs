use serde::{Deserialize, Serialize};

use crate::classifiers::{predict, ClassifierError, TrainedModel};
use crate::dataset::{Label, LabeledDataset};

/// Prediction counts with defect-prone as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::DefectProne, Label::DefectProne) => self.tp += 1,
            (Label::DefectProne, Label::Clean) => self.fp += 1,
            (Label::Clean, Label::Clean) => self.tn += 1,
            (Label::Clean, Label::DefectProne) => self.fn_ += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub accuracy: f64,
    pub kappa: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, F-measure, accuracy and Cohen's kappa. Undefined
/// ratios (zero denominators) are reported as 0.
pub fn measures(cm: &ConfusionMatrix) -> MeasureSet {
    let ConfusionMatrix { tp, fp, tn, fn_ } = *cm;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let total = cm.total();
    let accuracy = ratio(tp + tn, total);
    let kappa = if total == 0 {
        0.0
    } else {
        // Marginal products as exact integers before one division.
        let agree_chance = (tp + fn_) as u128 * (tp + fp) as u128 + (fp + tn) as u128 * (fn_ + tn) as u128;
        let t2 = total as u128 * total as u128;
        if agree_chance == t2 {
            0.0
        } else {
            let pe = agree_chance as f64 / t2 as f64;
            (accuracy - pe) / (1.0 - pe)
        }
    };
    MeasureSet {
        precision,
        recall,
        f_measure,
        accuracy,
        kappa,
    }
}

/// Counts predictions of `model` against the labels of `dataset`.
pub fn confusion(model: &TrainedModel, dataset: &LabeledDataset) -> Result<ConfusionMatrix, ClassifierError> {
    let mut cm = ConfusionMatrix::default();
    for r in &dataset.records {
        cm.record(predict(model, &r.features)?, r.label);
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ForestModel, ModelParams, Tree};
    use crate::dataset::{LabeledRecord, Provenance, SourceMix};
    use proptest::prelude::*;

    fn ds(labels: &[Label]) -> LabeledDataset {
        LabeledDataset::new(
            vec!["x".into()],
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| LabeledRecord {
                    file_path: format!("{i}.cs"),
                    features: vec![if l == Label::DefectProne { 1.0 } else { 0.0 }],
                    label: l,
                })
                .collect(),
            Provenance {
                source_mix: SourceMix::FileMetricsOnly,
                filtered_generated: true,
            },
        )
        .unwrap()
    }

    fn model(tree: Tree) -> TrainedModel {
        TrainedModel::new(
            vec!["x".into()],
            ModelParams::RandomForest(ForestModel::from_trees(vec![tree])),
        )
    }

    fn four_six() -> LabeledDataset {
        let mut labels = vec![Label::DefectProne; 4];
        labels.extend(vec![Label::Clean; 6]);
        ds(&labels)
    }

    #[test]
    fn confusion_examples() {
        let d = four_six();
        let perfect = model(Tree::stump(0, 0.5, Label::Clean, Label::DefectProne));
        assert_eq!(confusion(&perfect, &d).unwrap(), ConfusionMatrix::new(4, 0, 6, 0));
        let clean = confusion(&model(Tree::leaf(Label::Clean)), &d).unwrap();
        assert_eq!((clean.tp, clean.fp), (0, 0));
        let defect = confusion(&model(Tree::leaf(Label::DefectProne)), &d).unwrap();
        assert_eq!(defect, ConfusionMatrix::new(4, 6, 0, 0));
    }

    #[test]
    fn hand_computed_kappa() {
        let m = measures(&ConfusionMatrix::new(4, 2, 3, 1));
        assert!((m.accuracy - 0.7).abs() < 1e-15);
        assert!((m.kappa - 0.4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_matrices() {
        let m = measures(&ConfusionMatrix::new(0, 0, 10, 0));
        assert_eq!((m.precision, m.recall, m.f_measure, m.kappa), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(m.accuracy, 1.0);
        let m = measures(&ConfusionMatrix::default());
        assert_eq!(m, MeasureSet::default());
    }

    #[test]
    fn serializes_fn_field() {
        let json = serde_json::to_string(&ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"tn":3,"fn":4}"#);
    }

    proptest! {
        #[test]
        fn ranges_and_accuracy_identity(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
            prop_assume!(tp + fp + tn + fn_ > 0);
            let cm = ConfusionMatrix::new(tp, fp, tn, fn_);
            let m = measures(&cm);
            for v in [m.precision, m.recall, m.f_measure, m.accuracy] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!((-1.0..=1.0).contains(&m.kappa));
            prop_assert_eq!(m.accuracy, (tp + tn) as f64 / (tp + fp + tn + fn_) as f64);
        }

        #[test]
        fn balanced_marginals_give_two_acc_minus_one(a in 1u64..400, b in 0u64..400) {
            // tp + fn = fp + tn and tp + fp = fn + tn force tp = tn, fp = fn.
            let cm = ConfusionMatrix::new(a, b, a, b);
            let m = measures(&cm);
            prop_assert_eq!(m.kappa, 2.0 * m.accuracy - 1.0);
        }
    }
}
