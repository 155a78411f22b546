//! The labeled feature table shared by balancing, selection, training and
//! evaluation, and its CSV form (`file_path,<features...>,label`).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{path_key, WarningCategory, PATH_COLUMN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Clean,
    DefectProne,
}

impl Label {
    pub fn as_digit(self) -> u8 {
        match self {
            Label::DefectProne => 1,
            Label::Clean => 0,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::DefectProne => Label::Clean,
            Label::Clean => Label::DefectProne,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::DefectProne => "defect_prone",
            Label::Clean => "clean",
        })
    }
}

/// Which metric sources contributed features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceMix {
    FileMetricsOnly,
    WarningsOnly,
    Combined,
}

impl SourceMix {
    pub const ALL: [SourceMix; 3] = [SourceMix::FileMetricsOnly, SourceMix::WarningsOnly, SourceMix::Combined];

    /// File stem used for dataset artifacts.
    pub fn slug(self) -> &'static str {
        match self {
            SourceMix::FileMetricsOnly => "file_metrics_only",
            SourceMix::WarningsOnly => "warnings_only",
            SourceMix::Combined => "combined",
        }
    }
}

impl fmt::Display for SourceMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceMix::FileMetricsOnly => "FILE_METRICS_ONLY",
            SourceMix::WarningsOnly => "WARNINGS_ONLY",
            SourceMix::Combined => "COMBINED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_mix: SourceMix,
    pub filtered_generated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub file_path: String,
    pub features: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("record `{path}` has {found} features, expected {expected}")]
    LengthMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("record `{path}` has a non-finite feature value")]
    NonFinite { path: String },
    #[error("duplicate file path `{path}`")]
    DuplicatePath { path: String },
    #[error("unknown feature `{name}`")]
    UnknownFeature { name: String },
    #[error("line {line}: {reason}")]
    Csv { line: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub records: Vec<LabeledRecord>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    /// Builds a dataset after checking vector lengths, finiteness and path
    /// uniqueness.
    pub fn new(
        feature_names: Vec<String>,
        records: Vec<LabeledRecord>,
        provenance: Provenance,
    ) -> Result<Self, DatasetError> {
        let mut keys = HashSet::with_capacity(records.len());
        for r in &records {
            if r.features.len() != feature_names.len() {
                return Err(DatasetError::LengthMismatch {
                    path: r.file_path.clone(),
                    expected: feature_names.len(),
                    found: r.features.len(),
                });
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite {
                    path: r.file_path.clone(),
                });
            }
            if !keys.insert(path_key(&r.file_path)) {
                return Err(DatasetError::DuplicatePath {
                    path: r.file_path.clone(),
                });
            }
        }
        Ok(Self {
            feature_names,
            records,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count(Label::DefectProne) > 0 && self.count(Label::Clean) > 0
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// A dataset with the same schema and provenance holding other records.
    pub fn with_records(&self, records: Vec<LabeledRecord>) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            records,
            provenance: self.provenance,
        }
    }

    /// Projects onto the given feature columns, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Self {
        let records = self
            .records
            .iter()
            .map(|r| LabeledRecord {
                file_path: r.file_path.clone(),
                features: indices.iter().map(|&i| r.features[i]).collect(),
                label: r.label,
            })
            .collect();
        Self {
            feature_names: indices.iter().map(|&i| self.feature_names[i].clone()).collect(),
            records,
            provenance: self.provenance,
        }
    }

    /// Projects onto the named features.
    pub fn select_named(&self, names: &[String]) -> Result<Self, DatasetError> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_index(n)
                    .ok_or_else(|| DatasetError::UnknownFeature { name: n.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.select_features(&idx))
    }

    /// Splits a combined dataset into its file-metric-only and
    /// warnings-only projections (same records, same order).
    pub fn split_sources(&self) -> (LabeledDataset, LabeledDataset) {
        let (warn, file): (Vec<usize>, Vec<usize>) =
            (0..self.n_features()).partition(|&i| is_category_name(&self.feature_names[i]));
        let mut file_only = self.select_features(&file);
        file_only.provenance.source_mix = SourceMix::FileMetricsOnly;
        let mut warn_only = self.select_features(&warn);
        warn_only.provenance.source_mix = SourceMix::WarningsOnly;
        (file_only, warn_only)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(PATH_COLUMN);
        for n in &self.feature_names {
            out.push(',');
            out.push_str(n);
        }
        out.push_str(",label\n");
        for r in &self.records {
            out.push_str(&r.file_path);
            for v in &r.features {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push(',');
            out.push(char::from(b'0' + r.label.as_digit()));
            out.push('\n');
        }
        out
    }

    /// Reads the CSV written by [`LabeledDataset::to_csv`]. The source mix
    /// is inferred from the feature names; the generated-code flag is not
    /// stored in the CSV and is read back as `false`.
    pub fn from_csv(text: &str) -> Result<Self, DatasetError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(DatasetError::Csv {
            line: 1,
            reason: "empty document".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != PATH_COLUMN || cols[cols.len() - 1] != "label" {
            return Err(DatasetError::Csv {
                line: 1,
                reason: "header must be `file_path,<features...>,label`".into(),
            });
        }
        let feature_names: Vec<String> = cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
        let mut records = Vec::new();
        for (i, line) in lines {
            let line_no = i as u64 + 1;
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != cols.len() {
                return Err(DatasetError::Csv {
                    line: line_no,
                    reason: format!("expected {} fields, found {}", cols.len(), cells.len()),
                });
            }
            let features = cells[1..cells.len() - 1]
                .iter()
                .map(|c| {
                    c.parse::<f64>().map_err(|_| DatasetError::Csv {
                        line: line_no,
                        reason: format!("`{c}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label = match cells[cells.len() - 1] {
                "1" => Label::DefectProne,
                "0" => Label::Clean,
                other => {
                    return Err(DatasetError::Csv {
                        line: line_no,
                        reason: format!("label `{other}` is not 0 or 1"),
                    })
                }
            };
            records.push(LabeledRecord {
                file_path: cells[0].to_string(),
                features,
                label,
            });
        }
        let provenance = Provenance {
            source_mix: infer_source_mix(&feature_names),
            filtered_generated: false,
        };
        Self::new(feature_names, records, provenance)
    }
}

fn is_category_name(name: &str) -> bool {
    WarningCategory::ALL.iter().any(|c| c.name() == name)
}

fn infer_source_mix(names: &[String]) -> SourceMix {
    let n_cat = names.iter().filter(|n| is_category_name(n)).count();
    if n_cat == 0 {
        SourceMix::FileMetricsOnly
    } else if n_cat == names.len() {
        SourceMix::WarningsOnly
    } else {
        SourceMix::Combined
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LabeledDataset {
        LabeledDataset::new(
            vec!["loc".into(), "Design".into()],
            vec![
                LabeledRecord {
                    file_path: "a/x.cs".into(),
                    features: vec![10.0, 1.5],
                    label: Label::DefectProne,
                },
                LabeledRecord {
                    file_path: "b/y.cs".into(),
                    features: vec![0.1, 0.0],
                    label: Label::Clean,
                },
            ],
            Provenance {
                source_mix: SourceMix::Combined,
                filtered_generated: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let ds = tiny();
        let text = ds.to_csv();
        assert!(text.starts_with("file_path,loc,Design,label\n"));
        assert_eq!(LabeledDataset::from_csv(&text).unwrap(), ds);
    }

    #[test]
    fn rejects_bad_records() {
        let prov = tiny().provenance;
        let r = |p: &str, f: Vec<f64>| LabeledRecord {
            file_path: p.into(),
            features: f,
            label: Label::Clean,
        };
        assert!(matches!(
            LabeledDataset::new(vec!["a".into()], vec![r("x", vec![1.0, 2.0])], prov),
            Err(DatasetError::LengthMismatch { .. })
        ));
        assert!(matches!(
            LabeledDataset::new(vec!["a".into()], vec![r("x", vec![f64::NAN])], prov),
            Err(DatasetError::NonFinite { .. })
        ));
        assert!(matches!(
            LabeledDataset::new(vec!["a".into()], vec![r("x", vec![1.0]), r("X", vec![1.0])], prov),
            Err(DatasetError::DuplicatePath { .. })
        ));
    }

    #[test]
    fn split_sources_partitions_columns() {
        let (f, w) = tiny().split_sources();
        assert_eq!(f.feature_names, vec!["loc"]);
        assert_eq!(w.feature_names, vec!["Design"]);
        assert_eq!(w.provenance.source_mix, SourceMix::WarningsOnly);
        assert_eq!(w.records[0].features, vec![1.5]);
    }
}
