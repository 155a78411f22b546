//! End-to-end dataset construction from the three parsed inputs.

use serde::{Deserialize, Serialize};

use crate::builder::{
    aggregate_warnings_to_files, label_defect_prone, merge_sources, BuildError, DefectLinkConfig, FileWarnings,
    GeneratedCodeRule, JoinReport,
};
use crate::dataset::{LabeledDataset, SourceMix};
use crate::ingest::{path_key, ChangeRecord, ClassWarningRecord, FileMetricRecord};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// `None` disables generated-code removal.
    pub generated_rule: Option<GeneratedCodeRule>,
    pub defect_pattern: DefectLinkConfig,
    /// Restrict every variant to files present in both sources, so all
    /// variants describe the same records.
    pub align_variants: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            generated_rule: Some(GeneratedCodeRule::default()),
            defect_pattern: DefectLinkConfig::default(),
            align_variants: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_files: usize,
    pub kept_files: usize,
    pub removed: Vec<String>,
    /// Warning-side files dropped because they were removed as generated.
    pub removed_warning_files: usize,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    /// One dataset per variant, in `SourceMix::ALL` order.
    pub variants: Vec<LabeledDataset>,
    /// Combined variant before generated-code removal.
    pub unfiltered_combined: LabeledDataset,
    pub join: JoinReport,
    pub filter: FilterReport,
}

impl BuildOutput {
    pub fn variant(&self, mix: SourceMix) -> &LabeledDataset {
        &self.variants[SourceMix::ALL
            .iter()
            .position(|&m| m == mix)
            .expect("all variants built")]
    }
}

fn combined(
    file_metrics: &[FileMetricRecord],
    warnings: &[FileWarnings],
    changes: &[ChangeRecord],
    cfg: &BuildConfig,
    filtered: bool,
) -> Result<(LabeledDataset, JoinReport), BuildError> {
    let mut merged = merge_sources(file_metrics, warnings, SourceMix::Combined)?;
    merged.filtered_generated = filtered;
    Ok((
        label_defect_prone(&merged, changes, &cfg.defect_pattern)?,
        merged.report,
    ))
}

/// Aggregates warnings, removes generated code, merges and labels all
/// three dataset variants.
pub fn build_datasets(
    file_metrics: &[FileMetricRecord],
    class_warnings: &[ClassWarningRecord],
    changes: &[ChangeRecord],
    cfg: &BuildConfig,
) -> Result<BuildOutput, BuildError> {
    let warnings = aggregate_warnings_to_files(class_warnings);
    let (unfiltered_combined, _) = combined(file_metrics, &warnings, changes, cfg, false)?;

    let (kept, kept_warnings, filter) = match &cfg.generated_rule {
        Some(rule) => {
            let compiled = rule.compile()?;
            let (kept, removed): (Vec<FileMetricRecord>, Vec<FileMetricRecord>) =
                file_metrics.iter().cloned().partition(|r| !compiled.matches(r));
            let removed_keys: std::collections::HashSet<String> =
                removed.iter().map(|r| path_key(&r.file_path)).collect();
            let kept_warnings: Vec<FileWarnings> = warnings
                .iter()
                .filter(|w| !removed_keys.contains(&path_key(&w.file_path)) && !compiled.matches_path(&w.file_path))
                .cloned()
                .collect();
            let report = FilterReport {
                input_files: file_metrics.len(),
                kept_files: kept.len(),
                removed: removed.iter().map(|r| r.file_path.clone()).collect(),
                removed_warning_files: warnings.len() - kept_warnings.len(),
            };
            (kept, kept_warnings, report)
        }
        None => (
            file_metrics.to_vec(),
            warnings.clone(),
            FilterReport {
                input_files: file_metrics.len(),
                kept_files: file_metrics.len(),
                removed: Vec::new(),
                removed_warning_files: 0,
            },
        ),
    };
    let filtered = cfg.generated_rule.is_some();
    let (combined_ds, join) = combined(&kept, &kept_warnings, changes, cfg, filtered)?;

    let variants = if cfg.align_variants {
        let (file_only, warn_only) = combined_ds.split_sources();
        vec![file_only, warn_only, combined_ds]
    } else {
        let mut out = Vec::new();
        for mix in [SourceMix::FileMetricsOnly, SourceMix::WarningsOnly] {
            let mut merged = merge_sources(&kept, &kept_warnings, mix)?;
            merged.filtered_generated = filtered;
            out.push(label_defect_prone(&merged, changes, &cfg.defect_pattern)?);
        }
        out.push(combined_ds);
        out
    };
    Ok(BuildOutput {
        variants,
        unfiltered_combined,
        join,
        filter,
    })
}
