//! Turns parsed inputs into labeled datasets: warning aggregation to file
//! grain, generated-code removal, source merging, defect labeling from the
//! change log, and submodule partitioning.

use std::collections::{BTreeMap, HashMap, HashSet};

use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use rand::seq::SliceRandom;
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dataset::{Label, LabeledDataset, LabeledRecord, Provenance, SourceMix};
use crate::ingest::{path_key, CategoryCounts, ChangeRecord, ClassWarningRecord, FileMetricRecord, WarningCategory};
use crate::rng::rng_from_seed;

/// Default LOC above which a file is treated as generated.
pub const DEFAULT_LOC_THRESHOLD: u64 = 1000;

/// Default pattern recognising defect-fixing check-in messages.
pub const DEFAULT_DEFECT_PATTERN: &str = r"(?i)\b(fix|fixes|fixed|defect|bug)\b";

/// Messages the default pattern must accept.
pub const DEFAULT_PATTERN_EXAMPLES: [&str; 4] = [
    "fix DE-101 crash",
    "Fixed null reference in report export",
    "Bug 2291: wrong ECU checksum",
    "defect 77 - timeout on sync",
];

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid glob `{glob}`: {reason}")]
    InvalidGlob { glob: String, reason: String },
    #[error("generated-code rule needs at least one glob or a LOC threshold")]
    EmptyRule,
    #[error("invalid defect pattern: {0}")]
    InvalidPattern(#[from] regex::Error),
    #[error("no file is present in both metric sources")]
    EmptyJoin,
    #[error("file `{path}` has a different metric list than the first record")]
    InconsistentMetrics { path: String },
    #[error("cannot split {records} records into {requested} submodules")]
    TooManyPartitions { requested: usize, records: usize },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// Warning counts summed over all classes of one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileWarnings {
    pub file_path: String,
    pub counts: CategoryCounts,
}

/// Sums class-level warning counts per file. Output is sorted by the
/// case-insensitive path key; the path spelling of the first class seen
/// is kept.
pub fn aggregate_warnings_to_files(class_records: &[ClassWarningRecord]) -> Vec<FileWarnings> {
    let mut by_file: BTreeMap<String, FileWarnings> = BTreeMap::new();
    for rec in class_records {
        by_file
            .entry(path_key(&rec.file_path))
            .or_insert_with(|| FileWarnings {
                file_path: rec.file_path.clone(),
                counts: CategoryCounts::default(),
            })
            .counts
            .add(&rec.counts);
    }
    by_file.into_values().collect()
}

/// Removal criterion for generated code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedCodeRule {
    #[serde(default)]
    pub path_globs: Vec<String>,
    #[serde(default)]
    pub loc_threshold: Option<u64>,
}

impl Default for GeneratedCodeRule {
    fn default() -> Self {
        Self {
            path_globs: vec!["**/*.designer.cs".into(), "**/*.g.cs".into(), "**/*.g.i.cs".into()],
            loc_threshold: Some(DEFAULT_LOC_THRESHOLD),
        }
    }
}

impl GeneratedCodeRule {
    pub fn compile(&self) -> Result<CompiledRule, BuildError> {
        if self.path_globs.is_empty() && self.loc_threshold.is_none() {
            return Err(BuildError::EmptyRule);
        }
        let mut builder = GlobSetBuilder::new();
        for g in &self.path_globs {
            let glob = GlobBuilder::new(g)
                .case_insensitive(true)
                .literal_separator(true)
                .build()
                .map_err(|e| BuildError::InvalidGlob {
                    glob: g.clone(),
                    reason: e.kind().to_string(),
                })?;
            builder.add(glob);
        }
        let globs = builder.build().map_err(|e| BuildError::InvalidGlob {
            glob: self.path_globs.join(","),
            reason: e.to_string(),
        })?;
        Ok(CompiledRule {
            globs,
            loc_threshold: self.loc_threshold,
        })
    }
}

pub struct CompiledRule {
    globs: GlobSet,
    loc_threshold: Option<u64>,
}

impl CompiledRule {
    pub fn matches_path(&self, path: &str) -> bool {
        self.globs.is_match(path)
    }

    /// Strictly greater than the threshold counts as generated.
    pub fn matches(&self, record: &FileMetricRecord) -> bool {
        self.matches_path(&record.file_path) || self.loc_threshold.is_some_and(|t| record.loc > t)
    }
}

/// Splits file records into (kept, removed), preserving input order.
pub fn filter_generated(
    file_metrics: &[FileMetricRecord],
    rule: &GeneratedCodeRule,
) -> Result<(Vec<FileMetricRecord>, Vec<FileMetricRecord>), BuildError> {
    let compiled = rule.compile()?;
    Ok(file_metrics.iter().cloned().partition(|r| !compiled.matches(r)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedRow {
    pub file_path: String,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    pub source_mix: SourceMix,
    pub rows: usize,
    pub matched: usize,
    pub unmatched_file_metrics: Vec<String>,
    pub unmatched_warnings: Vec<String>,
}

/// Unlabeled feature table produced by [`merge_sources`].
#[derive(Debug, Clone, PartialEq)]
pub struct MergedTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<MergedRow>,
    pub source_mix: SourceMix,
    /// Set by callers that ran [`filter_generated`] on the inputs.
    pub filtered_generated: bool,
    pub report: JoinReport,
}

pub fn category_feature_names() -> Vec<String> {
    WarningCategory::ALL.iter().map(|c| c.name().to_string()).collect()
}

fn metric_names(file_metrics: &[FileMetricRecord]) -> Result<Vec<String>, BuildError> {
    let Some(first) = file_metrics.first() else {
        return Ok(Vec::new());
    };
    let names: Vec<String> = first.metric_names().map(str::to_string).collect();
    for r in file_metrics {
        if r.metrics.len() != names.len() || r.metric_names().zip(&names).any(|(a, b)| a != b) {
            return Err(BuildError::InconsistentMetrics {
                path: r.file_path.clone(),
            });
        }
    }
    Ok(names)
}

fn count_features(c: &CategoryCounts) -> impl Iterator<Item = f64> + '_ {
    c.0.iter().map(|&n| n as f64)
}

/// Joins file metrics with per-file warning counts.
///
/// `Combined` is an inner join in file-metric order with feature names
/// `<metric names..., 11 categories>`. The single-source mixes pass one
/// side through unchanged. The report always lists paths missing from the
/// other side.
pub fn merge_sources(
    file_metrics: &[FileMetricRecord],
    file_warnings: &[FileWarnings],
    mix: SourceMix,
) -> Result<MergedTable, BuildError> {
    let names = metric_names(file_metrics)?;
    let warn_by_key: HashMap<String, &FileWarnings> =
        file_warnings.iter().map(|w| (path_key(&w.file_path), w)).collect();
    let metric_keys: HashSet<String> = file_metrics.iter().map(|r| path_key(&r.file_path)).collect();

    let unmatched_file_metrics: Vec<String> = file_metrics
        .iter()
        .filter(|r| !warn_by_key.contains_key(&path_key(&r.file_path)))
        .map(|r| r.file_path.clone())
        .collect();
    let unmatched_warnings: Vec<String> = file_warnings
        .iter()
        .filter(|w| !metric_keys.contains(&path_key(&w.file_path)))
        .map(|w| w.file_path.clone())
        .collect();
    let matched = file_metrics.len() - unmatched_file_metrics.len();

    let (feature_names, rows) = match mix {
        SourceMix::FileMetricsOnly => (
            names,
            file_metrics
                .iter()
                .map(|r| MergedRow {
                    file_path: r.file_path.clone(),
                    features: r.metrics.iter().map(|&(_, v)| v).collect(),
                })
                .collect(),
        ),
        SourceMix::WarningsOnly => (
            category_feature_names(),
            file_warnings
                .iter()
                .map(|w| MergedRow {
                    file_path: w.file_path.clone(),
                    features: count_features(&w.counts).collect(),
                })
                .collect(),
        ),
        SourceMix::Combined => {
            let rows: Vec<MergedRow> = file_metrics
                .iter()
                .filter_map(|r| {
                    let w = warn_by_key.get(&path_key(&r.file_path))?;
                    Some(MergedRow {
                        file_path: r.file_path.clone(),
                        features: r
                            .metrics
                            .iter()
                            .map(|&(_, v)| v)
                            .chain(count_features(&w.counts))
                            .collect(),
                    })
                })
                .collect();
            if rows.is_empty() {
                return Err(BuildError::EmptyJoin);
            }
            let mut fnames = names;
            fnames.extend(category_feature_names());
            (fnames, rows)
        }
    };
    Ok(MergedTable {
        report: JoinReport {
            source_mix: mix,
            rows: rows.len(),
            matched,
            unmatched_file_metrics,
            unmatched_warnings,
        },
        feature_names,
        rows,
        source_mix: mix,
        filtered_generated: false,
    })
}

/// How check-in messages are recognised as defect fixes.
#[derive(Debug, Clone)]
pub struct DefectLinkConfig {
    pub defect_pattern: Regex,
}

impl DefectLinkConfig {
    pub fn new(pattern: &str) -> Result<Self, BuildError> {
        Ok(Self {
            defect_pattern: Regex::new(pattern)?,
        })
    }

    pub fn is_defect_fix(&self, message: &str) -> bool {
        self.defect_pattern.is_match(message)
    }
}

impl Default for DefectLinkConfig {
    fn default() -> Self {
        Self::new(DEFAULT_DEFECT_PATTERN).expect("default pattern compiles")
    }
}

impl Serialize for DefectLinkConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.defect_pattern.as_str())
    }
}

impl<'de> Deserialize<'de> for DefectLinkConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = String::deserialize(d)?;
        Self::new(&p).map_err(serde::de::Error::custom)
    }
}

/// Path keys of all files touched by at least one defect-fixing change.
pub fn defect_fix_files(changes: &[ChangeRecord], cfg: &DefectLinkConfig) -> HashSet<String> {
    changes
        .iter()
        .filter(|c| cfg.is_defect_fix(&c.message))
        .flat_map(|c| c.files.iter().map(|f| path_key(f)))
        .collect()
}

/// Labels a file defect-prone iff some defect-fixing change touched it.
pub fn label_defect_prone(
    merged: &MergedTable,
    changes: &[ChangeRecord],
    cfg: &DefectLinkConfig,
) -> Result<LabeledDataset, BuildError> {
    let fixed = defect_fix_files(changes, cfg);
    let records = merged
        .rows
        .iter()
        .map(|row| LabeledRecord {
            file_path: row.file_path.clone(),
            features: row.features.clone(),
            label: if fixed.contains(&path_key(&row.file_path)) {
                Label::DefectProne
            } else {
                Label::Clean
            },
        })
        .collect();
    Ok(LabeledDataset::new(
        merged.feature_names.clone(),
        records,
        Provenance {
            source_mix: merged.source_mix,
            filtered_generated: merged.filtered_generated,
        },
    )?)
}

fn top_level_dir(path: &str) -> String {
    let key = path_key(path);
    match key.split_once('/') {
        Some((head, _)) => head.to_string(),
        None => String::new(),
    }
}

/// Splits a dataset into `n` disjoint submodules whose sizes differ by at
/// most one.
///
/// Records are grouped by top-level directory; groups are laid out in a
/// seeded order (records shuffled within each group) and the sequence is
/// cut into consecutive chunks, so directories stay together except where
/// a chunk boundary spills into the next group. Each submodule's records
/// are sorted by path key.
pub fn partition_submodules(dataset: &LabeledDataset, n: usize, seed: u64) -> Result<Vec<LabeledDataset>, BuildError> {
    if n == 0 || n > dataset.len() {
        return Err(BuildError::TooManyPartitions {
            requested: n,
            records: dataset.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.records.iter().enumerate() {
        groups.entry(top_level_dir(&r.file_path)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut groups {
        g.sort_by_key(|&i| path_key(&dataset.records[i].file_path));
        g.shuffle(&mut rng);
    }
    groups.shuffle(&mut rng);
    let order: Vec<usize> = groups.into_iter().flatten().collect();

    let base = order.len() / n;
    let extra = order.len() % n;
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for p in 0..n {
        let size = base + usize::from(p < extra);
        let mut idx = order[start..start + size].to_vec();
        start += size;
        idx.sort_by_key(|&i| path_key(&dataset.records[i].file_path));
        out.push(dataset.with_records(idx.into_iter().map(|i| dataset.records[i].clone()).collect()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_class_warnings, parse_file_metrics};
    use proptest::prelude::*;

    /// Class-level rows of the two-file example: File1.cs has three classes
    /// with 3, 20 and 6 issues, File2.cs one class with 15.
    pub(crate) const EXAMPLE_WARNINGS: &str = r#"<Targets>
  <Target Name="File1.cs">
    <Class Name="Class1"><Issue Category="Design" Count="3"/></Class>
    <Class Name="Class2"><Issue Category="Naming" Count="12"/><Issue Category="Usage" Count="8"/></Class>
    <Class Name="Class3"><Issue Category="Performance" Count="6"/></Class>
  </Target>
  <Target Name="File2.cs">
    <Class Name="Class4"><Issue Category="Reliability" Count="15"/></Class>
  </Target>
</Targets>"#;

    pub(crate) const EXAMPLE_METRICS: &str = "file_path,loc\nFile1.cs,100\nFile2.cs,30\n";

    fn rec(path: &str, loc: u64) -> FileMetricRecord {
        FileMetricRecord {
            file_path: path.into(),
            metrics: vec![("loc".into(), loc as f64)],
            loc,
        }
    }

    #[test]
    fn aggregation_matches_file_rows() {
        let classes = parse_class_warnings(EXAMPLE_WARNINGS).unwrap();
        let files = aggregate_warnings_to_files(&classes);
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].file_path, "File1.cs");
        assert_eq!(files[0].counts.total(), 29);
        assert_eq!(files[1].counts.total(), 15);
        assert!(aggregate_warnings_to_files(&[]).is_empty());
    }

    #[test]
    fn generated_filter_rules() {
        let rule = GeneratedCodeRule {
            path_globs: vec![],
            loc_threshold: Some(1000),
        };
        let (kept, removed) = filter_generated(&[rec("a.cs", 1500), rec("b.cs", 1000), rec("c.cs", 3)], &rule).unwrap();
        assert_eq!(removed, vec![rec("a.cs", 1500)]);
        assert_eq!(kept, vec![rec("b.cs", 1000), rec("c.cs", 3)]);

        let rule = GeneratedCodeRule {
            path_globs: vec!["**/*.designer.cs".into()],
            loc_threshold: None,
        };
        let (kept, removed) =
            filter_generated(&[rec("a/Form1.designer.cs", 50), rec("a/Form1.cs", 50)], &rule).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(kept[0].file_path, "a/Form1.cs");

        let bad = GeneratedCodeRule {
            path_globs: vec!["a/[".into()],
            loc_threshold: None,
        };
        assert!(matches!(
            filter_generated(&[], &bad),
            Err(BuildError::InvalidGlob { .. })
        ));
        let empty = GeneratedCodeRule {
            path_globs: vec![],
            loc_threshold: None,
        };
        assert!(matches!(filter_generated(&[], &empty), Err(BuildError::EmptyRule)));
    }

    #[test]
    fn combined_merge_of_example_tables() {
        let fm = parse_file_metrics(EXAMPLE_METRICS).unwrap();
        let fw = aggregate_warnings_to_files(&parse_class_warnings(EXAMPLE_WARNINGS).unwrap());
        let t = merge_sources(&fm, &fw, SourceMix::Combined).unwrap();
        assert_eq!(t.feature_names.len(), 12);
        assert_eq!(t.rows[0].file_path, "File1.cs");
        assert_eq!(t.rows[0].features[0], 100.0);
        assert_eq!(t.rows[0].features[1..].iter().sum::<f64>(), 29.0);
        assert_eq!(t.rows[1].features[1..].iter().sum::<f64>(), 15.0);

        let w = merge_sources(&fm, &fw, SourceMix::WarningsOnly).unwrap();
        assert_eq!(w.feature_names, category_feature_names());
        assert_eq!(w.feature_names.len(), 11);
    }

    #[test]
    fn disjoint_combined_is_empty_join() {
        let fw = vec![FileWarnings {
            file_path: "other.cs".into(),
            counts: CategoryCounts::default(),
        }];
        assert!(matches!(
            merge_sources(&[rec("a.cs", 1)], &fw, SourceMix::Combined),
            Err(BuildError::EmptyJoin)
        ));
        let t = merge_sources(&[rec("a.cs", 1)], &fw, SourceMix::FileMetricsOnly).unwrap();
        assert_eq!(t.report.unmatched_file_metrics, vec!["a.cs"]);
        assert_eq!(t.report.unmatched_warnings, vec!["other.cs"]);
    }

    #[test]
    fn default_pattern_accepts_examples() {
        let cfg = DefectLinkConfig::default();
        for m in DEFAULT_PATTERN_EXAMPLES {
            assert!(cfg.is_defect_fix(m), "{m}");
        }
        for m in ["Add export wizard", "prefix handling", "debug overlay", "Refactor sync"] {
            assert!(!cfg.is_defect_fix(m), "{m}");
        }
    }

    fn table(paths: &[&str]) -> MergedTable {
        let fm: Vec<_> = paths.iter().map(|p| rec(p, 10)).collect();
        merge_sources(&fm, &[], SourceMix::FileMetricsOnly).unwrap()
    }

    fn change(msg: &str, files: &[&str]) -> ChangeRecord {
        ChangeRecord {
            change_id: "c".into(),
            message: msg.into(),
            files: files.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn labeling() {
        let cfg = DefectLinkConfig::default();
        let t = table(&["a/File1.cs", "a/File2.cs"]);
        let ds = label_defect_prone(&t, &[change("fix DE-101 crash", &["A\\file1.cs"])], &cfg).unwrap();
        assert_eq!(ds.records[0].label, Label::DefectProne);
        assert_eq!(ds.records[1].label, Label::Clean);

        let ds = label_defect_prone(&t, &[], &cfg).unwrap();
        assert_eq!(ds.count(Label::DefectProne), 0);

        let ds = label_defect_prone(&t, &[change("fix it", &["zzz.cs"])], &cfg).unwrap();
        assert_eq!(ds.count(Label::DefectProne), 0);
    }

    fn dataset(n: usize) -> LabeledDataset {
        let paths: Vec<String> = (0..n).map(|i| format!("m{}/f{i}.cs", i % 3)).collect();
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        label_defect_prone(&table(&refs), &[], &DefectLinkConfig::default()).unwrap()
    }

    #[test]
    fn partition_examples() {
        let ds = dataset(40);
        let parts = partition_submodules(&ds, 20, 3).unwrap();
        assert_eq!(parts.len(), 20);
        assert!(parts.iter().all(|p| p.len() == 2));

        let one = partition_submodules(&ds, 1, 3).unwrap();
        let mut sorted = ds.records.clone();
        sorted.sort_by_key(|r| path_key(&r.file_path));
        assert_eq!(one[0].records, sorted);

        assert_eq!(
            partition_submodules(&ds, 7, 11).unwrap(),
            partition_submodules(&ds, 7, 11).unwrap()
        );
        assert!(matches!(
            partition_submodules(&ds, 41, 0),
            Err(BuildError::TooManyPartitions { .. })
        ));
    }

    #[test]
    fn partition_keeps_directories_together() {
        let ds = dataset(30);
        let parts = partition_submodules(&ds, 3, 5).unwrap();
        for p in parts {
            let dirs: HashSet<String> = p.records.iter().map(|r| top_level_dir(&r.file_path)).collect();
            assert_eq!(dirs.len(), 1);
        }
    }

    proptest! {
        #[test]
        fn aggregation_conserves_counts(
            raw in prop::collection::vec((0usize..5, prop::collection::vec(0u64..30, 11)), 0..30)
        ) {
            let classes: Vec<ClassWarningRecord> = raw
                .iter()
                .enumerate()
                .map(|(i, (f, v))| {
                    let mut counts = CategoryCounts::default();
                    counts.0.copy_from_slice(v);
                    ClassWarningRecord { file_path: format!("d/F{f}.cs"), class_name: format!("C{i}"), counts }
                })
                .collect();
            let files = aggregate_warnings_to_files(&classes);
            for c in WarningCategory::ALL {
                let before: u64 = classes.iter().map(|r| r.counts[c]).sum();
                let after: u64 = files.iter().map(|r| r.counts[c]).sum();
                prop_assert_eq!(before, after);
            }
            let distinct: HashSet<_> = classes.iter().map(|r| path_key(&r.file_path)).collect();
            prop_assert_eq!(files.len(), distinct.len());
        }

        #[test]
        fn filter_partitions_input(locs in prop::collection::vec(0u64..3000, 0..40), t in 1u64..2000) {
            let recs: Vec<_> = locs.iter().enumerate().map(|(i, &l)| rec(&format!("f{i}.cs"), l)).collect();
            let rule = GeneratedCodeRule { path_globs: vec![], loc_threshold: Some(t) };
            let (kept, removed) = filter_generated(&recs, &rule).unwrap();
            prop_assert_eq!(kept.len() + removed.len(), recs.len());
            prop_assert!(kept.iter().all(|r| r.loc <= t));
            prop_assert!(removed.iter().all(|r| r.loc > t));
        }

        #[test]
        fn labeling_is_monotone(extra in prop::collection::vec((any::<bool>(), 0usize..8), 0..10)) {
            let paths: Vec<String> = (0..8).map(|i| format!("f{i}.cs")).collect();
            let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
            let t = table(&refs);
            let cfg = DefectLinkConfig::default();
            let base = vec![change("bug 1", &["f0.cs"])];
            let before = label_defect_prone(&t, &base, &cfg).unwrap();
            let mut more = base.clone();
            for (fix, f) in extra {
                more.push(change(if fix { "fixed" } else { "tidy" }, &[paths[f].as_str()]));
            }
            let after = label_defect_prone(&t, &more, &cfg).unwrap();
            for (a, b) in before.records.iter().zip(&after.records) {
                prop_assert!(!(a.label == Label::DefectProne && b.label == Label::Clean));
            }
        }

        #[test]
        fn combined_row_count_is_intersection(a in prop::collection::btree_set(0u8..30, 0..20), b in prop::collection::btree_set(0u8..30, 1..20)) {
            let fm: Vec<_> = a.iter().map(|i| rec(&format!("F{i}.cs"), 1)).collect();
            let fw: Vec<_> = b.iter().map(|i| FileWarnings { file_path: format!("f{i}.cs"), counts: CategoryCounts::default() }).collect();
            let common = a.intersection(&b).count();
            match merge_sources(&fm, &fw, SourceMix::Combined) {
                Ok(t) => prop_assert_eq!(t.rows.len(), common),
                Err(BuildError::EmptyJoin) => prop_assert_eq!(common, 0),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn partitions_cover_and_balance(n_records in 1usize..60, n in 1usize..20, seed in any::<u64>()) {
            prop_assume!(n <= n_records);
            let ds = dataset(n_records);
            let parts = partition_submodules(&ds, n, seed).unwrap();
            let sizes: Vec<usize> = parts.iter().map(|p| p.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<String> = parts.iter().flat_map(|p| p.records.iter().map(|r| r.file_path.clone())).collect();
            all.sort();
            let mut orig: Vec<String> = ds.records.iter().map(|r| r.file_path.clone()).collect();
            orig.sort();
            prop_assert_eq!(all, orig);
        }
    }
}
