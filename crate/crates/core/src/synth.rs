//! Synthetic input corpora in the three ingest formats, with known
//! ground-truth labels.
//!
//! Each file gets a latent risk drawn from N(0, 1). The `minority_fraction`
//! share of files with the highest risk are defect-prone; `noise_rate` of
//! those labels are then swapped with randomly chosen clean files, which
//! keeps the class counts exact. Informative file metrics and warning
//! categories grow with the latent risk, the rest are independent noise.
//! Every defect-prone file is referenced by a defect-fix check-in and no
//! clean file is.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;
use crate::ingest::{
    write_change_log, write_class_warnings_xml, CategoryCounts, ChangeRecord, ClassWarningRecord, WarningCategory,
};
use crate::rng::{rng_from_seed, PipelineRng};

const METRIC_NAMES: [&str; 15] = [
    "loc",
    "max_complexity",
    "max_block_depth",
    "methods_per_class",
    "percent_comments",
    "avg_block_depth",
    "statements",
    "percent_branch_statements",
    "calls_per_method",
    "avg_statements_per_method",
    "classes",
    "avg_complexity",
    "methods",
    "doc_lines",
    "interfaces",
];

/// Categories in the order informative slots are assigned.
const INFORMATIVE_CATEGORY_ORDER: [WarningCategory; 11] = [
    WarningCategory::Design,
    WarningCategory::Maintainability,
    WarningCategory::Reliability,
    WarningCategory::Usage,
    WarningCategory::Performance,
    WarningCategory::Security,
    WarningCategory::Globalization,
    WarningCategory::Naming,
    WarningCategory::Interoperability,
    WarningCategory::Portability,
    WarningCategory::Mobility,
];

const FIX_TEMPLATES: [&str; 4] = [
    "fix DE-{id}: {what}",
    "Fixed {what} (defect {id})",
    "bug {id}: {what}",
    "Fixes #{id} {what}",
];

const FIX_TOPICS: [&str; 6] = [
    "crash on ECU download",
    "wrong checksum after calibration",
    "null reference in report export",
    "timeout during palmtop sync",
    "stale configuration cache",
    "race in server handshake",
];

const CHORE_MESSAGES: [&str; 6] = [
    "Add export wizard",
    "Refactor sync service",
    "Update localization strings",
    "Improve logging around downloads",
    "Rename configuration keys",
    "Tidy up unit test fixtures",
];

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_files: usize,
    /// File metrics per file, `loc` included.
    pub n_file_metrics: usize,
    pub n_informative_file_metrics: usize,
    pub n_informative_warnings: usize,
    pub noise_rate: f64,
    pub minority_fraction: f64,
    /// Number of top-level directories.
    pub n_modules: usize,
    /// Extra oversized, multi-class files (always clean) for the
    /// generated-code filter to remove.
    pub n_generated_files: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_files: 2000,
            n_file_metrics: 15,
            n_informative_file_metrics: 3,
            n_informative_warnings: 4,
            noise_rate: 0.1,
            minority_fraction: 0.1,
            n_modules: 20,
            n_generated_files: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.n_files < 2 {
            return bad("n_files must be at least 2");
        }
        if !(self.minority_fraction > 0.0 && self.minority_fraction < 0.5) {
            return bad("minority_fraction must lie in (0, 0.5)");
        }
        if !(self.noise_rate >= 0.0 && self.noise_rate < 0.5) {
            return bad("noise_rate must lie in [0, 0.5)");
        }
        if self.n_file_metrics == 0 {
            return bad("n_file_metrics must be at least 1 (loc)");
        }
        if self.n_informative_file_metrics > self.n_file_metrics {
            return bad("more informative file metrics than metrics");
        }
        if self.n_informative_warnings > WarningCategory::COUNT {
            return bad("at most 11 informative warning categories");
        }
        if self.n_modules == 0 {
            return bad("n_modules must be positive");
        }
        Ok(())
    }

    pub fn metric_names(&self) -> Vec<String> {
        (0..self.n_file_metrics)
            .map(|i| {
                METRIC_NAMES
                    .get(i)
                    .map_or_else(|| format!("metric_{i}"), |s| s.to_string())
            })
            .collect()
    }

    /// Number of defect-prone files the corpus will contain.
    pub fn n_defect_prone(&self) -> usize {
        ((self.minority_fraction * self.n_files as f64).round() as usize).clamp(1, self.n_files - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub file_metrics_csv: String,
    pub warnings_xml: String,
    pub change_log_jsonl: String,
    /// Ground truth for the regular (non-generated) files, in CSV order.
    pub ground_truth: Vec<(String, Label)>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn normal(rng: &mut PipelineRng) -> f64 {
    rng.sample(StandardNormal)
}

fn poisson(rng: &mut PipelineRng, lambda: f64) -> u64 {
    Poisson::new(lambda.max(1e-6)).expect("positive rate").sample(rng) as u64
}

struct FileSpec {
    path: String,
    metrics: Vec<f64>,
    counts: CategoryCounts,
    n_classes: usize,
}

fn spread_counts(rng: &mut PipelineRng, counts: &CategoryCounts, n_classes: usize) -> Vec<CategoryCounts> {
    let mut out = vec![CategoryCounts::default(); n_classes];
    for (cat, n) in counts.iter() {
        for _ in 0..n {
            out[rng.gen_range(0..n_classes)][cat] += 1;
        }
    }
    out
}

/// Generates the three input documents for `spec`. Identical inputs give
/// byte-identical output.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus, SynthError> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let n = spec.n_files;

    let risk: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let mut by_risk: Vec<usize> = (0..n).collect();
    by_risk.sort_by(|&a, &b| risk[b].total_cmp(&risk[a]).then(a.cmp(&b)));
    let n_pos = spec.n_defect_prone();
    let mut labels = vec![Label::Clean; n];
    for &i in &by_risk[..n_pos] {
        labels[i] = Label::DefectProne;
    }
    let n_swaps = ((spec.noise_rate * n_pos as f64).round() as usize).min(n - n_pos);
    if n_swaps > 0 {
        let mut pos: Vec<usize> = by_risk[..n_pos].to_vec();
        let mut neg: Vec<usize> = by_risk[n_pos..].to_vec();
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        for k in 0..n_swaps {
            labels[pos[k]] = Label::Clean;
            labels[neg[k]] = Label::DefectProne;
        }
    }

    let informative: Vec<WarningCategory> = INFORMATIVE_CATEGORY_ORDER[..spec.n_informative_warnings].to_vec();
    let mut files = Vec::with_capacity(n + spec.n_generated_files);
    for (i, &r) in risk.iter().enumerate() {
        let module = rng.gen_range(0..spec.n_modules);
        let sub = rng.gen_range(0..4);
        let path = format!("Module{module:02}/Part{sub}/File{i:05}.cs");
        let mut metrics = Vec::with_capacity(spec.n_file_metrics);
        let loc = if spec.n_informative_file_metrics > 0 {
            (5.0 + 0.6 * r + 0.15 * normal(&mut rng))
                .exp()
                .round()
                .clamp(5.0, 1000.0)
        } else {
            (5.0 + 0.6 * normal(&mut rng)).exp().round().clamp(5.0, 1000.0)
        };
        metrics.push(loc);
        for j in 1..spec.n_file_metrics {
            let v = if j < spec.n_informative_file_metrics {
                let scale = 1.0 + j as f64;
                (4.0 * scale + 1.5 * scale * (r + 0.2 * normal(&mut rng))).max(0.0)
            } else {
                (10.0 + 3.0 * j as f64) * (0.5 * normal(&mut rng)).exp()
            };
            metrics.push(round2(v));
        }
        let mut counts = CategoryCounts::default();
        for cat in WarningCategory::ALL {
            counts[cat] = if informative.contains(&cat) {
                let eps = normal(&mut rng);
                poisson(&mut rng, (1.0 + 0.9 * (r + 0.2 * eps)).exp())
            } else {
                poisson(&mut rng, 1.5)
            };
        }
        files.push(FileSpec {
            path,
            metrics,
            counts,
            n_classes: rng.gen_range(1..=3),
        });
    }
    for g in 0..spec.n_generated_files {
        let module = rng.gen_range(0..spec.n_modules);
        let loc = rng.gen_range(1200..6000u64);
        let mut metrics = vec![loc as f64];
        for j in 1..spec.n_file_metrics {
            metrics.push(round2((10.0 + 3.0 * j as f64) * (0.5 * normal(&mut rng)).exp()));
        }
        let n_classes = rng.gen_range(3..=10);
        let mut counts = CategoryCounts::default();
        for cat in WarningCategory::ALL {
            counts[cat] = poisson(&mut rng, 4.0 * n_classes as f64);
        }
        files.push(FileSpec {
            path: format!("Module{module:02}/Generated/Reference{g:04}.cs"),
            metrics,
            counts,
            n_classes,
        });
    }

    let names = spec.metric_names();
    let mut csv = format!("file_path,{}\n", names.join(","));
    for f in &files {
        csv.push_str(&f.path);
        for v in &f.metrics {
            write!(csv, ",{v}").expect("string write");
        }
        csv.push('\n');
    }

    let mut class_records = Vec::new();
    for (i, f) in files.iter().enumerate() {
        // Exercise separator and case normalization on the warnings side.
        let spelled = if i % 7 == 3 {
            f.path.replace('/', "\\")
        } else if i % 11 == 5 {
            f.path.to_uppercase()
        } else {
            f.path.clone()
        };
        let stem = f.path.rsplit('/').next().unwrap_or("File").trim_end_matches(".cs");
        for (c, counts) in spread_counts(&mut rng, &f.counts, f.n_classes).into_iter().enumerate() {
            class_records.push(ClassWarningRecord {
                file_path: spelled.clone(),
                class_name: format!("{stem}Class{c}"),
                counts,
            });
        }
    }

    let mut defect_files: Vec<usize> = (0..n).filter(|&i| labels[i] == Label::DefectProne).collect();
    defect_files.shuffle(&mut rng);
    let mut changes = Vec::new();
    let mut next_id = 100;
    let mut k = 0;
    while k < defect_files.len() {
        let take = rng.gen_range(1..=3).min(defect_files.len() - k);
        let template = FIX_TEMPLATES[rng.gen_range(0..FIX_TEMPLATES.len())];
        let what = FIX_TOPICS[rng.gen_range(0..FIX_TOPICS.len())];
        changes.push(ChangeRecord {
            change_id: String::new(),
            message: template.replace("{id}", &next_id.to_string()).replace("{what}", what),
            files: defect_files[k..k + take]
                .iter()
                .map(|&i| files[i].path.clone())
                .collect(),
        });
        next_id += 1;
        k += take;
    }
    let n_chores = n / 4;
    for _ in 0..n_chores {
        let take = rng.gen_range(1..=4);
        let touched = (0..take)
            .map(|_| files[rng.gen_range(0..files.len())].path.clone())
            .collect();
        changes.push(ChangeRecord {
            change_id: String::new(),
            message: CHORE_MESSAGES[rng.gen_range(0..CHORE_MESSAGES.len())].to_string(),
            files: touched,
        });
    }
    changes.shuffle(&mut rng);
    for (i, c) in changes.iter_mut().enumerate() {
        c.change_id = format!("{:08x}{i:05}", rng.gen::<u32>());
    }

    Ok(SyntheticCorpus {
        file_metrics_csv: csv,
        warnings_xml: write_class_warnings_xml(&class_records),
        change_log_jsonl: write_change_log(&changes),
        ground_truth: files[..n]
            .iter()
            .zip(&labels)
            .map(|(f, &l)| (f.path.clone(), l))
            .collect(),
    })
}
