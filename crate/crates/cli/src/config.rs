//! Pipeline configuration: built-in defaults, then an optional JSON file,
//! then `--set key=value` overrides, then dedicated flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use smellpred::balancing::SmoteConfig;
use smellpred::classifiers::{ClassifierConfig, ClassifierKind};
use smellpred::evaluation::{ExperimentPlan, StudyConfig};
use smellpred::pipeline::BuildConfig;
use smellpred::selection::{AnnealingSchedule, FsMethod, ScoreKind};
use smellpred::synth::SyntheticSpec;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub file_metrics: Option<PathBuf>,
    pub warnings: Option<PathBuf>,
    pub change_log: Option<PathBuf>,
}

/// Dataset CSVs read by `experiment` and `study`. Unset paths default to
/// the files `build` writes under the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetPaths {
    pub without_smells: Option<PathBuf>,
    pub with_smells: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSettings {
    pub method: FsMethod,
    pub classifier: ClassifierConfig,
    pub split_fraction: f64,
    pub score: ScoreKind,
    pub annealing: AnnealingSchedule,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self {
            method: FsMethod::Elimination,
            classifier: ClassifierConfig::new(ClassifierKind::RandomForest),
            split_fraction: 0.5,
            score: ScoreKind::FMeasure,
            annealing: AnnealingSchedule::default(),
        }
    }
}

/// Everything a command may need. `seed` is the master seed; the seeds
/// inside the sections are overwritten from it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub inputs: Inputs,
    pub datasets: DatasetPaths,
    pub build: BuildConfig,
    pub smote: SmoteConfig,
    pub selection: SelectionSettings,
    pub plan: ExperimentPlan,
    pub study: StudyConfig,
    pub synth: SyntheticSpec,
}

impl PipelineConfig {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Input("a seed is required: pass --seed or set `seed` in the config".into()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=value`. The value is read as JSON when it parses, else
/// as a plain string.
fn apply_set(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--set expects key=value, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        let obj = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

pub fn load(file: Option<&Path>, sets: &[String], flags: Vec<(&str, Value)>) -> Result<PipelineConfig, CliError> {
    let mut root = serde_json::to_value(PipelineConfig::default()).expect("defaults serialize");
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: line {}: {e}", path.display(), e.line())))?;
        merge(&mut root, doc);
    }
    for s in sets {
        apply_set(&mut root, s)?;
    }
    for (key, value) in flags {
        apply_set(&mut root, &format!("{key}={value}"))?;
    }
    let mut cfg: PipelineConfig = serde_json::from_value(root).map_err(|e| CliError::Input(format!("config: {e}")))?;
    if let Some(seed) = cfg.seed {
        cfg.plan.seed = seed;
        cfg.study.seed = seed;
    }
    Ok(cfg)
}
