use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use smellpred::balancing::{smote, SmoteConfig};
use smellpred::builder::{aggregate_warnings_to_files, defect_fix_files, BuildError};
use smellpred::classifiers::ClassifierError;
use smellpred::evaluation::{run_experiment_matrix, run_submodule_study, study_submodules, ExperimentData, StudyError};
use smellpred::ingest::{
    parse_change_log, parse_class_warnings, parse_file_metrics, ChangeRecord, ClassWarningRecord, FileMetricRecord,
};
use smellpred::pipeline::build_datasets;
use smellpred::plot::scatter_svg;
use smellpred::rng::derive_seed;
use smellpred::selection::{
    backward_elimination, simulated_annealing_select, AnnealingSchedule, FeatureMask, FsMethod, SelectionError,
    WrapperEvaluator,
};
use smellpred::synth::generate_synthetic_corpus;
use smellpred::{LabeledDataset, SourceMix};

use crate::config::PipelineConfig;
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, content).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write(path, &text)
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| {
        CliError::Input(format!(
            "no {what} input given (--{} or inputs.{})",
            what.replace('_', "-"),
            what
        ))
    })
}

fn load_file_metrics(path: &Path) -> Result<Vec<FileMetricRecord>, CliError> {
    parse_file_metrics(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_warnings(path: &Path) -> Result<Vec<ClassWarningRecord>, CliError> {
    parse_class_warnings(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_changes(path: &Path) -> Result<Vec<ChangeRecord>, CliError> {
    parse_change_log(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<LabeledDataset, CliError> {
    LabeledDataset::from_csv(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn dataset_path(cfg: &PipelineConfig, explicit: &Option<PathBuf>, mix: SourceMix) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| cfg.output_dir().join("datasets").join(format!("{}.csv", mix.slug())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

pub fn synth(cfg: &PipelineConfig) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let corpus = generate_synthetic_corpus(&cfg.synth, seed).map_err(|e| CliError::Input(e.to_string()))?;
    let dir = cfg.output_dir().join("inputs");
    write(&dir.join("file_metrics.csv"), &corpus.file_metrics_csv)?;
    write(&dir.join("warnings.xml"), &corpus.warnings_xml)?;
    write(&dir.join("change_log.jsonl"), &corpus.change_log_jsonl)?;
    let mut truth = String::from("file_path,label\n");
    for (p, l) in &corpus.ground_truth {
        truth.push_str(&format!("{p},{}\n", l.as_digit()));
    }
    write(&dir.join("ground_truth.csv"), &truth)?;
    println!(
        "synthetic corpus: {} files, {} defect-prone, written to {}",
        corpus.ground_truth.len(),
        cfg.synth.n_defect_prone(),
        dir.display()
    );
    Ok(())
}

pub fn ingest(cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.seed()?;
    let inputs = &cfg.inputs;
    if inputs.file_metrics.is_none() && inputs.warnings.is_none() && inputs.change_log.is_none() {
        return Err(CliError::Input("no inputs given".into()));
    }
    let mut report = serde_json::Map::new();
    if let Some(p) = &inputs.file_metrics {
        let recs = load_file_metrics(p)?;
        let names: Vec<&str> = recs.first().map(|r| r.metric_names().collect()).unwrap_or_default();
        println!("file metrics: {} files, {} metrics", recs.len(), names.len());
        report.insert("file_metrics".into(), json!({ "files": recs.len(), "metrics": names }));
    }
    if let Some(p) = &inputs.warnings {
        let recs = load_warnings(p)?;
        let files = aggregate_warnings_to_files(&recs);
        let total: u64 = recs.iter().map(|r| r.counts.total()).sum();
        println!(
            "warnings: {} classes in {} files, {} issues",
            recs.len(),
            files.len(),
            total
        );
        report.insert(
            "warnings".into(),
            json!({ "classes": recs.len(), "files": files.len(), "issues": total }),
        );
    }
    if let Some(p) = &inputs.change_log {
        let recs = load_changes(p)?;
        let fixes = recs
            .iter()
            .filter(|c| cfg.build.defect_pattern.is_defect_fix(&c.message))
            .count();
        let touched = defect_fix_files(&recs, &cfg.build.defect_pattern).len();
        println!(
            "change log: {} changes, {fixes} defect fixes touching {touched} files",
            recs.len()
        );
        report.insert(
            "change_log".into(),
            json!({ "changes": recs.len(), "defect_fixes": fixes, "defect_fix_files": touched }),
        );
    }
    write_json(&cfg.output_dir().join("reports").join("ingest.json"), &report)
}

fn build_error(e: BuildError) -> CliError {
    match e {
        BuildError::InvalidGlob { .. } | BuildError::EmptyRule | BuildError::InvalidPattern(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Precondition(other.to_string()),
    }
}

pub fn build(cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.seed()?;
    let fm = load_file_metrics(required(&cfg.inputs.file_metrics, "file_metrics")?)?;
    let cw = load_warnings(required(&cfg.inputs.warnings, "warnings")?)?;
    let ch = load_changes(required(&cfg.inputs.change_log, "change_log")?)?;
    let out = build_datasets(&fm, &cw, &ch, &cfg.build).map_err(build_error)?;

    let dir = cfg.output_dir();
    for ds in &out.variants {
        let mix = ds.provenance.source_mix;
        write(&dir.join("datasets").join(format!("{}.csv", mix.slug())), &ds.to_csv())?;
        println!(
            "{mix}: {} records ({} defect-prone), {} features",
            ds.len(),
            ds.count(smellpred::Label::DefectProne),
            ds.n_features()
        );
    }
    write(
        &dir.join("datasets").join("combined_unfiltered.csv"),
        &out.unfiltered_combined.to_csv(),
    )?;
    write_json(&dir.join("reports").join("join_report.json"), &out.join)?;
    write_json(&dir.join("reports").join("filter_report.json"), &out.filter)?;
    println!(
        "generated-code filter removed {} of {} files; {} files unmatched across sources",
        out.filter.removed.len(),
        out.filter.input_files,
        out.join.unmatched_file_metrics.len() + out.join.unmatched_warnings.len()
    );
    Ok(())
}

pub fn balance(cfg: &PipelineConfig, input: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let ds = load_dataset(input)?;
    let smote_cfg = SmoteConfig { seed, ..cfg.smote };
    let outcome = smote(&ds, &smote_cfg).map_err(|e| CliError::Precondition(e.to_string()))?;
    let dir = cfg.output_dir();
    let path = output.unwrap_or_else(|| dir.join("datasets").join(format!("{}_smote.csv", stem(input))));
    write(&path, &outcome.dataset.to_csv())?;
    write_json(
        &dir.join("reports").join(format!("smote_{}.json", stem(input))),
        &outcome.report,
    )?;
    if outcome.report.k_clamped {
        log::warn!("k_neighbors reduced to {}", outcome.report.k_used);
    }
    println!(
        "added {} synthetic records; {} records written to {}",
        outcome.report.synthetic,
        outcome.dataset.len(),
        path.display()
    );
    Ok(())
}

fn selection_error(e: SelectionError) -> CliError {
    match e {
        SelectionError::InvalidConfig(_) => CliError::Input(e.to_string()),
        SelectionError::Classifier(ClassifierError::InvalidConfig(_)) => CliError::Input(e.to_string()),
        other => CliError::Precondition(other.to_string()),
    }
}

pub fn select(cfg: &PipelineConfig, input: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let ds = load_dataset(input)?;
    let s = &cfg.selection;
    let evaluator = WrapperEvaluator {
        classifier: s.classifier.with_seed(derive_seed(seed, 1)),
        split_fraction: s.split_fraction,
        seed: derive_seed(seed, 2),
        score: s.score,
    };
    let schedule = AnnealingSchedule {
        seed: derive_seed(seed, 3),
        ..s.annealing
    };
    let (mask, trace) = match s.method {
        FsMethod::None => (FeatureMask::all(ds.n_features()), json!(null)),
        FsMethod::Elimination => {
            let out = backward_elimination(&ds, &evaluator).map_err(selection_error)?;
            (
                out.selection.mask.clone(),
                serde_json::to_value(&out).expect("serializes"),
            )
        }
        FsMethod::Annealing => {
            let out = simulated_annealing_select(&ds, &evaluator, &schedule).map_err(selection_error)?;
            (
                out.selection.mask.clone(),
                serde_json::to_value(&out).expect("serializes"),
            )
        }
    };
    let names = mask.selected_names(&ds.feature_names);
    let method = s.method.to_string().to_lowercase();
    let dir = cfg.output_dir().join("reports");
    write_json(&dir.join(format!("selection_{method}.json")), &names)?;
    write_json(&dir.join(format!("selection_{method}_trace.json")), &trace)?;
    println!(
        "selected {} of {} features: {}",
        names.len(),
        ds.n_features(),
        names.join(", ")
    );
    Ok(())
}

pub fn experiment(cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.seed()?;
    let data = ExperimentData {
        without_smells: load_dataset(&dataset_path(
            cfg,
            &cfg.datasets.without_smells,
            SourceMix::FileMetricsOnly,
        ))?,
        with_smells: load_dataset(&dataset_path(cfg, &cfg.datasets.with_smells, SourceMix::Combined))?,
    };
    let report = run_experiment_matrix(&data, &cfg.plan).map_err(|e| CliError::Input(e.to_string()))?;
    let dir = cfg.output_dir().join("reports");
    write(&dir.join("experiment.csv"), &report.to_csv())?;
    write(&dir.join("experiment.json"), &(report.to_json() + "\n"))?;
    let Some(best) = report.best() else {
        return Err(CliError::TotalFailure(format!(
            "all {} experiment cells failed",
            report.failures.len()
        )));
    };
    println!(
        "{} cells, {} failed; best: {} smote={} fs={} smells={} f_measure={:.4} (tp={} fp={} tn={} fn={})",
        report.rows.len() + report.failures.len(),
        report.failures.len(),
        best.classifier,
        best.smote,
        best.feature_selection,
        best.smells,
        best.measures.f_measure,
        best.confusion.tp,
        best.confusion.fp,
        best.confusion.tn,
        best.confusion.fn_,
    );
    Ok(())
}

pub fn study(cfg: &PipelineConfig) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let ds = load_dataset(&dataset_path(cfg, &cfg.datasets.with_smells, SourceMix::Combined))?;
    if ds.provenance.source_mix != SourceMix::Combined {
        return Err(CliError::Precondition(
            "the study needs the combined dataset (file metrics and warning categories)".into(),
        ));
    }
    let subs = study_submodules(&ds, cfg.study.n_submodules, derive_seed(seed, 1)).map_err(build_error)?;
    let result = run_submodule_study(&subs, &cfg.study).map_err(|e| match e {
        StudyError::Build(b) => build_error(b),
        other => CliError::Precondition(other.to_string()),
    })?;
    let dir = cfg.output_dir().join("reports");
    write(&dir.join("study.csv"), &result.to_csv())?;
    write(&dir.join("study.json"), &(result.to_json() + "\n"))?;
    for c in &result.conditions {
        let fs = if c.feature_selection { "with FS" } else { "without FS" };
        match &c.summary {
            Some(s) => println!(
                "{} {fs}: accuracy {:.4} ± {:.4}, kappa {:.4} ± {:.4}, recall {:.4} ± {:.4}, f_measure {:.4} ± {:.4} ({} failed)",
                c.dataset,
                s.accuracy.mean,
                s.accuracy.std_dev,
                s.kappa.mean,
                s.kappa.std_dev,
                s.recall.mean,
                s.recall.std_dev,
                s.f_measure.mean,
                s.f_measure.std_dev,
                c.failures.len()
            ),
            None => println!("{} {fs}: every submodule failed", c.dataset),
        }
    }
    match result.empty_conditions() {
        0 => Ok(()),
        n => Err(CliError::TotalFailure(format!(
            "{n} study conditions had no successful submodule"
        ))),
    }
}

pub fn plot(
    cfg: &PipelineConfig,
    input: Option<PathBuf>,
    x: &str,
    y: &str,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    cfg.seed()?;
    let dir = cfg.output_dir().join("plots");
    let jobs: Vec<(PathBuf, PathBuf, String)> = match input {
        Some(p) => {
            let out = output.unwrap_or_else(|| dir.join(format!("{}_{x}_vs_{y}.svg", stem(&p))));
            let title = stem(&p);
            vec![(p, out, title)]
        }
        None => {
            let datasets = cfg.output_dir().join("datasets");
            vec![
                (
                    datasets.join("combined_unfiltered.csv"),
                    dir.join("before_filter.svg"),
                    "Before generated-code removal".into(),
                ),
                (
                    dataset_path(cfg, &cfg.datasets.with_smells, SourceMix::Combined),
                    dir.join("after_filter.svg"),
                    "After generated-code removal".into(),
                ),
            ]
        }
    };
    for (src, out, title) in jobs {
        let ds = load_dataset(&src)?;
        let svg = scatter_svg(&ds, x, y, &title).map_err(|e| CliError::Input(format!("{}: {e}", src.display())))?;
        write(&out, &svg)?;
        println!("{}: {} points", out.display(), ds.len());
    }
    Ok(())
}
