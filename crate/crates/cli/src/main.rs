mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad configuration (exit 2).
    Input(String),
    /// The data does not meet a pipeline precondition (exit 3).
    Precondition(String),
    /// Every experiment cell, or a whole study condition, failed (exit 4).
    TotalFailure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::TotalFailure(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Precondition(m) | CliError::TotalFailure(m) => f.write_str(m),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "smellpred",
    version,
    about = "Defect prediction from code metrics and static-analysis warnings"
)]
struct Cli {
    /// Worker threads for parallel cells (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More diagnostics on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (reports go under datasets/, reports/, plots/).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config field, e.g. `--set plan.forest.n_trees=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    file_metrics: Option<PathBuf>,
    #[arg(long)]
    warnings: Option<PathBuf>,
    #[arg(long)]
    change_log: Option<PathBuf>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, Value)> {
        let mut f = Vec::new();
        if let Some(s) = self.seed {
            f.push(("seed", json!(s)));
        }
        if let Some(o) = &self.out {
            f.push(("output_dir", json!(o)));
        }
        if let Some(p) = &self.file_metrics {
            f.push(("inputs.file_metrics", json!(p)));
        }
        if let Some(p) = &self.warnings {
            f.push(("inputs.warnings", json!(p)));
        }
        if let Some(p) = &self.change_log {
            f.push(("inputs.change_log", json!(p)));
        }
        f
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic input corpus.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Parse and validate the three inputs.
    Ingest {
        #[command(flatten)]
        common: Common,
    },
    /// Build the labeled dataset variants.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Oversample the minority class of a dataset CSV with SMOTE.
    Balance {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV to balance.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (defaults to datasets/<stem>_smote.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Wrapper feature selection on a dataset CSV.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// elimination or annealing.
        #[arg(long)]
        method: Option<String>,
        /// naive_bayes, pnn or random_forest.
        #[arg(long)]
        classifier: Option<String>,
    },
    /// Run the classifier x SMOTE x selection x smells matrix.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Restrict to these classifiers (comma separated).
        #[arg(long, value_delimiter = ',')]
        classifiers: Vec<String>,
        /// Select features on the whole dataset instead of the training half.
        #[arg(long)]
        fs_on_full: bool,
    },
    /// Per-submodule evaluation of the six dataset/selection conditions.
    Study {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_submodules: Option<usize>,
        #[arg(long)]
        fs_on_full: bool,
    },
    /// Scatter plot of two metrics as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV; without it, plots the combined dataset before and
        /// after generated-code removal.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "loc")]
        x: String,
        #[arg(long, default_value = "total_issues")]
        y: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    }
    let load = |c: &Common, extra: Vec<(&'static str, Value)>| {
        let mut flags = c.flags();
        flags.extend(extra);
        config::load(c.config.as_deref(), &c.sets, flags)
    };
    match cli.command {
        Command::Synth { common } => commands::synth(&load(&common, vec![])?),
        Command::Ingest { common } => commands::ingest(&load(&common, vec![])?),
        Command::Build { common } => commands::build(&load(&common, vec![])?),
        Command::Balance { common, input, output } => commands::balance(&load(&common, vec![])?, &input, output),
        Command::Select {
            common,
            input,
            method,
            classifier,
        } => {
            let mut extra = Vec::new();
            if let Some(m) = method {
                let m: smellpred::selection::FsMethod = m.parse().map_err(CliError::Input)?;
                extra.push(("selection.method", json!(m)));
            }
            if let Some(c) = classifier {
                let k: smellpred::classifiers::ClassifierKind = c.parse().map_err(CliError::Input)?;
                extra.push(("selection.classifier.kind", json!(k)));
            }
            commands::select(&load(&common, extra)?, &input)
        }
        Command::Experiment {
            common,
            classifiers,
            fs_on_full,
        } => {
            let mut extra = Vec::new();
            if !classifiers.is_empty() {
                let kinds = classifiers
                    .iter()
                    .map(|c| c.parse::<smellpred::classifiers::ClassifierKind>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::Input)?;
                extra.push(("plan.classifiers", json!(kinds)));
            }
            if fs_on_full {
                extra.push(("plan.protocol.fs_on_full", json!(true)));
            }
            commands::experiment(&load(&common, extra)?)
        }
        Command::Study {
            common,
            n_submodules,
            fs_on_full,
        } => {
            let mut extra = Vec::new();
            if let Some(n) = n_submodules {
                extra.push(("study.n_submodules", json!(n)));
            }
            if fs_on_full {
                extra.push(("study.protocol.fs_on_full", json!(true)));
            }
            commands::study(&load(&common, extra)?)
        }
        Command::Plot {
            common,
            input,
            x,
            y,
            output,
        } => commands::plot(&load(&common, vec![])?, input, &x, &y, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
