//! Splitting, confusion matrices and measures, plus the experiment matrix
//! and the submodule study built on them.

mod matrix;
mod measures;
mod split;
mod study;

pub use matrix::{
    run_experiment_matrix, CellFailure, EvalProtocol, ExperimentData, ExperimentPlan, MatrixError, MatrixReport,
    PreparedSplit, RunResult, SmoteStage,
};
pub use measures::{confusion, measures, ConfusionMatrix, MeasureSet};
pub use split::{stratified_split, SplitError};
pub use study::{
    mean_std, run_submodule_study, study_submodules, ConditionResult, MeanStd, MeasureSummary, StudyConfig, StudyError,
    StudyResult, SubmoduleFailure, SubmoduleRun, SubmoduleVariants, MIN_SUBMODULE_RECORDS,
};
