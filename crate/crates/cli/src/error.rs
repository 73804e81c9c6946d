use std::path::PathBuf;

use pdx_core::PdxError;
use thiserror::Error;

use crate::config::{ConfigErrors, ExperimentKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error("{experiment} failed while {stage}: {source}")]
    Stage {
        experiment: ExperimentKind,
        stage: &'static str,
        #[source]
        source: PdxError,
    },

    #[error("`{command}` does not run {experiment}; it runs {expected}")]
    WrongCommand {
        command: &'static str,
        experiment: ExperimentKind,
        expected: String,
    },

    #[error("refusing to emit a report with no experiments: nothing was run, so there is nothing to record")]
    EmptyReport,

    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Annotates a core error with the experiment stage it came from.
pub(crate) fn at(experiment: ExperimentKind, stage: &'static str) -> impl Fn(PdxError) -> CliError {
    move |source| CliError::Stage { experiment, stage, source }
}
