//! Run configuration, the train/eval/ground/exec commands, the metrics
//! report and the session service.

mod config;
mod manifest;
mod pipeline;
mod report;
pub mod service;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::models::ModelError;
use crate::neural::NeuralError;
use crate::planner::PlanError;
use crate::semantics::SemanticsError;
use crate::world::WorldError;

pub use config::{RunConfig, SplitKind, CONFIG_KEYS};
pub use manifest::{sha256_hex, Manifest};
pub use pipeline::{
    checkpoint_path, cmd_eval, cmd_exec, cmd_gen_corpus, cmd_ground, cmd_train, load_corpus, load_map,
    load_model, CorpusSummary, ExecOutcome, TrainedRun,
};
pub use report::{Column, MetricsReport, ModelResult, SeedResult, Summary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for problems with the user's input, 2 for failures of the program itself.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Internal(_) => 2,
            HarnessError::Plan(PlanError::NotConverged { .. }) => 2,
            HarnessError::Semantics(SemanticsError::Plan(PlanError::NotConverged { .. })) => 2,
            HarnessError::Neural(e) | HarnessError::Model(ModelError::Neural(e)) => match e {
                NeuralError::Checkpoint(_) => 1,
                _ => 2,
            },
            HarnessError::Model(ModelError::Unsupported(_) | ModelError::TokenOutOfRange { .. }) => 2,
            _ => 1,
        }
    }
}
