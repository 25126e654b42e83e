use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by every stage of the pipeline.
///
/// The variants are grouped so a driver can map them onto stable exit
/// codes: input problems, configuration problems, and numerical failures.
#[derive(Debug, Error)]
pub enum TermError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path} at line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("label error in {path} at line {line}: {0:?} is not a BIO tag", .tag)]
    Label {
        path: PathBuf,
        line: usize,
        tag: String,
    },

    #[error("empty corpus: {path} contains no sentences")]
    EmptyCorpus { path: PathBuf },

    #[error("parallel corpus length mismatch: {src_path} has {src_lines} lines, {tgt_path} has {tgt_lines}")]
    AlignmentLength {
        src_path: PathBuf,
        src_lines: usize,
        tgt_path: PathBuf,
        tgt_lines: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("training data error: {0}")]
    TrainingData(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("model file error: {0}")]
    ModelFile(String),
}

impl TermError {
    /// Stable process exit code for this error class.
    /// 2 = input error, 3 = config error, 4 = numerical error.
    pub fn exit_code(&self) -> i32 {
        match self {
            TermError::Config(_) => 3,
            TermError::Numerical(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, TermError>;
