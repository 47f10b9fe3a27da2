//! File formats, configuration, window cache, reporting and the experiment
//! harness around `coarse-cut-core`.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod format;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] coarse_cut_core::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cache object {expected} hashes to {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
