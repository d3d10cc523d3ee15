//! Fatal command-line errors. Anything here exits with status 2; partial
//! per-instrument failures are recorded in the run manifest and exit with
//! status 1 instead.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no input images found")]
    EmptyDataset,
    #[error("required metadata field `{0}` has no values")]
    MissingField(String),
    #[error("unknown instrument id `{0}`")]
    UnknownId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ingest(#[from] morpho_core::ingest::IngestError),
    #[error(transparent)]
    Geometry(#[from] morpho_core::geometry::GeometryError),
    #[error(transparent)]
    Measure(#[from] morpho_core::measures::MeasureError),
    #[error(transparent)]
    Analysis(#[from] morpho_core::analysis::AnalysisError),
    #[error(transparent)]
    Tps(#[from] morpho_core::tps::TpsError),
    #[error(transparent)]
    Classify(#[from] morpho_core::classify::ClassifyError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::EmptyDataset => "EmptyDatasetError",
            CliError::MissingField(_) => "MissingFieldError",
            CliError::UnknownId(_) => "UnknownIdError",
            CliError::Io(_) => "IoError",
            CliError::Ingest(e) => e.kind(),
            CliError::Geometry(e) => e.kind(),
            CliError::Measure(e) => e.kind(),
            CliError::Analysis(e) => e.kind(),
            CliError::Tps(e) => e.kind(),
            CliError::Classify(e) => e.kind(),
        }
    }
}
