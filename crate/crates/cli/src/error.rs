use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid RICLINK_WORKERS value `{0}`: expected a positive integer")]
    Workers(String),

    #[error(transparent)]
    Core(#[from] riclink::Error),
}
