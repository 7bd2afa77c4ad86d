use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV file does not expose the expected columns.
    #[error("schema error in {path}: {message}")]
    Schema { path: String, message: String },

    /// A cell or line could not be parsed. `row` is the 1-based data row.
    #[error("parse error in {path}, row {row}: {message}")]
    Parse {
        path: String,
        row: usize,
        message: String,
    },

    /// Invalid arguments or an impossible experiment setup.
    #[error("configuration error: {0}")]
    Config(String),

    /// Well-formed input with values the pipeline cannot process.
    #[error("data error: {0}")]
    Data(String),

    /// A training set a classifier cannot be fitted on.
    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    /// Clustering could not produce the requested partition.
    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),

    /// AUC is undefined because the test labels contain a single class.
    #[error("auc undefined: test labels contain a single class")]
    UndefinedAuc,

    /// A meta-feature required by a recommendation model is missing.
    #[error("missing meta-feature: {0}")]
    MissingFeature(String),

    /// A serialized model file is unreadable or has the wrong version.
    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user-supplied input or configuration,
    /// as opposed to failures inside the pipeline.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::MissingFeature(_)
                | Error::ModelFormat(_)
        )
    }
}
