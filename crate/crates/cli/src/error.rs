use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec error at {location}: {message}")]
    Spec { location: String, message: String },
    #[error("malformed input: {0}")]
    Input(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("generation failed: {0}")]
    Generation(#[from] mgpx::Error),
}

impl CliError {
    /// 2 for anything wrong with what the user handed in, 3 when the
    /// library fails on valid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec { .. } | CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Generation(_) => 3,
        }
    }
}
