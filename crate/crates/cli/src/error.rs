use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] treeshift::Error),
}

impl CliError {
    /// 2 for anything that prevented the computation, 3 when a budget cap was hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
