use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unknown example {0:?} (see `gift list`)")]
    UnknownExample(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerical(gift_core::Error),
}

impl From<gift_core::Error> for CliError {
    fn from(e: gift_core::Error) -> Self {
        use gift_core::Error as E;
        match e {
            E::UnknownExample(n) => CliError::UnknownExample(n),
            E::Parse(m) | E::InvalidParams(m) => CliError::ConfigParse(m),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    /// Process exit code: 2 for unusable input, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigParse(_) => "ConfigParse",
            CliError::UnknownExample(_) => "UnknownExample",
            CliError::Io(_) => "Io",
            CliError::Numerical(_) => "Numerical",
        }
    }
}
