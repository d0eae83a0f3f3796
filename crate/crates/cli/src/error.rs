use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<fcsmm::Error> for CliError {
    fn from(e: fcsmm::Error) -> Self {
        use fcsmm::Error as E;
        match e {
            E::Spec(_) | E::ParameterDomain { .. } => CliError::Config(e.to_string()),
            E::Domain(_) | E::Dimension(_) => CliError::Data(e.to_string()),
            E::Numerical(_) | E::FitNonConvergence { .. } | E::Singular(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
