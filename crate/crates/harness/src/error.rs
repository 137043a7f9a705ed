use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Solver(_) => 3,
            HarnessError::Io(_) => 4,
        }
    }
}

impl From<slpmm::Error> for HarnessError {
    fn from(e: slpmm::Error) -> Self {
        use slpmm::Error as E;
        match e {
            E::Input(_) | E::Contract(_) => HarnessError::Config(e.to_string()),
            E::Parse { .. } | E::Io(_) => HarnessError::Io(e.to_string()),
            E::Evaluation { .. } => HarnessError::Solver(e.to_string()),
        }
    }
}

impl From<slpmm::SolverError> for HarnessError {
    fn from(e: slpmm::SolverError) -> Self {
        match e {
            slpmm::SolverError::Config(inner) => HarnessError::Config(inner.to_string()),
            other => HarnessError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
