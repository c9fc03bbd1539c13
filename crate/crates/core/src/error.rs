use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum NlkgError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("{what}: residual {value:.3e} exceeds tolerance {tol:.1e}")]
    Residual { what: String, value: f64, tol: f64 },
    #[error("degenerate mode basis: |det M| = {0:.3e}")]
    DegenerateBasis(f64),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("decomposition left the neighborhood: |z| = {0:.3e}")]
    LeftNeighborhood(f64),
    #[error("non-finite state at t = {0}")]
    Blowup(f64),
    #[error("shooting failed: {0}")]
    Shooting(String),
    #[error("io error: {0}")]
    Io(String),
}

impl NlkgError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            NlkgError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for NlkgError {
    fn from(e: std::io::Error) -> Self {
        NlkgError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NlkgError>;
