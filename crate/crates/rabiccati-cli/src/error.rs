//! Error classification for exit codes: 0 success, 1 verification failure,
//! 2 usage/config error, 3 numerical failure.

use rabiccati::catalog::CatalogError;
use rabiccati::generator::GeneratorError;
use rabiccati::oracle::OracleError;
use rabiccati::quad::QuadError;
use rabiccati::riccati::RiccatiError;

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl AppError {
    pub fn usage(msg: &impl std::fmt::Display) -> AppError {
        AppError::Usage(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) => write!(f, "{msg}"),
            AppError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            AppError::Io(err) => write!(f, "i/o failure: {err}"),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(err: std::io::Error) -> Self {
        AppError::Io(err)
    }
}

impl From<QuadError> for AppError {
    fn from(err: QuadError) -> Self {
        AppError::Numerical(err.to_string())
    }
}

impl From<OracleError> for AppError {
    fn from(err: OracleError) -> Self {
        AppError::Numerical(err.to_string())
    }
}

impl From<GeneratorError> for AppError {
    fn from(err: GeneratorError) -> Self {
        match err {
            GeneratorError::Quad(e) => AppError::Numerical(e.to_string()),
            GeneratorError::PhaseSingularity { .. } => AppError::Numerical(err.to_string()),
            other => AppError::Usage(other.to_string()),
        }
    }
}

impl From<RiccatiError> for AppError {
    fn from(err: RiccatiError) -> Self {
        match err {
            RiccatiError::Quad(e) => AppError::Numerical(e.to_string()),
            RiccatiError::MovablePole { .. } | RiccatiError::PoleSignal { .. } => {
                AppError::Numerical(err.to_string())
            }
            other => AppError::Usage(other.to_string()),
        }
    }
}

impl From<CatalogError> for AppError {
    fn from(err: CatalogError) -> Self {
        match err {
            CatalogError::Quad(e) => AppError::Numerical(e.to_string()),
            CatalogError::Generator(e) => e.into(),
            other => AppError::Usage(other.to_string()),
        }
    }
}
