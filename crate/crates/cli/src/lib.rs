//! Command implementations behind the `gpdd` binary: basis table emission,
//! accuracy/cost sweeps, and the verification suite. The binary is a thin
//! argument parser over these functions so tests can drive them directly.

pub mod basis;
pub mod config;
pub mod sweep;
pub mod verify;

use gpdd_core::gpce::GpceError;
use gpdd_core::gpdd::GpddError;
use gpdd_core::measure::MeasureError;
use gpdd_core::orthopoly::OrthoError;

/// Process exit codes: 0 success, 1 usage/config, 2 numerical failure,
/// 3 verification failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field '{field}': {message}")]
    Config { field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {failures} of {total} checks")]
    Verification { failures: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::Verification { .. } => EXIT_VERIFICATION,
        }
    }
}

impl From<OrthoError> for CliError {
    fn from(e: OrthoError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GpddError> for CliError {
    fn from(e: GpddError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GpceError> for CliError {
    fn from(e: GpceError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Run a closure on a rayon pool with the requested thread count
/// (0 = library default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
        .install(f)
}
