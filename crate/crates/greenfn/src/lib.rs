//! Config-driven experiment runner on top of [`greenfn_core`]: TOML configs,
//! task execution, CSV/JSON artifacts and the canonical reproduction runs.
//!
//! Every task returns a [`tasks::RunOutput`] (named artifacts plus a JSON
//! summary) and [`output::write_run`] stores it together with a manifest.
//! Outputs depend only on the config and seed.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod reproduce;
pub mod tasks;

pub use config::{ExperimentConfig, Task};

/// Failure of a run, mapped to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical abort at step {step}: {reason}")]
    Numerical { step: usize, reason: String },
    #[error(transparent)]
    Core(greenfn_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<greenfn_core::Error> for RunError {
    fn from(e: greenfn_core::Error) -> Self {
        match e {
            greenfn_core::Error::Config(m) | greenfn_core::Error::Dimension(m) => RunError::Config(m),
            greenfn_core::Error::NumericalAbort { step, reason } => RunError::Numerical { step, reason },
            other => RunError::Core(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            _ => 1,
        }
    }
}

/// Builds the global thread pool from `GREENFN_THREADS` if it is set.
pub fn init_threads() -> Result<(), RunError> {
    if let Ok(v) = std::env::var("GREENFN_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| RunError::Config(format!("GREENFN_THREADS must be an integer, got `{v}`")))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let numerical: RunError = greenfn_core::Error::NumericalAbort {
            step: 3,
            reason: "nan".into(),
        }
        .into();
        assert_eq!(numerical.exit_code(), 3);
        let config: RunError = greenfn_core::Error::Config("x".into()).into();
        assert_eq!(config.exit_code(), 2);
        assert_eq!(RunError::Io(std::io::Error::other("disk")).exit_code(), 1);
    }
}
