use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degeneracy overflow at shell {shell} of the {dimension}-dimensional oscillator")]
    DegeneracyOverflow { dimension: u32, shell: usize },

    #[error("statistics {kind} requires a total order (every block a singleton)")]
    KindOrderMismatch { kind: String },

    #[error("enumeration of {kind} states with n = {n_particles} below cutoff {mode_cutoff} would produce {count} states (capacity {capacity})")]
    Capacity { kind: String, n_particles: usize, mode_cutoff: usize, count: u128, capacity: u64 },

    #[error("spectrum and mode order are not aligned: {0}")]
    Alignment(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("rank-deficient least-squares system: {0}")]
    RankDeficient(String),

    #[error("invalid spectrum document at {location}: {message}")]
    SpectrumDocument { location: String, message: String },
}
