use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum KsError {
    #[error("config error: {0}")]
    Config(String),

    #[error("position outside the periodic box at particle {particle}")]
    PositionOutOfBox { particle: usize },

    #[error("non-finite drift at particle {particle} (field blowup or interpolation bug)")]
    NonFiniteDrift { particle: usize },

    #[error("non-Hermitian spectral field: imaginary residue {residue:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { residue: f64, tol: f64 },

    #[error("blowup detected at step {step}: {reason}")]
    Blowup { step: usize, reason: String },

    #[error("scale guard exceeded: {terms} mode-particle terms > {guard} (pass --force to override)")]
    ScaleGuard { terms: u128, guard: u128 },

    #[error("non-monotone CDF input")]
    NonMonotoneCdf,

    #[error("field vanished: sup-norm at the narrow cutoff is zero")]
    FieldVanished,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KsError>;
