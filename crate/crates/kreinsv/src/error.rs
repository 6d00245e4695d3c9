use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("ellipticity violated: {0}")]
    Ellipticity(String),
    /// The interaction does not leave 0 in the resolvent set at `mode`.
    /// `min_shift` is the smallest m₀ that restores it, when one exists.
    #[error("not admissible at mode {mode}: {reason}")]
    Admissibility {
        mode: usize,
        reason: String,
        min_shift: Option<f64>,
    },
    #[error("{0} overflows in unscaled form; use the scaled variant")]
    Overflow(&'static str),
    #[error("{0} underflows to zero")]
    Underflow(&'static str),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}
