use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A phase-space point fell on (or too close to) an excluded hyperplane.
    #[error("singular point: coordinate x{coord} = {value} violates the domain guard of the system")]
    SingularPoint { coord: usize, value: f64 },

    /// Parameter validation failed for a catalog entry.
    #[error("invalid parameters for '{entry}': {message}")]
    InvalidParams { entry: String, message: String },

    /// An unknown catalog id was requested.
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),

    /// A sample set was empty or rank-deficient.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The adaptive integrator could not keep the local error bounded.
    #[error("step-size underflow at t = {t}: the problem appears stiff or singular")]
    Stiffness { t: f64 },

    /// A structural precondition was violated (wrong system form, etc.).
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
