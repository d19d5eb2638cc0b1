use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A potential description could not be turned into a valid potential.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// The ODE integrator could not reach the requested tolerance.
    #[error("integrator failed to reach tolerance {target:e} at lambda = {lambda}; achieved {achieved:e}")]
    Accuracy {
        lambda: String,
        target: f64,
        achieved: f64,
    },

    /// The spectral parameter sits on (or too close to) a Dirichlet eigenvalue,
    /// where the sector monodromy matrix has a pole.
    #[error("lambda = {lambda} lies on the Dirichlet spectrum (|phi(1, lambda)| = {phi1:e})")]
    DirichletPole { lambda: String, phi1: f64 },

    /// A level outside [-5/4, 1] was requested.
    #[error("level {0} outside [-5/4, 1]; real roots are not guaranteed")]
    LevelRange(f64),

    /// Root labeling did not follow the expected interlacing pattern.
    #[error("labeling error: {0}")]
    Labeling(String),

    /// Band assembly found inconsistent data.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// A bracketing search failed.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// A precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
