use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("gluing error: {0}")]
    Gluing(String),
    #[error("admissibility error: {0}")]
    Admissibility(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("points are not connected: {0}")]
    Disconnected(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("radius violates precondition: {0}")]
    Radius(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("empty domain")]
    EmptyDomain,
    #[error("time window rejected: {0}")]
    Window(String),
    #[error("problem too large: {0}")]
    Size(String),
    #[error("group is not amenable: {0}")]
    Amenability(String),
    #[error("time step too large: {0}")]
    Step(String),
    #[error("cover construction failed: {0}")]
    Construction(String),
    #[error("chain exceeded {0} balls")]
    ChainOverflow(usize),
    #[error("ill-defined term: {0}")]
    IllDefinedTerm(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("time {t} beyond validity horizon {horizon}")]
    Horizon { t: f64, horizon: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
