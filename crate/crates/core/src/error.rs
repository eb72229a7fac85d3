use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid boundary operator: {0}")]
    InvalidOperator(String),

    /// Advection time outside the open window `(-τ₋, τ₊)`.
    #[error("advection time {t} leaves the domain: violates {violated} = {stay_time}")]
    OutsideStayWindow {
        t: f64,
        violated: &'static str,
        stay_time: f64,
    },

    #[error("point lies on the boundary; stay times there follow the trace convention")]
    BoundaryPoint,

    #[error("point lies outside the phase-space domain")]
    OutsideDomain,

    #[error("no finite backward exit from this boundary point")]
    NoBackwardExit,

    #[error("boundary point is not on the {expected} side")]
    WrongBoundarySide { expected: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("density has negative values; this operation requires f >= 0")]
    SignedDensity,

    #[error("quasi-interior requirement unmet: h is not strictly positive at boundary index {index}")]
    NotQuasiInterior { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
