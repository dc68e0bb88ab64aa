use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("non-finite {what} at t = {at}")]
    NonFiniteAt { what: &'static str, at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} vanishes at positive argument t = {at}")]
    ZeroAtPositive { what: &'static str, at: f64 },

    #[error("could not bracket the Luxemburg norm within {0} doublings")]
    Bracketing(usize),

    #[error("domain discretization produced an empty mask")]
    EmptyMask,

    #[error("ball B({center:?}, {radius}) contains no masked cell")]
    EmptyBall { center: Vec<f64>, radius: f64 },

    #[error("mushroom placement overflow: {requested} requested, at most {max_feasible} fit on the face")]
    PlacementOverflow { requested: usize, max_feasible: usize },

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
