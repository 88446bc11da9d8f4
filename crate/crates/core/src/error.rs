use thiserror::Error;

use crate::geometry::Vec3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite metric entries at ({:.6}, {:.6}, {:.6})", .point.x, .point.y, .point.z)]
    NonFiniteMetric { point: Vec3 },

    #[error("metric is singular at ({:.6}, {:.6}, {:.6})", .point.x, .point.y, .point.z)]
    SingularMetric { point: Vec3 },

    #[error("metric is not positive definite at ({:.6}, {:.6}, {:.6})", .point.x, .point.y, .point.z)]
    NotPositiveDefinite { point: Vec3 },

    #[error("speed drift {drift:.3e} exceeds budget {budget:.3e} at t = {t:.6}")]
    DriftExceeded { t: f64, drift: f64, budget: f64 },

    #[error("degenerate tangent c'(s) at s = {s:.6}")]
    DegenerateTangent { s: f64 },

    #[error("query point ({:.6}, {:.6}, {:.6}) is outside wavefront coverage (radius {radius:.3e})", .point.x, .point.y, .point.z)]
    Coverage { point: Vec3, radius: f64 },

    #[error("points or clouds belong to different backends")]
    BackendMismatch,

    #[error("no cut locus detected")]
    EmptyCloud,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("direction {index}: {source}")]
    Direction {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_direction(index: usize) -> impl FnOnce(Error) -> Error {
        move |source| Error::Direction {
            index,
            source: Box::new(source),
        }
    }

    /// Strips `Direction` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Direction { source, .. } => source.root(),
            other => other,
        }
    }
}
