use thiserror::Error;

use crate::geometry::Point2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level set `{name}` is not finite at ({}, {})", point.x, point.y)]
    Evaluation { name: String, point: Point2 },

    #[error("unknown level set `{0}`")]
    UnknownLevelSet(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("invalid level-set expression: {0}")]
    Expression(String),

    /// The interface is not resolved by the mesh (an edge crossed more than
    /// the allowed number of times, or a triangle cut by more than one chord).
    #[error("mesh too coarse to resolve the interface: {0}")]
    MeshTooCoarse(String),

    #[error("quadrilateral {0:?} is not strictly convex")]
    NonConvexQuad([Point2; 4]),

    #[error("degenerate element: {0}")]
    DegenerateElement(String),

    #[error("mesh hierarchy is not nested: {0}")]
    NonNested(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
