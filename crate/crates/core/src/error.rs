use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} has degree {degree}, exceeding the bound {bound}")]
    DegreeBoundExceeded {
        vertex: usize,
        degree: usize,
        bound: usize,
    },

    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonpositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("bad family or operation parameters: {0}")]
    BadParams(String),

    #[error("vertex {vertex} out of range (graph has {vertex_count} vertices)")]
    InvalidVertex { vertex: usize, vertex_count: usize },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is not connected")]
    Disconnected,

    #[error("matrix is not symmetric: |M[{i},{j}] - M[{j},{i}]| = {deviation:e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("matrix is not a positive contraction: eigenvalue {eigenvalue} outside [0, 1]")]
    NotContraction { eigenvalue: f64 },

    #[error("label restriction set is empty")]
    EmptyLabelSet,

    #[error("pivot at element {element} is {pivot:e}, below the independence threshold")]
    PivotTooSmall { element: usize, pivot: f64 },

    #[error("condition pair is not permitted: {side} Gram matrix has minimum eigenvalue {min_eigenvalue:e}")]
    NotPermitted {
        side: &'static str,
        min_eigenvalue: f64,
    },

    #[error("ground set has {size} elements, above the enumeration guard of {max}")]
    GroundSetTooLarge { size: usize, max: usize },

    #[error("invalid radius: {0}")]
    InvalidRadius(String),

    #[error("ball has {size} vertices, above the isomorphism-search cap of {max}")]
    BallTooLarge { size: usize, max: usize },

    #[error("numerical guard violated: {0}")]
    NumericalGuard(String),

    #[error("value {0} outside [0, 1] beyond the clipping tolerance")]
    OutOfRange(f64),

    #[error("{path}:{line}: {message}")]
    ParseGraph {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message} (offset {offset})")]
    ParseKernel {
        path: String,
        offset: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
