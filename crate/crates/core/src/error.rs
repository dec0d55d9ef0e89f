use thiserror::Error;

/// Errors raised by polygon construction, the solvers and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("TooFewVertices: a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("DuplicateVertex: vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("CollinearVertices: vertex {0} is collinear with its neighbours")]
    CollinearVertices(usize),
    #[error("NonConvex: {0}")]
    NonConvex(String),
    #[error("SingularMap: affine map has determinant {0}")]
    SingularMap(f64),
    #[error("NoConvergence: {0}")]
    NoConvergence(String),
    #[error("UnboundedCandidate: side lines {0:?} do not bound a polygon")]
    UnboundedCandidate(Vec<usize>),
    #[error("NoValidSubset")]
    NoValidSubset,
    #[error("TooManySides: {0} sides exceeds the enumeration cap of {1}")]
    TooManySides(usize, usize),
    #[error("SingularMatrix: precision matrix is not positive definite")]
    SingularMatrix,
    #[error("InvalidSizeVector: {0}")]
    InvalidSizeVector(String),
    #[error("EmptyInput")]
    EmptyInput,
    #[error("PointOutsidePolygon: point {index} lies outside the polygon")]
    PointOutsidePolygon { index: usize },
    #[error("TooLarge: {0}")]
    TooLarge(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Input errors come from bad data, numerical failures from the solvers,
    /// and guards from the cost caps.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence(_)
            | Error::SingularMatrix
            | Error::UnboundedCandidate(_)
            | Error::NoValidSubset => {
                ErrorKind::Numerical
            }
            Error::TooManySides(..) | Error::TooLarge(_) => ErrorKind::Guard,
            _ => ErrorKind::Input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Guard,
}

pub type Result<T> = std::result::Result<T, Error>;
