use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("measure is concentrated in the closed hemisphere {{u : u.v >= 0}} with v = {witness:?}")]
    HemisphereConcentrated { witness: Vec<f64> },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("halfspaces do not bound a region: normals lie in the closed hemisphere with pole {witness:?}")]
    UnboundedWulff { witness: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation `{op}` is not supported in dimension {dim}")]
    UnsupportedDimension { op: &'static str, dim: usize },
    #[error("integrand is not finite at node {node}")]
    NonFiniteIntegrand { node: usize },
    #[error("support curve is not strictly convex at theta = {theta}: h'' + h = {value}")]
    NonConvexData { theta: f64, value: f64 },
    #[error("normal sets differ: {0}")]
    ShapeMismatch(String),
    #[error("comparison check not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no valid instance after {attempts} attempts")]
    GenerationFailed { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
