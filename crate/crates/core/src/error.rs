use thiserror::Error;

use crate::mesh::AdmissibilityReport;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    /// One-based line number; 0 when the file is empty.
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinitePoint(usize),
    #[error("triangle {triangle} references a vertex outside 0..{nv}")]
    IndexOutOfRange { triangle: usize, nv: usize },
    #[error("triangle {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("generated element below quality floor (min angle {min_angle_deg:.2} deg, area {area:e})")]
    PoorQuality { min_angle_deg: f64, area: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh is not admissible: {}", .0.summary())]
    Inadmissible(Box<AdmissibilityReport>),
    #[error("parse error at {0}")]
    Parse(ParseError),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("local edge index {0} is not an edge of the triangle")]
    NotAnEdge(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("matrix dimensions do not match ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not numerically positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error(
        "interior solve did not converge (relative residual {residual:e} after {iterations} iterations)"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("requested {requested} eigenvalues but only {available} lie above the kernel cut")]
    TooManyRequested { requested: usize, available: usize },
    #[error("eigenvalue {value:e} at index {index} is at or below the kernel cut {cut:e}")]
    KernelMode { index: usize, value: f64, cut: f64 },
    #[error("certification unavailable: {0}")]
    CertificationUnavailable(String),
}

/// Failures of the end-to-end bound pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("mesh has no boundary triangles")]
    NoBoundaryGeometry,
    #[error("lambda_h1 lower estimate must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("report lengths do not match: {0}")]
    Mismatch(String),
}
