use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ray is tangential to the boundary (sin of incidence {sine:.3e})")]
    TangentialRay { sine: f64 },
    #[error("root solver did not converge in {operation}")]
    NoConvergence { operation: &'static str },
    #[error("point ({x}, {y}) is inside or on the curve")]
    PointInside { x: f64, y: f64 },
    #[error("chord is degenerate: {0}")]
    DegenerateChord(String),
    #[error("orbit hit vertex {vertex}")]
    VertexHit { vertex: usize },
    #[error("transverse line is parallel to the boundary")]
    NotTransverse,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("orbit terminated after {steps} steps")]
    Degenerate { steps: usize },
    #[error("{vanishing} of {total} samples have a vanishing envelope denominator")]
    DegenerateFamily { vanishing: usize, total: usize },
    #[error("envelope collapses to a point")]
    DegenerateEnvelope,
    #[error("sign change of the envelope speed straddles an undefined gap near sample {index}")]
    UnresolvedCusp { index: usize },
    #[error("curves are not nested: {0}")]
    NotNested(String),
    #[error("orbit is not invariant-curve-like (thickness {thickness:.3e})")]
    NotInvariant { thickness: f64 },
    #[error("expected exactly 2 fixed points, found {found}")]
    FixedPointCountMismatch { found: usize },
}
