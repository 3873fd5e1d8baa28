use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow while evaluating {0}")]
    Overflow(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("design function has no sign change on [{lo}, {hi}] (a.u.)")]
    NoRoot { lo: f64, hi: f64 },

    #[error("bands {bands:?} touch their complement (gap {gap:e} at k = {k})")]
    GapCollapse { bands: Vec<usize>, gap: f64, k: f64 },

    #[error("geometry does not match a supported cell pattern: {0}")]
    PatternMismatch(String),

    #[error("triangle design violated: |V(t2) - V(2 t2)| / |V(t2)| = {relative:.4} exceeds {limit}")]
    TriangleDesign { relative: f64, limit: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}
