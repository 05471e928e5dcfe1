use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("numerical instability at segment {segment}: {detail}; increase substeps")]
    NumericalInstability { segment: usize, detail: String },

    #[error("quadrature grid too narrow: edge density mass {edge_mass:.3e} exceeds 1e-4")]
    GridTooNarrow { edge_mass: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid lattice:\n{0}")]
    InvalidLattice(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
