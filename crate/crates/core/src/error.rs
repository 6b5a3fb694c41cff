use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("vectors are collinear (|overlap| = {overlap}); no orthogonal residual exists")]
    Collinear { overlap: f64 },

    #[error("{name} = {value} is outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("identical states clone ideally; relative error undefined")]
    IdenticalStates,

    #[error("ideal output is degenerate (no component along s⊗s)")]
    DegenerateIdeal,

    #[error("projector basis is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("empty vector")]
    Empty,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn out_of_domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::OutOfDomain {
            name,
            value,
            domain,
        }
    }
}
