use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two alternatives attain the maximum for one atom, so the choice is not
    /// well defined at this utility point.
    #[error("atom {atom} has tied maximizers at u = [{point}]")]
    ArgmaxTie { atom: usize, point: String },

    #[error("grid has no {k}-maximal point")]
    NoKMaximalPoint { k: usize },

    #[error("alternative {k} is considered by every atom")]
    FullConsideration { k: usize },

    /// The declared atom family cannot reproduce the observed field.
    #[error("atom family cannot reproduce the choice-probability field")]
    Infeasible,

    #[error("covariate grid is not a Cartesian product")]
    NotCartesianProduct,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn tie<T: crate::Scalar>(atom: usize, u: &[T]) -> Self {
        Error::ArgmaxTie { atom, point: u.iter().map(|x| x.repr()).collect::<Vec<_>>().join(", ") }
    }
}
