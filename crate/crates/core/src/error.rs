use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),

    #[error("{what} is not symmetric (defect {defect:.3e})")]
    NotSymmetric { what: &'static str, defect: f64 },

    #[error("{what} is not positive semidefinite (minimum eigenvalue {min_eig:.3e})")]
    NotPsd { what: &'static str, min_eig: f64 },

    #[error("real Schur iteration did not converge")]
    NoConvergence,

    #[error("eigenpair residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    EigenResidual { residual: f64, tol: f64 },

    #[error("eigenvector of eigenvalue {0} has a significant imaginary part")]
    ComplexEigenvector(Complex64),

    #[error("eigenvalue {0} lies on or too close to the imaginary axis")]
    ImaginaryAxis(Complex64),

    #[error("eigenvalue {0} is not numerically simple")]
    NotSimple(Complex64),

    #[error("Schur block swap rejected (coupling {0:.3e})")]
    SwapRejected(f64),

    #[error("stable invariant subspace has no graph form (smallest singular value of the upper block {0:.3e})")]
    SingularBasis(f64),

    #[error("matrix is not Hamiltonian (structure defect {0:.3e})")]
    NotHamiltonian(f64),

    #[error("inadmissible shift {delta}: {reason}")]
    InadmissibleShift { delta: f64, reason: String },

    #[error("only {available} admissible eigenvalues available, {requested} requested")]
    NotEnoughEigenvalues { available: usize, requested: usize },

    #[error("no candidate eigenvalue admits a realizable shift")]
    NoAdmissibleEigenvalue,

    #[error("could not draw an admissible shift after {0} attempts")]
    SamplingFailed(usize),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
