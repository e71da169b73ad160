use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frame is rank deficient (smallest relative singular value {0:e})")]
    RankDeficient(f64),
    #[error("frame is not Lagrangian (isotropy residual {0:e})")]
    NotLagrangian(f64),
    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),
    #[error("no crossing at t = {0}")]
    NoCrossing(f64),
    #[error("non-regular crossing at t = {0}")]
    NonRegularCrossing(f64),
    #[error("eigenphase tracking ambiguous near t = {0}")]
    TrackingAmbiguity(f64),
    #[error("unresolved crossing cluster near t = {0}")]
    UnresolvedCrossing(f64),
    #[error("Legendre condition fails at t = {t}: smallest eigenvalue of P is {min_eigenvalue:e}")]
    Legendre { t: f64, min_eigenvalue: f64 },
    #[error("degenerate Hamiltonian: {0}")]
    DegenerateHamiltonian(String),
    #[error("integration did not reach tolerance: {0}")]
    Integration(String),
    #[error("not a brake problem: {0}")]
    NotBrake(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
