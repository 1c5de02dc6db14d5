use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VStateError {
    #[error("gamma pole at non-positive integer {0}")]
    GammaPole(f64),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("near self-intersection: min H = {0:.3e}")]
    NearSelfIntersection(f64),
    #[error("boundary not m-fold: off-symmetry energy {0:.3e}")]
    NotMFold(f64),
    #[error("newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular jacobian (fold point?)")]
    SingularJacobian,
    #[error("no sign change in window [{0}, {1}]")]
    NoBracket(f64, f64),
    #[error("time step violates CFL bound: dt*max|u| = {0:.3e} > {1:.3e}")]
    Cfl(f64, f64),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for VStateError {
    fn from(e: std::io::Error) -> Self {
        VStateError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VStateError>;
