use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("PDE order {0} has no closed-form projection filter (supported: 1, 2)")]
    UnsupportedOrder(usize),

    #[error("boundary constraint leaves an empty null space; the kernel inequality is vacuous")]
    EmptyNullSpace,

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("spectral abscissa did not converge for collocation orders up to {max_order} (last change {last_change:.3e})")]
    OracleNotConverged { max_order: usize, last_change: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}
