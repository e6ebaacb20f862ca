use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension too small for quadratic operators: dim = {0}, need at least 4")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { what: &'static str, deviation: f64 },

    #[error("dissipation matrix not Hermitian (max deviation {0:e})")]
    DissipationNotHermitian(f64),

    #[error("Hermitian double-commutator form requires Hermitian Lindbladians (channel {0})")]
    NonHermitianLindbladian(usize),

    #[error("unstable potential: k({t}) = {k} is not positive")]
    UnstablePotential { t: f64, k: f64 },

    #[error("complete positivity violated: requires dk/dt <= 0, found dk/dt = {kdot}{}", at(.t))]
    CpViolation { t: Option<f64>, kdot: f64 },

    #[error("step diverged, reduce dt (non-finite entries at t = {0})")]
    Diverged(f64),

    #[error("trace/Hermiticity renormalisation of {correction:e} at t = {t} exceeds 1e-8, reduce dt")]
    Renormalization { t: f64, correction: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("non-physical inputs: Γ has imaginary residue {0:e}")]
    NonPhysical(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn at(t: &Option<f64>) -> String {
    t.map_or_else(String::new, |t| format!(" at t = {t}"))
}
