use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid specs differ: {0}")]
    SpecMismatch(String),

    #[error("non-finite value {value} at node {node:?}")]
    NonFinite { node: Vec<f64>, value: f64 },

    #[error("imaginary residue {residue:e} exceeds {limit:e}; transform is inconsistent")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("spectrum is not conjugate-symmetric (max defect {defect:e}); request complex output instead")]
    NotConjugateSymmetric { defect: f64 },

    #[error("residual mass b = {b} violates 0 <= b <= 1/4")]
    MassOutOfRange { b: f64 },

    #[error("residual is negative ({value:e}) at node {node:?}")]
    NegativeResidual { node: Vec<f64>, value: f64 },

    #[error("series did not reach the L1 target {target:e} within {cap} terms (tail bound {achieved:e})")]
    TermCapExceeded {
        cap: usize,
        achieved: f64,
        target: f64,
    },

    #[error("|u^(k)| = {modulus} > 1/4 at k = {k:?}; enlarge the domain")]
    SpectrumTooLarge { k: Vec<f64>, modulus: f64 },

    #[error("square-root branch jump of {jump:e} between adjacent frequencies near k = {k:?}")]
    BranchDiscontinuity { k: Vec<f64>, jump: f64 },

    #[error("cannot take log of non-positive value {value:e} at |x| = {radius}; raise the floor or shrink the fit region")]
    NonPositiveInFit { radius: f64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
