use thiserror::Error;

use crate::petviashvili::IterationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: grid has {expected} nodes, got {got} values")]
    LengthMismatch { expected: usize, got: usize },

    #[error("spectrum is not conjugate-symmetric: imaginary residue {residue:.3e} exceeds {limit:.3e}")]
    Symmetry { residue: f64, limit: f64 },

    #[error("unsupported derivative order {0} (expected 1..=4)")]
    UnsupportedOrder(u32),

    #[error("u^(p+1) undefined for negative u = {value:.6e} with non-integer p = {p}")]
    Domain { value: f64, p: f64 },

    #[error("solution blew up at t = {t} (step {step}): max|u| = {max_abs:.3e} exceeds {bound:.3e}")]
    Instability { t: f64, step: usize, max_abs: f64, bound: f64 },

    #[error("stabilizing factor denominator degenerate: |den| = {denominator:.3e}, |num| = {numerator:.3e}")]
    DegenerateFactor { numerator: f64, denominator: f64 },

    #[error("iteration overflow at iteration {iteration}: max|Q| = {max_abs:.3e}")]
    Overflow { iteration: usize, max_abs: f64 },

    #[error("Petviashvili iteration did not converge in {} iterations", history.len())]
    NonConvergence { history: Vec<IterationRecord> },

    #[error("elliptic modulus {0} outside [0, 1)")]
    Modulus(f64),

    #[error("pole at xi = {xi}")]
    Pole { xi: f64 },

    #[error("case {case}: {message}")]
    CaseConstraint { case: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
