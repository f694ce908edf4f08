//! Airy-function numerics for area-tilted Brownian paths on the half line:
//! the real Airy function, its zeros, the Dirichlet eigen-system of
//! `(1/2) d^2/dx^2 - a x`, the associated heat kernel and partition
//! functions, and a finite-difference oracle for the same kernel.

pub mod function;
pub mod pde;
pub mod quad;
pub mod spectrum;
pub mod zeros;

pub use function::{airy_ai, airy_ai_deriv};
pub use pde::{pde_kernel_columns, pde_oracle, PdeColumn, PdeGrid};
pub use spectrum::{AirySpectrum, KernelEvaluation, TotalPartition};
pub use zeros::{airy_zero, airy_zeros};

#[derive(Debug, thiserror::Error)]
pub enum AiryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("zero index {index} beyond the supported range (< {limit})")]
    Range { index: usize, limit: usize },
    #[error("no sign change bracketing zero {index} in [{lo}, {hi}]")]
    Bracket { index: usize, lo: f64, hi: f64 },
    #[error("time {t} below the series floor {t_min}; use the PDE oracle for short times")]
    TimeTooSmall { t: f64, t_min: f64 },
    #[error("time step {dt} exceeds the positivity limit {max}")]
    StepSize { dt: f64, max: f64 },
    #[error("quadrature did not converge: value {value}, error {error} after {intervals} intervals")]
    Quadrature {
        value: f64,
        error: f64,
        intervals: usize,
    },
}
