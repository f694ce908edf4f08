//! Sampling and verification of `n` non-crossing paths above a hard wall
//! under geometrically growing area tilts.
//!
//! The discrete model lives on `W_i(k)`, `k = -T_N..=T_N`, with unit steps,
//! `0 <= W_n < ... < W_1`, and weight `exp(-N^{-3/2} sum_i sum_k
//! rho_i(k/N) W_i(k))`. Rescaled paths are `X_i(k/N) = W_i(k)/sqrt(N)`.

pub mod ensemble;
pub mod error;
pub mod exact;
pub mod heatbath;
pub mod io;
pub mod profile;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use ensemble::{
    compute_area, log_weight, BoundaryData, DiscretePathEnsemble, LatticeModel, PathEnsemble, TiltedEnsembleSpec,
};
pub use error::{Error, Result};
pub use heatbath::{
    boundary_prob, coupled_step, interior_prob, maximal_config, minimal_config, step, ChainState, Coupling,
    CouplingState, HeatBathKernel, Move,
};
pub use profile::{FloorCeiling, Potential, Profile};
pub use rng::{derive_seed, RngPosition, RngStream};
pub use sampler::{run_chain, Execution, SamplingPlan, Schedule};
pub use stats::{curved_max, plain_max, CurvedProfile, EmpiricalSummary};
