//! Numerical toolkit for bipartite entanglement distillability.
//!
//! The crate builds Schmidt-rank-two witnesses that certify 1-distillability of
//! NPT states, constructs the two-qutrit edge-state family `σ(b, θ)` together
//! with the rank-5 NPT state `ρ = σ − ε|f,g⟩⟨f,g|` that admits no such witness,
//! and probes the n-copy bounds for the separable Werner projector.
//!
//! Module map:
//! - [`qcore`]: dense complex linear algebra and bipartite structure
//! - [`witness`]: certificates, the rank-2 optimizer and the constructive routes
//! - [`edgestate`]: the `σ(b, θ)` family and the undistillable construction
//! - [`multicopy`]: Werner projector bounds and ε(n) thresholds
//! - [`harness`]: random ensembles and verification suites

pub mod config;
pub mod edgestate;
pub mod error;
pub mod harness;
pub mod io;
pub mod multicopy;
pub mod qcore;
pub mod rng;
pub mod witness;

pub use config::ToleranceConfig;
pub use error::{DistillError, Result};
pub use qcore::{BipartiteDims, BipartiteState, CMatrix, CVector, PureState, SpectralData, C64};
