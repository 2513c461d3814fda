//! Schmidt-rank-two witnesses of 1-distillability.
//!
//! A witness is a vector `ψ` of Schmidt rank at most two with
//! `⟨ψ|(ρ^{⊗n})^Γ|ψ⟩ < 0`. The constructive routes here produce such vectors
//! directly from the spectrum and kernel of `ρ`; [`min_rank2_expectation`] is
//! the generic multistart search used as a fallback and as a lower-bound probe.

mod certificate;
mod optimizer;
mod product;
mod routes;

pub use certificate::{verify_certificate, Route, WitnessCertificate};
pub use optimizer::{min_rank2_expectation, Rank2Ansatz, Rank2Minimum};
pub use product::{product_vector_in_subspace, ProductVector};
pub use routes::{
    certify_1_distillable, certify_n_copies, kernel_product_witness, submatrix_2x2_scan,
    two_nonpositive_from_pt, two_nonpositive_witness, Certification, SubmatrixWitness,
};
