//! Checking and searching for product decompositions.
//!
//! Exact verification decides `Σ_k w_k x_k⊗y_k⊗z_k = t` entrywise with no
//! tolerance. The numerical search runs alternating least squares; its output
//! can suggest decompositions but never enters a rank bound.

mod als;
mod verify;

pub use als::{
    als_search, numeric_rank_probe, warm_start_search, AlsConfig, AlsResult, ProbeRow,
    StopReason,
};
pub use verify::{
    verify_approx, verify_decomposition, verify_exact, VerificationResult, VerifyMode,
};
