//! Reversible-jump sampler over cluster count, assignment, pivotal angles and
//! rates, plus posterior summaries.
//!
//! Births split one cluster's rate `λ_j` into `λ_j ∓ |τ|`, `τ ~ U(−π/4, π/4)`,
//! allocate its variables with [`SplitAllocation`] and draw the children's
//! angles from [`AngleProposal`]; deaths merge two clusters adjacent in rate.
//! Both moves are accepted on the posterior with the mixture weights `q`
//! integrated out, after which `q` is redrawn from its conditional. An
//! exchange move lets clusters trade places in the rate order.

mod chain;
mod kernels;
mod summary;

pub use chain::{
    initial_state, run_chain, run_chain_with, ChainConfig, ChainTrace, MoveCounters, MoveMix,
    TraceRecord,
};
pub use kernels::{
    merge_state, split_state, AngleProposal, Kernels, MoveStats, SplitAllocation, SPLIT_SHARPNESS,
    THETA_PROPOSAL_SD,
};
pub use summary::{summarize, ClusterResult, COCLUSTER_CUT};
