//! Likelihood of block-equicorrelated Gaussian data and the prior hierarchy
//! over cluster count, weights, assignments, pivotal angles and rates.

mod data;
mod likelihood;
mod posterior;
mod prior;
mod state;

pub use data::Dataset;
pub use likelihood::{
    block_log_likelihood, block_stats, implied_correlation, log_likelihood, log_likelihood_dense,
    BlockStats,
};
pub use posterior::{log_posterior, LogPosteriorTerms, Target};
pub use prior::{
    log_dirichlet_multinomial, log_nonempty_probabilities, log_prior_assignment, log_prior_lambda,
    log_prior_m, log_prior_q, log_prior_theta,
};
pub use state::{Assignment, Hyperparams, ModelState};
