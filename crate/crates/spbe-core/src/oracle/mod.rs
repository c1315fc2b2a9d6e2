//! Brute-force checks for small `N` that work on full histories instead of
//! the aggregated `(r, y, w)` state.

pub mod belief;
pub mod deviation;
pub mod fpe2;

pub use belief::{bayes_update, check_belief_histories, private_posterior, BeliefCheck, HistoryState, JointBelief};
pub use deviation::{deviation_test, DeviationConfig, DeviationReport};
pub use fpe2::{fpe2_residual, Fpe2Error, Fpe2Report};
