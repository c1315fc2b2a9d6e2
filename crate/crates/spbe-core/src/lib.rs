//! Structured equilibria of a non-myopic social-learning purchase game.
//!
//! `N` players share an unknown product value `V` in `{-1, +1}` and each holds
//! one binary signal that is wrong with probability `p`. Each turn a uniformly
//! chosen player may buy (earning the discounted value) or wait. A player's
//! strategy depends on history only through `(r, y, w)`: whether their own
//! signal is public, the sum of public signals, and how many players can no
//! longer reveal anything.
//!
//! - [`game`]: parameters, partial strategies, rewards and posteriors.
//! - [`solver`]: float fixed-point iteration producing a candidate profile.
//! - [`verifier`]: exact rational values and a sequential-rationality check.
//! - [`profiles`]: closed-form profiles and structural predicates.
//! - [`oracle`]: full-history beliefs, the per-player finite equations and
//!   Monte Carlo deviation tests for small `N`.
//! - [`cascade`]: revelation chains, exact cascade distributions and simulation.

pub mod cascade;
pub mod equations;
pub mod game;
pub mod oracle;
pub mod par;
pub mod profile;
pub mod profiles;
pub mod rational;
pub mod scalar;
pub mod solver;
pub mod verifier;

pub use game::{GameParams, Gamma, Signal};
pub use profile::{StrategyProfile, ValueTables};
pub use rational::Rational;
