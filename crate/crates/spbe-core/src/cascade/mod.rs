//! Cascade analysis: the revelation chain, the exact onset DP and a forward
//! simulator.

mod chain;
mod dp;
mod sim;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::game::Signal;
use crate::rational::Rational;

pub use chain::{
    absorption, revelation_chain, up_from_posterior, up_probability, y_max_bound, Absorption, RevelationChain,
};
pub use dp::{buy_closed, exact_cascade_dp, CascadeDp};
pub use sim::{simulate, RunStats, SimConfig, SimulationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CascadeError {
    #[error("y = {0} lies outside the chain")]
    OutOfChain(i32),
    #[error("no absorbing state is reachable from y = {0}")]
    NotAbsorbing(i32),
    #[error("the bound is infinite at delta = 1")]
    DeltaOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CascadeClass {
    BuyCascade,
    WaitCascade,
    Exhaustion,
    NoneWithinHorizon,
}

impl CascadeClass {
    pub const ALL: [CascadeClass; 4] = [
        CascadeClass::BuyCascade,
        CascadeClass::WaitCascade,
        CascadeClass::Exhaustion,
        CascadeClass::NoneWithinHorizon,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CascadeClass::BuyCascade => "buy_cascade",
            CascadeClass::WaitCascade => "wait_cascade",
            CascadeClass::Exhaustion => "exhaustion",
            CascadeClass::NoneWithinHorizon => "none_within_horizon",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// A cascade that goes against the true value.
    pub fn is_bad(self, v: Signal) -> bool {
        matches!((self, v), (CascadeClass::BuyCascade, Signal::Minus) | (CascadeClass::WaitCascade, Signal::Plus))
    }
}

impl fmt::Display for CascadeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome distribution conditional on one value of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeDistribution {
    pub v: Signal,
    class_prob: [Rational; 4],
    /// Probability of each `(class, w at onset)`.
    pub onset: BTreeMap<(CascadeClass, i32), Rational>,
    pub expected_revelations: Rational,
}

impl CascadeDistribution {
    pub fn empty(v: Signal) -> Self {
        Self {
            v,
            class_prob: std::array::from_fn(|_| Rational::zero()),
            onset: BTreeMap::new(),
            expected_revelations: Rational::zero(),
        }
    }

    pub(crate) fn record(&mut self, class: CascadeClass, w: i32, mass: Rational) {
        self.class_prob[class.index()] += &mass;
        *self.onset.entry((class, w)).or_insert_with(Rational::zero) += mass;
    }

    pub fn probability(&self, class: CascadeClass) -> &Rational {
        &self.class_prob[class.index()]
    }

    pub fn total(&self) -> Rational {
        self.class_prob.iter().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn sums_to_one(&self) -> bool {
        self.total().is_one()
    }

    /// Probability of a buy or wait cascade.
    pub fn cascade_probability(&self) -> Rational {
        self.probability(CascadeClass::BuyCascade) + self.probability(CascadeClass::WaitCascade)
    }

    pub fn bad_probability(&self) -> Rational {
        CascadeClass::ALL.iter().filter(|c| c.is_bad(self.v)).fold(Rational::zero(), |a, &c| a + self.probability(c))
    }

    /// `P(onset class = class and w <= w_max)` for each onset `w` of the class.
    pub fn cumulative_onset(&self, class: CascadeClass) -> Vec<(i32, Rational)> {
        let mut acc = Rational::zero();
        self.onset
            .iter()
            .filter(|((c, _), _)| *c == class)
            .map(|((_, w), p)| {
                acc += p;
                (*w, acc.clone())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
