//! Exact distribution of cascade outcomes conditional on `V`.
//!
//! Only turns where a free player acts can move `(y, w)`, so the game is
//! followed on the embedded chain of those turns. From `(y, w)` with
//! `w < N` the next free player's prescription decides the step: REVEAL goes
//! to `(y +/- 1, w + 1)`, WAIT starts a wait cascade, and BUY starts a buy
//! cascade when every later `w` at this `y` also buys. Reaching `w = N` is
//! exhaustion.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::cascade::{CascadeClass, CascadeDistribution};
use crate::game::{signal_likelihood, GameParams, Gamma, Signal};
use crate::profile::StrategyProfile;
use crate::rational::Rational;

/// Whether a free player at `(y, w)` starts a buy cascade.
pub fn buy_closed(profile: &StrategyProfile, y: i32, w: i32) -> bool {
    let n = profile.n() as i32;
    (w..=n).filter_map(|w2| profile.get(0, y, w2)).all(|g| g == Gamma::Buy)
}

#[derive(Debug, Clone)]
pub struct CascadeDp {
    pub plus: CascadeDistribution,
    pub minus: CascadeDistribution,
    /// Cells `(y, w)` with a BUY that does not persist in `w`; followed pathwise.
    pub non_closed_buy: Vec<(i32, i32)>,
}

impl CascadeDp {
    pub fn for_value(&self, v: Signal) -> &CascadeDistribution {
        match v {
            Signal::Plus => &self.plus,
            Signal::Minus => &self.minus,
        }
    }
}

fn conditional(
    profile: &StrategyProfile,
    params: &GameParams,
    v: Signal,
    non_closed: &mut Vec<(i32, i32)>,
) -> CascadeDistribution {
    let n = params.n_i32();
    let up = signal_likelihood(Signal::Plus, v, params);
    let down = signal_likelihood(Signal::Minus, v, params);
    let mut mass: BTreeMap<i32, Rational> = BTreeMap::from([(0, Rational::from_integer(1.into()))]);
    let mut dist = CascadeDistribution::empty(v);
    for w in 0..=n {
        let mut next: BTreeMap<i32, Rational> = BTreeMap::new();
        for (y, m) in mass {
            if m.is_zero() {
                continue;
            }
            if w == n {
                dist.record(CascadeClass::Exhaustion, w, m);
                continue;
            }
            let g = profile.get(0, y, w).unwrap_or(Gamma::Wait);
            match g {
                Gamma::Wait => dist.record(CascadeClass::WaitCascade, w, m),
                Gamma::Buy if buy_closed(profile, y, w) => dist.record(CascadeClass::BuyCascade, w, m),
                Gamma::Buy => {
                    if !non_closed.contains(&(y, w)) {
                        non_closed.push((y, w));
                    }
                    *next.entry(y).or_insert_with(Rational::zero) += m;
                }
                Gamma::Reveal => {
                    dist.expected_revelations += &m;
                    *next.entry(y + 1).or_insert_with(Rational::zero) += &m * &up;
                    *next.entry(y - 1).or_insert_with(Rational::zero) += m * &down;
                }
            }
        }
        mass = next;
    }
    dist
}

pub fn exact_cascade_dp(profile: &StrategyProfile, params: &GameParams) -> CascadeDp {
    let mut non_closed_buy = Vec::new();
    let plus = conditional(profile, params, Signal::Plus, &mut non_closed_buy);
    let minus = conditional(profile, params, Signal::Minus, &mut non_closed_buy);
    non_closed_buy.sort();
    CascadeDp { plus, minus, non_closed_buy }
}
