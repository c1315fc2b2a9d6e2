//! Model primitives: parameters, partial strategies, feasibility and the
//! closed-form rewards and posteriors.
//!
//! # Notation
//!
//! - `q = (1-p)/p` is the likelihood ratio of one signal.
//! - `y` is the sum of revealed signals, `w` the number of players who can no
//!   longer reveal (revealed or bought).
//! - An evaluating player with revealed flag `r` and private signal `x` has
//!   log-likelihood index `e = y + r + x` in base `q`.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("need at least one player")]
    NoPlayers,
    #[error("signal error p = {0} must lie strictly between 0 and 1/2")]
    BadSignalError(String),
    #[error("discount delta = {0} must lie in [0, 1]")]
    BadDiscount(String),
}

/// Game parameters. `q` is derived on construction and never set directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameParams {
    n: usize,
    p: Rational,
    delta: Rational,
    q: Rational,
}

impl GameParams {
    pub fn new(n: usize, p: Rational, delta: Rational) -> Result<Self, GameError> {
        if n == 0 {
            return Err(GameError::NoPlayers);
        }
        if p <= Rational::zero() || p >= rational::rat(1, 2) {
            return Err(GameError::BadSignalError(rational::format_rational(&p)));
        }
        if delta < Rational::zero() || delta > Rational::one() {
            return Err(GameError::BadDiscount(rational::format_rational(&delta)));
        }
        let q = (Rational::one() - &p) / &p;
        Ok(Self { n, p, delta, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_i32(&self) -> i32 {
        self.n as i32
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn with_delta(&self, delta: Rational) -> Result<Self, GameError> {
        Self::new(self.n, self.p.clone(), delta)
    }

    pub fn with_n(&self, n: usize) -> Result<Self, GameError> {
        Self::new(n, self.p.clone(), self.delta.clone())
    }

    pub fn delta_is_one(&self) -> bool {
        self.delta.is_one()
    }
}

/// A private signal, `-1` or `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    Minus,
    Plus,
}

impl Signal {
    pub const BOTH: [Signal; 2] = [Signal::Plus, Signal::Minus];

    pub fn value(self) -> i32 {
        match self {
            Signal::Minus => -1,
            Signal::Plus => 1,
        }
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            -1 => Some(Signal::Minus),
            1 => Some(Signal::Plus),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Signal::Plus => 0,
            Signal::Minus => 1,
        }
    }
}

/// Partial strategy of a player who has not bought: a map from their signal
/// to buy (1) or wait (0). Buying only on `-1` is dominated and left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gamma {
    Wait,
    Buy,
    Reveal,
}

impl Gamma {
    pub const ALL: [Gamma; 3] = [Gamma::Reveal, Gamma::Buy, Gamma::Wait];

    /// Action taken with signal `x`: 1 is buy, 0 is wait.
    pub fn action(self, x: Signal) -> u8 {
        match self {
            Gamma::Wait => 0,
            Gamma::Buy => 1,
            Gamma::Reveal => u8::from(x == Signal::Plus),
        }
    }

    /// Two-character code: the action for `x = -1` then for `x = +1`.
    pub fn code(self) -> &'static str {
        match self {
            Gamma::Wait => "00",
            Gamma::Buy => "11",
            Gamma::Reveal => "01",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "00" => Some(Gamma::Wait),
            "11" => Some(Gamma::Buy),
            "01" => Some(Gamma::Reveal),
            _ => None,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Gamma::Wait => "WAIT",
            Gamma::Buy => "BUY",
            Gamma::Reveal => "REVEAL",
        };
        f.write_str(name)
    }
}

pub fn likelihood_exponent(y: i32, r_self: u8, x: Signal) -> i32 {
    y + i32::from(r_self) + x.value()
}

/// `(q^e - 1)/(q^e + 1)`, the expected value of buying.
pub fn instant_reward<S: Scalar>(e: i32, params: &GameParams) -> S {
    let qe = rational::pow_signed(params.q(), e);
    let r = (&qe - Rational::one()) / (qe + Rational::one());
    S::from_rational(&r)
}

/// Probability that an unrevealed player holds `x_next`, given log-likelihood index `e`.
pub fn signal_posterior<S: Scalar>(x_next: Signal, e: i32, params: &GameParams) -> S {
    S::from_rational(&signal_posterior_exact(x_next, e, params))
}

pub(crate) fn signal_posterior_exact(x_next: Signal, e: i32, params: &GameParams) -> Rational {
    let qe = rational::pow_signed(params.q(), e);
    let p = params.p();
    let not_p = Rational::one() - p;
    let (given_minus, given_plus) = match x_next {
        Signal::Plus => (p.clone(), not_p),
        Signal::Minus => (not_p, p.clone()),
    };
    (given_minus + given_plus * &qe) / (Rational::one() + qe)
}

/// Public belief that `V = 1` after revealed sum `y`.
pub fn public_belief_v<S: Scalar>(y: i32, params: &GameParams) -> S {
    let qy = rational::pow_signed(params.q(), y);
    S::from_rational(&(&qy / (Rational::one() + &qy)))
}

/// `Q(x | v)`: signal likelihood given the product value.
pub fn signal_likelihood(x: Signal, v: Signal, params: &GameParams) -> Rational {
    if x == v {
        Rational::one() - params.p()
    } else {
        params.p().clone()
    }
}

/// Quadratic state after one action, `(z', r', y', w')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Updated {
    pub z: u8,
    pub r: u8,
    pub y: i32,
    pub w: i32,
}

pub fn apply_update(z: u8, r: u8, y: i32, w: i32, gamma: Gamma, a: u8) -> Updated {
    let reveal = gamma == Gamma::Reveal;
    let r2 = if r == 0 && reveal { 1 } else { r };
    let z2 = if z == 0 && (a == 1 || reveal) { 1 } else { z };
    let y2 = if z == 0 && reveal { y + 2 * i32::from(a) - 1 } else { y };
    let w2 = w + i32::from(z2) - i32::from(z);
    Updated { z: z2, r: r2, y: y2, w: w2 }
}

/// Whether a not-yet-bought acting player can face `(r, y, w)`.
///
/// With `r = 0` the player is not counted in `w`. With `r = 1` they are counted and their
/// own `-1` is part of `y`, so `y <= w - 2`.
pub fn is_feasible_acting(r: u8, y: i32, w: i32, n: usize) -> bool {
    let n = n as i32;
    if w < 0 || w > n || y.abs() > n {
        return false;
    }
    match r {
        0 => w < n && y.abs() <= w,
        1 => w >= 1 && -w <= y && y <= w - 2,
        _ => false,
    }
}

/// Whether a not-yet-bought, non-acting player with flag `r_tilde` can face
/// an acting player with flag `z` in `(y, w)`.
pub fn is_feasible_nonacting(r_tilde: u8, z: u8, y: i32, w: i32, n: usize) -> bool {
    let n = n as i32;
    if r_tilde > 1 || z > 1 || n < 2 || w > n || y.abs() > n {
        return false;
    }
    let rt = i32::from(r_tilde);
    let zz = i32::from(z);
    w >= rt + zz && w <= n - 2 + rt + zz && -w <= y && y <= w - 2 * rt
}

/// Cached powers of `q` and derived quantities in a chosen scalar.
#[derive(Debug, Clone)]
pub struct Kernel<S> {
    n: usize,
    offset: i32,
    reward: Vec<S>,
    post_plus: Vec<S>,
    delta: S,
    step: S,
    delta_is_one: bool,
    delta_is_zero: bool,
}

impl<S: Scalar> Kernel<S> {
    pub fn new(params: &GameParams) -> Self {
        Self::with_delta(params, params.delta())
    }

    /// Same kernel with a substitute discount (used by the solver at `delta = 1`).
    pub fn with_delta(params: &GameParams, delta: &Rational) -> Self {
        let offset = params.n_i32() + 3;
        let span = -offset..=offset;
        let reward = span.clone().map(|e| instant_reward(e, params)).collect();
        let post_plus = span.map(|e| signal_posterior(Signal::Plus, e, params)).collect();
        let step = delta / rational::int(params.n() as i64);
        Self {
            n: params.n(),
            offset,
            reward,
            post_plus,
            delta: S::from_rational(delta),
            step: S::from_rational(&step),
            delta_is_one: delta.is_one(),
            delta_is_zero: delta.is_zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reward(&self, e: i32) -> S {
        self.reward[(e + self.offset) as usize].clone()
    }

    pub fn posterior(&self, x_next: Signal, e: i32) -> S {
        let up = self.post_plus[(e + self.offset) as usize].clone();
        match x_next {
            Signal::Plus => up,
            Signal::Minus => S::one() - up,
        }
    }

    pub fn delta(&self) -> &S {
        &self.delta
    }

    /// `delta / N`.
    pub fn step(&self) -> &S {
        &self.step
    }

    pub fn delta_is_one(&self) -> bool {
        self.delta_is_one
    }

    pub fn delta_is_zero(&self) -> bool {
        self.delta_is_zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn params(n: usize, p: Rational, d: Rational) -> GameParams {
        GameParams::new(n, p, d).unwrap()
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(likelihood_exponent(-1, 0, Signal::Plus), 0);
        assert_eq!(likelihood_exponent(0, 0, Signal::Plus), 1);
        assert_eq!(likelihood_exponent(1, 1, Signal::Minus), 1);
    }

    #[test]
    fn reward_examples() {
        let g = params(3, rat(1, 10), int(0));
        assert_eq!(instant_reward::<Rational>(0, &g), int(0));
        assert_eq!(instant_reward::<Rational>(1, &g), rat(4, 5));
        assert_eq!(instant_reward::<Rational>(-2, &g), rat(-40, 41));
        let g = params(3, rat(1, 4), int(0));
        assert_eq!(instant_reward::<Rational>(0, &g), int(0));
    }

    #[test]
    fn posterior_examples() {
        let g = params(3, rat(1, 10), int(0));
        assert_eq!(signal_posterior::<Rational>(Signal::Plus, 0, &g), rat(1, 2));
        assert_eq!(signal_posterior::<Rational>(Signal::Plus, 1, &g), rat(41, 50));
        assert_eq!(signal_posterior::<Rational>(Signal::Plus, -1, &g), rat(9, 50));
    }

    #[test]
    fn update_examples() {
        assert_eq!(apply_update(0, 0, 0, 0, Gamma::Reveal, 1), Updated { z: 1, r: 1, y: 1, w: 1 });
        assert_eq!(apply_update(1, 1, 3, 5, Gamma::Reveal, 0), Updated { z: 1, r: 1, y: 3, w: 5 });
        assert_eq!(apply_update(0, 0, 2, 4, Gamma::Buy, 1), Updated { z: 1, r: 0, y: 2, w: 5 });
    }

    #[test]
    fn belief_examples() {
        let g = params(3, rat(1, 10), int(0));
        assert_eq!(public_belief_v::<Rational>(0, &g), rat(1, 2));
        assert_eq!(public_belief_v::<Rational>(2, &g), rat(81, 82));
        let g = params(3, rat(1, 4), int(0));
        assert_eq!(public_belief_v::<Rational>(-1, &g), rat(1, 4));
    }

    #[test]
    fn feasibility_examples() {
        for n in 2..8 {
            assert!(!is_feasible_acting(0, 0, n as i32, n));
            assert!(is_feasible_acting(1, -1, 1, n));
            assert!(!is_feasible_nonacting(0, 0, 0, n as i32 - 1, n));
        }
    }

    #[test]
    fn params_validation() {
        assert!(GameParams::new(0, rat(1, 10), int(0)).is_err());
        assert!(GameParams::new(2, rat(1, 2), int(0)).is_err());
        assert!(GameParams::new(2, int(0), int(0)).is_err());
        assert!(GameParams::new(2, rat(1, 10), rat(11, 10)).is_err());
        assert_eq!(params(2, rat(2, 5), int(1)).q(), &rat(3, 2));
    }

    #[test]
    fn gamma_codes() {
        for g in Gamma::ALL {
            assert_eq!(Gamma::from_code(g.code()), Some(g));
        }
        assert_eq!(Gamma::from_code("10"), None);
        assert_eq!(Gamma::Reveal.action(Signal::Plus), 1);
        assert_eq!(Gamma::Reveal.action(Signal::Minus), 0);
    }

    #[test]
    fn kernel_matches_free_functions() {
        let g = params(5, rat(2, 5), rat(1, 2));
        let k = Kernel::<Rational>::new(&g);
        for e in -7..=7 {
            assert_eq!(k.reward(e), instant_reward::<Rational>(e, &g));
            for x in Signal::BOTH {
                assert_eq!(k.posterior(x, e), signal_posterior::<Rational>(x, e, &g));
            }
        }
        assert_eq!(k.step(), &rat(1, 10));
    }
}
