//! Revelation chain on `y`, observed at turns where a free player reveals.

use num_traits::{One, Zero};

use crate::cascade::CascadeError;
use crate::game::{signal_posterior, GameParams, Gamma, Signal};
use crate::profile::StrategyProfile;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct RevelationChain {
    pub y_min: i32,
    pub y_max: i32,
    /// `up[y - y_min]`; meaningful on transient states only.
    pub up: Vec<Rational>,
    pub absorbing: Vec<bool>,
    /// Rows whose free-player prescription mixes REVEAL with other choices across `w`.
    pub w_dependent: Vec<i32>,
}

impl RevelationChain {
    pub fn is_absorbing(&self, y: i32) -> bool {
        self.absorbing[(y - self.y_min) as usize]
    }

    pub fn up(&self, y: i32) -> &Rational {
        &self.up[(y - self.y_min) as usize]
    }

    pub fn absorbing_states(&self) -> Vec<i32> {
        (self.y_min..=self.y_max).filter(|&y| self.is_absorbing(y)).collect()
    }
}

/// `(p + (1-p) q^y)/(q^y + 1)`: probability the next revealed signal is `+1`.
pub fn up_probability(y: i32, params: &GameParams) -> Rational {
    let qy = rational::pow_signed(params.q(), y);
    let p = params.p();
    (p + (Rational::one() - p) * &qy) / (qy + Rational::one())
}

/// Chain for the free-player rows of `profile`, on the segment around `y = 0`
/// bounded by the nearest non-revealing rows. A row is transient when a free
/// player reveals there for some `w`; if that holds only for some `w` the row
/// is listed in `w_dependent` and the chain is valid only pathwise.
pub fn revelation_chain(profile: &StrategyProfile, params: &GameParams) -> RevelationChain {
    let n = params.n_i32();
    let row = |y: i32| -> (bool, bool) {
        let gs: Vec<Gamma> = (0..=n).filter_map(|w| profile.get(0, y, w)).collect();
        let reveal = gs.iter().filter(|&&g| g == Gamma::Reveal).count();
        (reveal > 0, reveal > 0 && reveal < gs.len())
    };
    let transient = |y: i32| row(y).0;
    let mut y_min = 0;
    while y_min > -n && transient(y_min) {
        y_min -= 1;
    }
    let mut y_max = 0;
    while y_max < n && transient(y_max) {
        y_max += 1;
    }
    let mut up = Vec::new();
    let mut absorbing = Vec::new();
    let mut w_dependent = Vec::new();
    for y in y_min..=y_max {
        let (t, mixed) = row(y);
        absorbing.push(!t);
        up.push(if t { up_probability(y, params) } else { Rational::zero() });
        if mixed {
            w_dependent.push(y);
        }
    }
    RevelationChain { y_min, y_max, up, absorbing, w_dependent }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Absorption {
    /// Hit probability of each absorbing state.
    pub hit: Vec<(i32, Rational)>,
    pub expected_steps: Rational,
}

/// Exact first-step solution from `start_y`.
pub fn absorption(chain: &RevelationChain, start_y: i32) -> Result<Absorption, CascadeError> {
    if start_y < chain.y_min || start_y > chain.y_max {
        return Err(CascadeError::OutOfChain(start_y));
    }
    if chain.is_absorbing(start_y) {
        return Ok(Absorption { hit: vec![(start_y, Rational::one())], expected_steps: Rational::zero() });
    }
    let mut lo = start_y;
    while lo > chain.y_min && !chain.is_absorbing(lo - 1) {
        lo -= 1;
    }
    let mut hi = start_y;
    while hi < chain.y_max && !chain.is_absorbing(hi + 1) {
        hi += 1;
    }
    let left = lo - 1;
    let right = hi + 1;
    if left < chain.y_min || right > chain.y_max {
        return Err(CascadeError::NotAbsorbing(start_y));
    }

    // Tridiagonal system on lo..=hi: u(y) - up u(y+1) - down u(y-1) = rhs(y).
    let solve = |rhs: &dyn Fn(i32) -> Rational, left_val: Rational, right_val: Rational| -> Vec<Rational> {
        let k = (hi - lo + 1) as usize;
        let mut diag = vec![Rational::one(); k];
        let mut upper = vec![Rational::zero(); k];
        let mut b: Vec<Rational> = (lo..=hi).map(rhs).collect();
        let lower: Vec<Rational> = (lo..=hi).map(|y| -(Rational::one() - chain.up(y))).collect();
        for (i, y) in (lo..=hi).enumerate() {
            upper[i] = -chain.up(y).clone();
        }
        b[0] = &b[0] - &lower[0] * &left_val;
        b[k - 1] = &b[k - 1] - &upper[k - 1] * &right_val;
        for i in 1..k {
            let f = &lower[i] / &diag[i - 1];
            diag[i] = &diag[i] - &f * &upper[i - 1];
            b[i] = &b[i] - &f * &b[i - 1];
        }
        let mut x = vec![Rational::zero(); k];
        x[k - 1] = &b[k - 1] / &diag[k - 1];
        for i in (0..k - 1).rev() {
            x[i] = (&b[i] - &upper[i] * &x[i + 1]) / &diag[i];
        }
        x
    };
    let at = |v: &[Rational]| v[(start_y - lo) as usize].clone();
    let p_right = at(&solve(&|_| Rational::zero(), Rational::zero(), Rational::one()));
    let steps = at(&solve(&|_| Rational::one(), Rational::zero(), Rational::zero()));
    let p_left = Rational::one() - &p_right;
    Ok(Absorption { hit: vec![(left, p_left), (right, p_right)], expected_steps: steps })
}

/// `1 + min{m >= 0 : q^m >= (1+delta)/(1-delta)}`, by integer power search.
pub fn y_max_bound(params: &GameParams) -> Result<i32, CascadeError> {
    if params.delta_is_one() {
        return Err(CascadeError::DeltaOne);
    }
    let one = Rational::one();
    let ratio = (&one + params.delta()) / (&one - params.delta());
    let mut m = 0;
    let mut qm = one;
    while qm < ratio {
        qm *= params.q();
        m += 1;
    }
    Ok(1 + m)
}

/// Up-probability identity check helper: `signal_posterior(+1, y)`.
pub fn up_from_posterior(y: i32, params: &GameParams) -> Rational {
    signal_posterior(Signal::Plus, y, params)
}
