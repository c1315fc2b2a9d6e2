//! Public belief over `(V, X^1..X^N)` on full histories.

use rand::Rng;

use crate::game::{GameParams, Gamma, Signal};
use crate::profile::StrategyProfile;
use crate::rational::{self, Rational};
use crate::scalar::Scalar;

/// Joint table `pi(v, x)`. Index: `v` (0 for `-1`, 1 for `+1`) times `2^N`
/// plus a bitmask with bit `m` set when `x^m = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBelief<S> {
    n: usize,
    table: Vec<S>,
}

fn bit(mask: usize, m: usize) -> Signal {
    if mask >> m & 1 == 1 {
        Signal::Plus
    } else {
        Signal::Minus
    }
}

fn v_of(slot: usize) -> Signal {
    if slot == 1 {
        Signal::Plus
    } else {
        Signal::Minus
    }
}

impl<S: Scalar> JointBelief<S> {
    /// Prior: `V` uniform and signals i.i.d. given `V`.
    pub fn prior(params: &GameParams) -> Self {
        Self::closed_form(&vec![0; params.n()], params)
    }

    /// Belief implied by revealed information `x_tilde` (entries in `{-1, 0, 1}`).
    pub fn closed_form(x_tilde: &[i8], params: &GameParams) -> Self {
        let n = x_tilde.len();
        let y: i32 = x_tilde.iter().map(|&v| i32::from(v)).sum();
        let qy = rational::pow_signed(params.q(), y);
        let one = rational::int(1);
        let pv_plus = &qy / (&one + &qy);
        let pv_minus = &one - &pv_plus;
        let mut table = Vec::with_capacity(2 << n);
        for slot in 0..2 {
            let v = v_of(slot);
            let pv = if slot == 1 { &pv_plus } else { &pv_minus };
            for mask in 0..1usize << n {
                let mut prob = pv.clone();
                for (m, &xt) in x_tilde.iter().enumerate() {
                    let x = bit(mask, m);
                    let factor = if xt != 0 {
                        if i32::from(xt) == x.value() {
                            one.clone()
                        } else {
                            rational::int(0)
                        }
                    } else {
                        crate::game::signal_likelihood(x, v, params)
                    };
                    prob *= factor;
                }
                table.push(S::from_rational(&prob));
            }
        }
        Self { n, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, v: Signal, x: &[Signal]) -> &S {
        let mask = x.iter().enumerate().fold(0usize, |acc, (m, s)| acc | (usize::from(*s == Signal::Plus) << m));
        let slot = usize::from(v == Signal::Plus);
        &self.table[(slot << self.n) + mask]
    }

    pub fn total(&self) -> S {
        self.table.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// `pi(V = v)`.
    pub fn marginal_v(&self, v: Signal) -> S {
        let slot = usize::from(v == Signal::Plus);
        self.table[slot << self.n..(slot + 1) << self.n].iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// `pi(X^m = x | V = v)`; zero when `pi(v)` is zero.
    pub fn conditional(&self, m: usize, x: Signal, v: Signal) -> S {
        let slot = usize::from(v == Signal::Plus);
        let pv = self.marginal_v(v);
        if pv.is_zero() {
            return S::zero();
        }
        let hit = (0..1usize << self.n)
            .filter(|&mask| bit(mask, m) == x)
            .map(|mask| self.table[(slot << self.n) + mask].clone())
            .fold(S::zero(), |a, b| a + b);
        hit / pv
    }

    /// Largest `|pi(v, x) - pi(v) prod_m pi(x^m | v)|`.
    pub fn factorization_residual(&self) -> S {
        let mut worst = S::zero();
        for slot in 0..2 {
            let v = v_of(slot);
            let pv = self.marginal_v(v);
            let cond: Vec<[S; 2]> = (0..self.n)
                .map(|m| [self.conditional(m, Signal::Plus, v), self.conditional(m, Signal::Minus, v)])
                .collect();
            for mask in 0..1usize << self.n {
                let mut prod = pv.clone();
                for (m, c) in cond.iter().enumerate() {
                    prod = prod * c[bit(mask, m).index()].clone();
                }
                let d = (self.table[(slot << self.n) + mask].clone() - prod).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.table.iter().zip(&other.table).map(|(a, b)| (a.clone() - b.clone()).abs()).fold(S::zero(), |a, b| {
            if b > a {
                b
            } else {
                a
            }
        })
    }
}

/// Bayes update after `actor` took action `a` under partial strategy `gamma`.
/// Each entry is weighted by whether `gamma(x^actor) = a`; if no entry
/// survives (an off-path action) the belief is left unchanged.
pub fn bayes_update<S: Scalar>(pi: &JointBelief<S>, gamma: Gamma, a: u8, actor: usize) -> JointBelief<S> {
    let n = pi.n;
    let mut table = Vec::with_capacity(pi.table.len());
    let mut total = S::zero();
    for (idx, p) in pi.table.iter().enumerate() {
        let x = bit(idx & ((1 << n) - 1), actor);
        let keep = gamma.action(x) == a;
        let v = if keep { p.clone() } else { S::zero() };
        total = total + v.clone();
        table.push(v);
    }
    if total.is_zero() {
        return pi.clone();
    }
    let table = table.into_iter().map(|v| v / total.clone()).collect();
    JointBelief { n, table }
}

/// Private belief that `V = 1` for a player holding `x` whose own revealed
/// information is `x_tilde_self`, given public sum `y`.
pub fn private_posterior(x: Signal, x_tilde_self: i8, y: i32, params: &GameParams) -> Rational {
    let qe = rational::pow_signed(params.q(), y - i32::from(x_tilde_self) + x.value());
    &qe / (rational::int(1) + &qe)
}

/// One on-path history of the full game, tracked as revealed information
/// and purchase flags.
#[derive(Debug, Clone)]
pub struct HistoryState {
    pub x_tilde: Vec<i8>,
    pub bought: Vec<bool>,
}

impl HistoryState {
    pub fn new(n: usize) -> Self {
        Self { x_tilde: vec![0; n], bought: vec![false; n] }
    }

    pub fn y(&self) -> i32 {
        self.x_tilde.iter().map(|&v| i32::from(v)).sum()
    }

    pub fn w(&self) -> i32 {
        self.x_tilde.iter().zip(&self.bought).filter(|(x, b)| **x != 0 || **b).count() as i32
    }

    /// Partial strategy the profile assigns to `actor` here.
    pub fn gamma(&self, profile: &StrategyProfile, actor: usize) -> Gamma {
        if self.bought[actor] {
            return Gamma::Wait;
        }
        let r = u8::from(self.x_tilde[actor] != 0);
        profile.get(r, self.y(), self.w()).unwrap_or(Gamma::Wait)
    }

    /// Applies action `a` under the partial strategy others attribute to the actor.
    pub fn apply(&mut self, actor: usize, gamma: Gamma, a: u8) {
        if gamma == Gamma::Reveal && self.x_tilde[actor] == 0 {
            self.x_tilde[actor] = if a == 1 { 1 } else { -1 };
        }
        if a == 1 {
            self.bought[actor] = true;
        }
    }
}

/// Result of folding Bayes updates along simulated histories.
#[derive(Debug, Clone)]
pub struct BeliefCheck {
    pub histories: usize,
    pub steps: usize,
    /// Exact mismatches between the folded and closed-form beliefs.
    pub exact_mismatches: usize,
    /// Largest entrywise gap on the float path.
    pub float_max_gap: f64,
    /// Largest factorization residual on the exact path.
    pub factorization_max: Rational,
}

/// Simulates on-path histories under `profile` and compares, after every
/// turn, the folded Bayes update with the closed form of the tracked `x_tilde`.
pub fn check_belief_histories(
    profile: &StrategyProfile,
    params: &GameParams,
    rng: &mut impl Rng,
    histories: usize,
    turns: usize,
) -> BeliefCheck {
    let n = params.n();
    let p = rational::to_f64(params.p());
    let mut out = BeliefCheck {
        histories,
        steps: 0,
        exact_mismatches: 0,
        float_max_gap: 0.0,
        factorization_max: rational::int(0),
    };
    for _ in 0..histories {
        let v = if rng.random_bool(0.5) { Signal::Plus } else { Signal::Minus };
        let x: Vec<Signal> = (0..n)
            .map(|_| {
                if rng.random_bool(1.0 - p) {
                    v
                } else if v == Signal::Plus {
                    Signal::Minus
                } else {
                    Signal::Plus
                }
            })
            .collect();
        let mut state = HistoryState::new(n);
        let mut exact = JointBelief::<Rational>::prior(params);
        let mut float = JointBelief::<f64>::prior(params);
        for _ in 0..turns {
            let actor = rng.random_range(0..n);
            let gamma = state.gamma(profile, actor);
            let a = gamma.action(x[actor]);
            let next = bayes_update(&exact, gamma, a, actor);
            float = bayes_update(&float, gamma, a, actor);
            let before = state.x_tilde.clone();
            state.apply(actor, gamma, a);
            out.steps += 1;
            // Both sides are unchanged when nothing was revealed and the
            // folded table did not move; skip the exact comparison then.
            let moved = next != exact;
            exact = next;
            if !moved && before == state.x_tilde {
                continue;
            }
            let closed = JointBelief::<Rational>::closed_form(&state.x_tilde, params);
            if closed != exact {
                out.exact_mismatches += 1;
            }
            let closed_f = JointBelief::<f64>::closed_form(&state.x_tilde, params);
            out.float_max_gap = out.float_max_gap.max(float.max_abs_diff(&closed_f));
            let fr = exact.factorization_residual();
            if fr > out.factorization_max {
                out.factorization_max = fr;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn g3() -> GameParams {
        GameParams::new(3, rat(1, 10), int(0)).unwrap()
    }

    #[test]
    fn buy_leaves_belief_unchanged() {
        let pi = JointBelief::<Rational>::prior(&g3());
        assert_eq!(bayes_update(&pi, Gamma::Buy, 1, 0), pi);
        assert_eq!(bayes_update(&pi, Gamma::Wait, 0, 2), pi);
        assert_eq!(bayes_update(&pi, Gamma::Wait, 1, 2), pi);
    }

    #[test]
    fn reveal_scales_likelihood_ratio() {
        let pi = JointBelief::<Rational>::prior(&g3());
        let up = bayes_update(&pi, Gamma::Reveal, 1, 0);
        assert_eq!(up.marginal_v(Signal::Plus) / up.marginal_v(Signal::Minus), int(9));
        let down = bayes_update(&pi, Gamma::Reveal, 0, 0);
        assert_eq!(down.marginal_v(Signal::Plus) / down.marginal_v(Signal::Minus), rat(1, 9));
    }

    #[test]
    fn closed_form_examples() {
        let g = g3();
        let pi = JointBelief::<Rational>::closed_form(&[0, 0, 0], &g);
        assert_eq!(pi.marginal_v(Signal::Plus), rat(1, 2));
        assert_eq!(pi.conditional(1, Signal::Plus, Signal::Plus), rat(9, 10));
        let pi = JointBelief::<Rational>::closed_form(&[1, 0, 0], &g);
        assert_eq!(pi.marginal_v(Signal::Plus) / pi.marginal_v(Signal::Minus), int(9));
        for v in Signal::BOTH {
            assert_eq!(pi.conditional(0, Signal::Plus, v), int(1));
        }
        assert_eq!(pi.total(), int(1));
    }

    #[test]
    fn private_posterior_examples() {
        let g = g3();
        assert_eq!(private_posterior(Signal::Plus, 0, 0, &g), rat(9, 10));
        assert_eq!(private_posterior(Signal::Plus, 1, 1, &g), crate::game::public_belief_v::<Rational>(1, &g));
        assert_eq!(private_posterior(Signal::Plus, -1, -1, &g), rat(9, 10));
    }
}
