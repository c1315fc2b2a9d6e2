//! Residual of the per-player finite equations under the quadratic mapping.
//!
//! States are `(x_tilde, b, actor)` with one of five local states per player:
//! `(0,0)`, `(0,1)`, `(-1,0)`, `(-1,1)`, `(+1,1)`. Candidate values come from
//! quadratic tables: the actor reads `U_a(x, |x_tilde^n|, y, w)`, anyone else
//! with `b = 0` reads `U_na^{|x_tilde^m|}(x, max(|x_tilde^n|, b^n), y, w)`,
//! and bought players are worth zero. Both sides of every value equation are
//! then evaluated directly on the full state.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::game::{signal_likelihood, GameParams, Gamma, Signal};
use crate::profile::{StrategyProfile, ValueTables};
use crate::rational::{self, Rational};

pub const MAX_PLAYERS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Fpe2Error {
    #[error("finite check is limited to N <= {MAX_PLAYERS}, got {0}")]
    TooLarge(usize),
    #[error("full state maps to quadratic state {0} that has no value")]
    MappingDomainError(String),
    #[error("profile has no entry for (r={r}, y={y}, w={w})")]
    MissingStrategy { r: u8, y: i32, w: i32 },
}

#[derive(Debug, Clone)]
pub struct Fpe2Report {
    pub max_residual: Rational,
    pub equations: usize,
    pub states: usize,
    /// `(x_tilde, b, actor, x)` where the prescribed action is not an argmax.
    pub argmax_violations: Vec<(Vec<i8>, Vec<bool>, usize, Signal)>,
}

#[derive(Clone)]
struct Full {
    xt: Vec<i8>,
    b: Vec<bool>,
}

impl Full {
    fn y(&self) -> i32 {
        self.xt.iter().map(|&v| i32::from(v)).sum()
    }
    fn w(&self) -> i32 {
        self.xt.iter().zip(&self.b).filter(|(x, b)| **x != 0 || **b).count() as i32
    }
    fn z(&self, n: usize) -> u8 {
        u8::from(self.xt[n] != 0 || self.b[n])
    }
}

struct Ctx<'a> {
    profile: &'a StrategyProfile,
    values: &'a ValueTables<Rational>,
    params: &'a GameParams,
    step: Rational,
}

impl Ctx<'_> {
    fn gamma(&self, s: &Full, n: usize) -> Result<Gamma, Fpe2Error> {
        if s.b[n] {
            return Ok(Gamma::Wait);
        }
        let r = u8::from(s.xt[n] != 0);
        let (y, w) = (s.y(), s.w());
        self.profile.get(r, y, w).ok_or(Fpe2Error::MissingStrategy { r, y, w })
    }

    /// Candidate value of player `m` with signal `x` when `n` acts.
    fn v_tilde(&self, m: usize, x: Signal, n: usize, s: &Full) -> Result<Rational, Fpe2Error> {
        if s.b[m] {
            return Ok(Rational::zero());
        }
        let (y, w) = (s.y(), s.w());
        let rm = u8::from(s.xt[m] != 0);
        if m == n {
            self.values
                .u_a(x, rm, y, w)
                .cloned()
                .ok_or_else(|| Fpe2Error::MappingDomainError(format!("U_a(x={}, r={rm}, y={y}, w={w})", x.value())))
        } else {
            let z = s.z(n);
            self.values.u_na(x, rm, z, y, w).cloned().ok_or_else(|| {
                Fpe2Error::MappingDomainError(format!("U_na^{rm}(x={}, z={z}, y={y}, w={w})", x.value()))
            })
        }
    }

    /// `(delta/N) sum_{n'} V^m(x, n', s)`.
    fn next_turn(&self, m: usize, x: Signal, s: &Full) -> Result<Rational, Fpe2Error> {
        let mut acc = Rational::zero();
        for n2 in 0..s.xt.len() {
            acc += self.v_tilde(m, x, n2, s)?;
        }
        Ok(&self.step * acc)
    }

    fn exponent(&self, s: &Full, m: usize, x: Signal) -> i32 {
        s.y() - i32::from(s.xt[m]) + x.value()
    }

    fn reward(&self, e: i32) -> Rational {
        crate::game::instant_reward(e, self.params)
    }

    /// Distribution of `X^n` seen by `m` holding `x`.
    fn signal_law(&self, s: &Full, m: usize, x: Signal, n: usize) -> Vec<(Signal, Rational)> {
        match s.xt[n] {
            1 => vec![(Signal::Plus, rational::int(1))],
            -1 => vec![(Signal::Minus, rational::int(1))],
            _ => {
                let e = self.exponent(s, m, x);
                let qe = rational::pow_signed(self.params.q(), e);
                let one = rational::int(1);
                Signal::BOTH
                    .into_iter()
                    .map(|xn| {
                        let num = signal_likelihood(xn, Signal::Minus, self.params)
                            + signal_likelihood(xn, Signal::Plus, self.params) * &qe;
                        (xn, num / (&one + &qe))
                    })
                    .collect()
            }
        }
    }

    /// Right-hand side of the value equation of `m` when `n` acts.
    fn rhs(&self, m: usize, x: Signal, n: usize, s: &Full) -> Result<Rational, Fpe2Error> {
        let g = self.gamma(s, n)?;
        if m == n {
            if g.action(x) == 1 {
                return Ok(self.reward(self.exponent(s, m, x)));
            }
            return self.next_turn(m, x, &transition(s, n, g, 0));
        }
        let mut acc = Rational::zero();
        for (xn, prob) in self.signal_law(s, m, x, n) {
            let a = g.action(xn);
            acc += prob * self.next_turn(m, x, &transition(s, n, g, a))?;
        }
        Ok(acc)
    }
}

fn transition(s: &Full, n: usize, g: Gamma, a: u8) -> Full {
    let mut t = s.clone();
    if g == Gamma::Reveal && t.xt[n] == 0 {
        t.xt[n] = if a == 1 { 1 } else { -1 };
    }
    if a == 1 {
        t.b[n] = true;
    }
    t
}

const LOCAL: [(i8, bool); 5] = [(0, false), (0, true), (-1, false), (-1, true), (1, true)];

/// Largest residual of the finite equations for quadratic tables `values`
/// and profile `profile`; also checks the actor's argmax condition.
pub fn fpe2_residual(
    profile: &StrategyProfile,
    values: &ValueTables<Rational>,
    params: &GameParams,
) -> Result<Fpe2Report, Fpe2Error> {
    let n = params.n();
    if n > MAX_PLAYERS {
        return Err(Fpe2Error::TooLarge(n));
    }
    let ctx = Ctx { profile, values, params, step: params.delta() / rational::int(n as i64) };
    let mut report =
        Fpe2Report { max_residual: Rational::zero(), equations: 0, states: 0, argmax_violations: Vec::new() };
    let total = LOCAL.len().pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut s = Full { xt: Vec::with_capacity(n), b: Vec::with_capacity(n) };
        for _ in 0..n {
            let (xt, b) = LOCAL[c % LOCAL.len()];
            c /= LOCAL.len();
            s.xt.push(xt);
            s.b.push(b);
        }
        report.states += 1;
        for actor in 0..n {
            for m in (0..n).filter(|&m| !s.b[m]) {
                for x in Signal::BOTH {
                    let lhs = ctx.v_tilde(m, x, actor, &s)?;
                    let rhs = ctx.rhs(m, x, actor, &s)?;
                    let d = (lhs - rhs).abs();
                    if d > report.max_residual {
                        report.max_residual = d;
                    }
                    report.equations += 1;
                }
            }
            if s.b[actor] {
                continue;
            }
            let g = ctx.gamma(&s, actor)?;
            for x in Signal::BOTH {
                let buy = ctx.reward(ctx.exponent(&s, actor, x));
                let wait = ctx.next_turn(actor, x, &transition(&s, actor, g, 0))?;
                let ok = if g.action(x) == 1 { buy >= wait } else { wait >= buy };
                if !ok {
                    report.argmax_violations.push((s.xt.clone(), s.b.clone(), actor, x));
                }
            }
        }
    }
    Ok(report)
}
