//! Forward simulation of the full game under a profile.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cascade::dp::buy_closed;
use crate::cascade::CascadeClass;
use crate::game::{GameParams, Gamma, Signal};
use crate::oracle::HistoryState;
use crate::par::{self, ExecMode};
use crate::profile::StrategyProfile;
use crate::rational;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    pub n_runs: usize,
    pub max_turns: usize,
    pub mode: ExecMode,
}

impl SimConfig {
    pub fn new(seed: u64, n_runs: usize, max_turns: usize) -> Self {
        Self { seed, n_runs, max_turns, mode: ExecMode::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub v: Signal,
    pub class: CascadeClass,
    /// `w` when the cascade began, or when the run ended for the other classes.
    pub onset_w: i32,
    pub onset_turn: Option<usize>,
    pub revelations: u32,
    /// Sum over players of `v * delta^t` for those who bought at turn `t`.
    pub welfare: f64,
    pub turns: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SimulationReport {
    pub runs: Vec<RunStats>,
}

impl SimulationReport {
    fn of(&self, v: Signal) -> impl Iterator<Item = &RunStats> {
        self.runs.iter().filter(move |r| r.v == v)
    }

    pub fn count(&self, v: Signal) -> usize {
        self.of(v).count()
    }

    pub fn class_count(&self, v: Signal, class: CascadeClass) -> usize {
        self.of(v).filter(|r| r.class == class).count()
    }

    pub fn frequency(&self, v: Signal, class: CascadeClass) -> f64 {
        let n = self.count(v);
        if n == 0 {
            return 0.0;
        }
        self.class_count(v, class) as f64 / n as f64
    }

    /// Fraction of all runs that reached a buy or wait cascade.
    pub fn cascade_frequency(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        let hits = self
            .runs
            .iter()
            .filter(|r| matches!(r.class, CascadeClass::BuyCascade | CascadeClass::WaitCascade))
            .count();
        hits as f64 / self.runs.len() as f64
    }

    pub fn mean_revelations(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().map(|r| f64::from(r.revelations)).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_welfare(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().map(|r| r.welfare).sum::<f64>() / self.runs.len() as f64
    }

    pub fn onset_histogram(&self, v: Signal) -> BTreeMap<(CascadeClass, i32), usize> {
        let mut h = BTreeMap::new();
        for r in self.of(v) {
            *h.entry((r.class, r.onset_w)).or_default() += 1;
        }
        h
    }
}

fn onset_class(profile: &StrategyProfile, y: i32, w: i32) -> Option<CascadeClass> {
    if w >= profile.n() as i32 {
        return Some(CascadeClass::Exhaustion);
    }
    match profile.get(0, y, w) {
        Some(Gamma::Wait) | None => Some(CascadeClass::WaitCascade),
        Some(Gamma::Buy) if buy_closed(profile, y, w) => Some(CascadeClass::BuyCascade),
        _ => None,
    }
}

/// Whether some remaining player would still buy or reveal in the current state.
fn active(profile: &StrategyProfile, s: &HistoryState, x: &[Signal]) -> bool {
    (0..x.len()).any(|i| {
        let g = s.gamma(profile, i);
        g == Gamma::Reveal && s.x_tilde[i] == 0 || g.action(x[i]) == 1 && !s.bought[i]
    })
}

fn run_one(
    profile: &StrategyProfile,
    n: usize,
    p: f64,
    delta: f64,
    max_turns: usize,
    rng: &mut ChaCha8Rng,
) -> RunStats {
    let v = if rng.random_bool(0.5) { Signal::Plus } else { Signal::Minus };
    let flip = if v == Signal::Plus { Signal::Minus } else { Signal::Plus };
    let x: Vec<Signal> = (0..n).map(|_| if rng.random_bool(p) { flip } else { v }).collect();
    let mut s = HistoryState::new(n);
    let mut onset = onset_class(profile, 0, 0).map(|c| (c, 0, 0usize));
    let mut revelations = 0;
    let mut welfare = 0.0;
    let mut discount = 1.0;
    let mut turns = 0;
    while turns < max_turns && active(profile, &s, &x) {
        let actor = rng.random_range(0..n);
        if !s.bought[actor] {
            let g = s.gamma(profile, actor);
            let a = g.action(x[actor]);
            let (y0, w0) = (s.y(), s.w());
            if onset.is_none() && g == Gamma::Reveal && s.x_tilde[actor] == 0 {
                revelations += 1;
            }
            s.apply(actor, g, a);
            if a == 1 {
                welfare += discount * f64::from(v.value());
            }
            let (y1, w1) = (s.y(), s.w());
            if onset.is_none() && (y1, w1) != (y0, w0) {
                onset = onset_class(profile, y1, w1).map(|c| (c, w1, turns + 1));
            }
        }
        discount *= delta;
        turns += 1;
    }
    let (class, onset_w, onset_turn) = match onset {
        Some((c, w, t)) => (c, w, Some(t)),
        None => (CascadeClass::NoneWithinHorizon, s.w(), None),
    };
    RunStats { v, class, onset_w, onset_turn, revelations, welfare, turns }
}

/// Plays `n_runs` independent games. Run `i` draws from stream `i` of a
/// ChaCha8 generator keyed by `seed`, so results do not depend on the
/// execution mode.
pub fn simulate(profile: &StrategyProfile, params: &GameParams, config: &SimConfig) -> SimulationReport {
    let n = params.n();
    let p = rational::to_f64(params.p());
    let delta = rational::to_f64(params.delta());
    let runs = par::map_range(config.mode, config.n_runs, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        run_one(profile, n, p, delta, config.max_turns, &mut rng)
    });
    SimulationReport { runs }
}
