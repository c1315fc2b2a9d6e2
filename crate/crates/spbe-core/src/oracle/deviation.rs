//! Monte Carlo test of unilateral deviations by player 0.
//!
//! Every strategy is scored on the same draws of `V`, the signals and the
//! sequence of acting players, so differences have small variance. Other
//! players follow the profile, and the public state is updated with the
//! profile's partial strategy for whoever acts and the action actually taken.

use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{is_feasible_acting, GameParams, Gamma, Signal};
use crate::oracle::belief::HistoryState;
use crate::par::{self, ExecMode};
use crate::profile::{acting_states, StrategyProfile};
use crate::rational::{self, Rational};

/// Strategy of player 0 until their purchase.
#[derive(Debug, Clone, PartialEq)]
pub enum Deviation {
    /// Follow the profile except at the listed cells.
    Override(Vec<((u8, i32, i32), Gamma)>),
    AlwaysBuy,
    NeverBuy,
}

impl Deviation {
    fn gamma(&self, profile: &StrategyProfile, r: u8, y: i32, w: i32) -> Gamma {
        match self {
            Deviation::AlwaysBuy => Gamma::Buy,
            Deviation::NeverBuy => Gamma::Wait,
            Deviation::Override(cells) => cells
                .iter()
                .find(|(c, _)| *c == (r, y, w))
                .map(|(_, g)| *g)
                .or_else(|| profile.get(r, y, w))
                .unwrap_or(Gamma::Wait),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Deviation::AlwaysBuy => "always-buy".into(),
            Deviation::NeverBuy => "never-buy".into(),
            Deviation::Override(cells) => {
                let parts: Vec<String> =
                    cells.iter().map(|((r, y, w), g)| format!("({r},{y},{w})->{}", g.code())).collect();
                parts.join(" ")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviationConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Turns simulated per sample; `None` derives it from `tail_tolerance`.
    pub horizon: Option<usize>,
    pub tail_tolerance: f64,
    /// Number of most-visited cells whose `3^k` joint overrides are tried.
    pub joint_cells: usize,
    pub mode: ExecMode,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 100_000,
            horizon: None,
            tail_tolerance: 1e-6,
            joint_cells: 2,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviationEstimate {
    pub deviation: Deviation,
    pub mean_gain: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub n_samples: usize,
    pub horizon: usize,
    pub baseline: f64,
    pub estimates: Vec<DeviationEstimate>,
    /// Estimate with the largest mean gain.
    pub best: DeviationEstimate,
    /// True when the best gain exceeds three standard errors.
    pub detected: bool,
    /// Exact largest gain, available when `delta = 0`.
    pub exact_gain: Option<Rational>,
}

/// `ceil(log(tol) / log(delta))`, at least 1.
pub fn horizon_for(delta: f64, tol: f64) -> usize {
    if delta <= 0.0 {
        return 1;
    }
    if delta >= 1.0 {
        return usize::MAX;
    }
    ((tol.ln() / delta.ln()).ceil() as usize).max(1)
}

struct Draw {
    v: Signal,
    x: Vec<Signal>,
    actors: Vec<usize>,
}

fn draw(rng: &mut ChaCha8Rng, n: usize, p: f64, horizon: usize) -> Draw {
    let v = if rng.random_bool(0.5) { Signal::Plus } else { Signal::Minus };
    let flip = |s: Signal| if s == Signal::Plus { Signal::Minus } else { Signal::Plus };
    let x = (0..n).map(|_| if rng.random_bool(p) { flip(v) } else { v }).collect();
    let actors = (0..horizon).map(|_| rng.random_range(0..n)).collect();
    Draw { v, x, actors }
}

/// Discounted payoff of player 0 using `dev` (or the profile when `None`).
/// Also reports cells where player 0 acted while not yet bought.
fn play(
    profile: &StrategyProfile,
    delta: f64,
    d: &Draw,
    dev: Option<&Deviation>,
    visits: Option<&mut Vec<(u8, i32, i32)>>,
) -> f64 {
    let n = d.x.len();
    let mut s = HistoryState::new(n);
    let mut discount = 1.0;
    let mut visits = visits;
    for &actor in &d.actors {
        if !s.bought[actor] {
            let public = s.gamma(profile, actor);
            let own = if actor == 0 {
                let r = u8::from(s.x_tilde[0] != 0);
                let (y, w) = (s.y(), s.w());
                if let Some(v) = visits.as_deref_mut() {
                    v.push((r, y, w));
                }
                dev.map_or(public, |dv| dv.gamma(profile, r, y, w))
            } else {
                public
            };
            let a = own.action(d.x[actor]);
            s.apply(actor, public, a);
            if actor == 0 && a == 1 {
                return discount * f64::from(d.v.value());
            }
        }
        discount *= delta;
        if discount == 0.0 {
            break;
        }
    }
    0.0
}

/// All single-cell overrides, `3^k` joint overrides on the `k` most visited
/// cells, always-buy and never-buy.
pub fn candidate_deviations(profile: &StrategyProfile, most_visited: &[(u8, i32, i32)]) -> Vec<Deviation> {
    let mut out = Vec::new();
    for (r, y, w) in acting_states(profile.n()) {
        let cur = profile.get(r, y, w);
        for g in Gamma::ALL {
            if Some(g) != cur {
                out.push(Deviation::Override(vec![((r, y, w), g)]));
            }
        }
    }
    let k = most_visited.len();
    for code in 0..3usize.pow(k as u32) {
        let mut c = code;
        let mut cells = Vec::with_capacity(k);
        for &cell in most_visited {
            cells.push((cell, Gamma::ALL[c % 3]));
            c /= 3;
        }
        if cells.iter().any(|&((r, y, w), g)| profile.get(r, y, w) != Some(g)) {
            out.push(Deviation::Override(cells));
        }
    }
    out.push(Deviation::AlwaysBuy);
    out.push(Deviation::NeverBuy);
    out
}

/// Exact payoff at `delta = 0`: player 0 only collects by acting first.
fn exact_one_shot(profile: &StrategyProfile, params: &GameParams, dev: Option<&Deviation>) -> Rational {
    let n = rational::int(params.n() as i64);
    let g = dev.map_or_else(|| profile.get(0, 0, 0).unwrap_or(Gamma::Wait), |d| d.gamma(profile, 0, 0, 0));
    let mut acc = Rational::zero();
    for x in Signal::BOTH {
        if g.action(x) == 1 {
            // P(x) = 1/2 at the prior; the buy value is the reward at e = x.
            acc += rational::rat(1, 2) * crate::game::instant_reward::<Rational>(x.value(), params);
        }
    }
    acc / n
}

pub fn deviation_test(profile: &StrategyProfile, params: &GameParams, config: &DeviationConfig) -> DeviationReport {
    let n = params.n();
    let delta = rational::to_f64(params.delta());
    let p = rational::to_f64(params.p());
    let horizon = config.horizon.unwrap_or_else(|| horizon_for(delta, config.tail_tolerance)).min(1_000_000);

    // Pilot run to find where player 0 actually acts.
    let mut counts: HashMap<(u8, i32, i32), usize> = HashMap::new();
    let mut pilot_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..2_000 {
        let d = draw(&mut pilot_rng, n, p, horizon);
        let mut visits = Vec::new();
        play(profile, delta, &d, None, Some(&mut visits));
        for c in visits {
            *counts.entry(c).or_default() += 1;
        }
    }
    let mut ranked: Vec<_> = counts.into_iter().filter(|(c, _)| is_feasible_acting(c.0, c.1, c.2, n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top: Vec<_> = ranked.iter().take(config.joint_cells).map(|(c, _)| *c).collect();
    let deviations = candidate_deviations(profile, &top);

    const BATCH: usize = 1024;
    let batches = config.n_samples.div_ceil(BATCH);
    let k = deviations.len();
    let partial = par::map_range(config.mode, batches, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(b as u64);
        let count = BATCH.min(config.n_samples - b * BATCH);
        let mut base_sum = 0.0;
        let mut sums = vec![0.0; k];
        let mut sq = vec![0.0; k];
        for _ in 0..count {
            let d = draw(&mut rng, n, p, horizon);
            let base = play(profile, delta, &d, None, None);
            base_sum += base;
            for (i, dev) in deviations.iter().enumerate() {
                let diff = play(profile, delta, &d, Some(dev), None) - base;
                sums[i] += diff;
                sq[i] += diff * diff;
            }
        }
        (base_sum, sums, sq)
    });
    let mut base_sum = 0.0;
    let mut sums = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for (b, s, q) in partial {
        base_sum += b;
        for i in 0..k {
            sums[i] += s[i];
            sq[i] += q[i];
        }
    }
    let m = config.n_samples as f64;
    let estimates: Vec<DeviationEstimate> = deviations
        .into_iter()
        .enumerate()
        .map(|(i, deviation)| {
            let mean = sums[i] / m;
            let var = (sq[i] / m - mean * mean).max(0.0);
            DeviationEstimate { deviation, mean_gain: mean, std_error: (var / m).sqrt() }
        })
        .collect();
    let best = estimates
        .iter()
        .max_by(|a, b| a.mean_gain.partial_cmp(&b.mean_gain).unwrap_or(std::cmp::Ordering::Equal))
        .cloned()
        .expect("at least always-buy and never-buy");
    let detected = best.mean_gain > 3.0 * best.std_error && best.mean_gain > 0.0;

    let exact_gain = params.delta().is_zero().then(|| {
        let base = exact_one_shot(profile, params, None);
        estimates
            .iter()
            .map(|e| exact_one_shot(profile, params, Some(&e.deviation)) - &base)
            .max()
            .unwrap_or_else(Rational::zero)
    });

    DeviationReport {
        n_samples: config.n_samples,
        horizon,
        baseline: base_sum / m,
        estimates,
        best,
        detected,
        exact_gain,
    }
}
