//! Float fixed-point solver.
//!
//! Cells are visited in decreasing `w`. At each cell the free player's
//! prescription is chosen first by trying all three partial strategies: each
//! candidate is substituted into the cell's equations, the cell is solved,
//! and the candidate is kept if both signals' prescribed actions are argmax
//! within `indifference_eps`. The revealed player's prescription is chosen
//! the same way given the free one. Passes repeat until nothing changes.

use std::fmt;

use thiserror::Error;

use crate::equations::{self, EquationError};
use crate::game::{is_feasible_acting, GameParams, Gamma, Kernel, Signal};
use crate::profile::{StrategyProfile, ValueTables};
use crate::rational::{self, Rational};

/// Order of preference among consistent candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TieBreak(pub [Gamma; 3]);

impl TieBreak {
    pub const REVEAL_FIRST: TieBreak = TieBreak([Gamma::Reveal, Gamma::Buy, Gamma::Wait]);
    pub const BUY_FIRST: TieBreak = TieBreak([Gamma::Buy, Gamma::Reveal, Gamma::Wait]);

    /// Parses a comma-separated order such as `reveal,buy,wait`; missing
    /// entries are appended in the default order.
    pub fn parse(text: &str) -> Option<TieBreak> {
        let mut order = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let g = match part.to_ascii_lowercase().as_str() {
                "reveal" | "i" | "01" => Gamma::Reveal,
                "buy" | "1" | "11" => Gamma::Buy,
                "wait" | "0" | "00" => Gamma::Wait,
                _ => return None,
            };
            if order.contains(&g) {
                return None;
            }
            order.push(g);
        }
        for g in Self::REVEAL_FIRST.0 {
            if !order.contains(&g) {
                order.push(g);
            }
        }
        Some(TieBreak([order[0], order[1], order[2]]))
    }
}

impl Default for TieBreak {
    fn default() -> Self {
        Self::REVEAL_FIRST
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub tie_break: TieBreak,
    pub tol: f64,
    pub max_iters: usize,
    pub indifference_eps: f64,
    /// Discount used for iteration when the true discount is exactly one.
    pub delta_one_eps: f64,
    /// Preferred prescriptions; where consistent they win over `tie_break`.
    pub initial: Option<StrategyProfile>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tie_break: TieBreak::default(),
            tol: 1e-12,
            max_iters: 20,
            indifference_eps: 1e-9,
            delta_one_eps: 1e-9,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFlag {
    /// No candidate was consistent; the least-violating one was used.
    NoConsistentCandidate { r: u8, y: i32, w: i32, violation: f64 },
    /// Iterated with `1 - eps` in place of `delta = 1`.
    DeltaOneSurrogate { eps: f64 },
}

impl fmt::Display for SolveFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveFlag::NoConsistentCandidate { r, y, w, violation } => {
                write!(f, "no consistent candidate at ({r},{y},{w}), violation {violation:.3e}")
            }
            SolveFlag::DeltaOneSurrogate { eps } => write!(f, "iterated with delta = 1 - {eps:e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub profile: StrategyProfile,
    pub values: ValueTables<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub flags: Vec<SolveFlag>,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no convergence after {} passes (residual {:.3e})", .0.iterations, .0.residual)]
    NotConverged(Box<SolveResult>),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

/// Chosen prescription at one acting state.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub gamma: Gamma,
    /// Buy payoff minus wait payoff, indexed `[x = +1, x = -1]`.
    pub margins: [f64; 2],
    pub consistent: bool,
    pub violation: f64,
}

/// Evaluates one candidate at `(r, y, w)`: returns the margins and the
/// largest amount by which a prescribed action falls short.
fn evaluate_candidate(
    kernel: &Kernel<f64>,
    values: &ValueTables<f64>,
    profile: &StrategyProfile,
    r: u8,
    y: i32,
    w: i32,
    g: Gamma,
) -> Result<([f64; 2], f64), EquationError> {
    let g_free = if r == 0 { Some(g) } else { profile.get(0, y, w) };
    let mut margins = [0.0; 2];
    let mut violation: f64 = 0.0;
    for x in Signal::BOTH {
        let sys = equations::assemble_group(kernel, values, x, r, y, w, g_free, Some(g))?;
        let sol = sys.solve()?;
        let wait = equations::continuation_from_group(kernel, values, &sys, &sol, x, r, g)?;
        let buy = kernel.reward(y + i32::from(r) + x.value());
        let m = buy - wait;
        margins[x.index()] = m;
        let short = if g.action(x) == 1 { -m } else { m };
        violation = violation.max(short);
    }
    Ok((margins, violation))
}

/// Best response at `(r, y, w)` against the layers above and, for `r = 1`,
/// the free player's current prescription in the same cell.
pub fn best_response(
    state: (u8, i32, i32),
    profile: &StrategyProfile,
    values: &ValueTables<f64>,
    config: &SolveConfig,
    kernel: &Kernel<f64>,
) -> Result<BestResponse, EquationError> {
    let (r, y, w) = state;
    let mut order: Vec<Gamma> = Vec::with_capacity(3);
    if let Some(g) = config.initial.as_ref().and_then(|p| p.get(r, y, w)) {
        order.push(g);
    }
    for g in config.tie_break.0 {
        if !order.contains(&g) {
            order.push(g);
        }
    }

    let mut best: Option<BestResponse> = None;
    for g in order {
        let (margins, violation) = evaluate_candidate(kernel, values, profile, r, y, w, g)?;
        let consistent = violation <= config.indifference_eps;
        let cand = BestResponse { gamma: g, margins, consistent, violation };
        if consistent {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| violation < b.violation) {
            best = Some(cand);
        }
    }
    Ok(best.expect("three candidates evaluated"))
}

/// Wait value for the acting player given current tables.
pub fn continuation_value(
    state: (u8, i32, i32),
    x: Signal,
    gamma: Gamma,
    values: &ValueTables<f64>,
    params: &GameParams,
) -> Result<f64, EquationError> {
    let kernel = Kernel::<f64>::new(params);
    let (r, y, w) = state;
    equations::continuation_value(&kernel, values, x, r, y, w, gamma)
}

fn solve_cell(
    kernel: &Kernel<f64>,
    values: &mut ValueTables<f64>,
    profile: &StrategyProfile,
    y: i32,
    w: i32,
) -> Result<f64, EquationError> {
    let sys = equations::assemble_cell(kernel, values, profile, y, w)?;
    let sol = sys.solve()?;
    let mut change: f64 = 0.0;
    for (u, v) in sys.unknowns.iter().zip(&sol) {
        let old = match *u {
            equations::Unknown::Acting { x, r } => values.u_a(x, r, y, w),
            equations::Unknown::NonActing { x, r_tilde, z } => values.u_na(x, r_tilde, z, y, w),
        };
        change = change.max(old.map_or(v.abs(), |o| (o - v).abs()));
    }
    equations::store(values, &sys, sol);
    Ok(change)
}

/// One pass over all cells with the profile held fixed. Returns the new
/// tables and the largest change.
pub fn sweep(
    values: &ValueTables<f64>,
    profile: &StrategyProfile,
    params: &GameParams,
) -> Result<(ValueTables<f64>, f64), EquationError> {
    let kernel = Kernel::<f64>::new(params);
    let mut out = values.clone();
    let n = params.n_i32();
    let mut residual: f64 = 0.0;
    for w in (0..=n).rev() {
        for y in -n..=n {
            residual = residual.max(solve_cell(&kernel, &mut out, profile, y, w)?);
        }
    }
    Ok((out, residual))
}

/// Discount actually used for iteration.
pub fn iteration_delta(params: &GameParams, config: &SolveConfig) -> Rational {
    if params.delta_is_one() {
        let eps = rational::from_f64(config.delta_one_eps).unwrap_or_else(|| rational::rat(1, 1_000_000_000));
        rational::int(1) - eps
    } else {
        params.delta().clone()
    }
}

pub fn solve(params: &GameParams, config: &SolveConfig) -> Result<SolveResult, SolveError> {
    if !(config.tol > 0.0) || !(config.indifference_eps >= 0.0) {
        return Err(SolveError::Config("tol must be positive and indifference_eps non-negative".into()));
    }
    if params.delta_is_one() && !(config.delta_one_eps > 0.0 && config.delta_one_eps < 1.0) {
        return Err(SolveError::Config("delta_one_eps must lie in (0, 1)".into()));
    }
    let n = params.n();
    let ni = params.n_i32();
    let kernel = Kernel::<f64>::with_delta(params, &iteration_delta(params, config));
    let mut profile = StrategyProfile::from_fn(n, |_, _, _| Gamma::Wait);
    let mut values = ValueTables::<f64>::zeros(n);
    let mut flags = Vec::new();
    let mut residual = f64::INFINITY;

    for iteration in 1..=config.max_iters {
        let mut changed = false;
        residual = 0.0;
        flags.clear();
        for w in (0..=ni).rev() {
            for y in -ni..=ni {
                for r in 0..=1u8 {
                    if !is_feasible_acting(r, y, w, n) {
                        continue;
                    }
                    let br = best_response((r, y, w), &profile, &values, config, &kernel)?;
                    if !br.consistent {
                        flags.push(SolveFlag::NoConsistentCandidate { r, y, w, violation: br.violation });
                    }
                    if profile.get(r, y, w) != Some(br.gamma) {
                        changed = true;
                        profile.set(r, y, w, br.gamma).expect("feasible state");
                    }
                }
                residual = residual.max(solve_cell(&kernel, &mut values, &profile, y, w)?);
            }
        }
        if !changed && residual < config.tol {
            if params.delta_is_one() {
                flags.push(SolveFlag::DeltaOneSurrogate { eps: config.delta_one_eps });
            }
            return Ok(SolveResult { profile, values, iterations: iteration, residual, flags });
        }
    }
    Err(SolveError::NotConverged(Box::new(SolveResult {
        profile,
        values,
        iterations: config.max_iters,
        residual,
        flags,
    })))
}
