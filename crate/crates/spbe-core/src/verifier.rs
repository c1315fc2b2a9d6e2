//! Exact certification of a fixed profile.
//!
//! Values are computed by solving cells layer by layer in decreasing `w`
//! with rational arithmetic, then every feasible acting state is checked:
//! the prescribed action must weakly beat the alternative for both signals.

use num_traits::Zero;
use thiserror::Error;

use crate::equations::{self, CellSystem, EquationError};
use crate::game::{GameParams, Gamma, Kernel, Signal};
use crate::par::{self, ExecMode};
use crate::profile::{acting_states, ProfileError, StrategyProfile, ValueTables};
use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("cell (y={y}, w={w}) is singular at delta = 1 and cannot be certified")]
    SingularBlock { y: i32, w: i32 },
    #[error("profile is for N={profile} but parameters have N={params}")]
    SizeMismatch { profile: usize, params: usize },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Equation(EquationError),
}

impl From<EquationError> for VerifyError {
    fn from(e: EquationError) -> Self {
        match e {
            EquationError::Singular { y, w } => VerifyError::SingularBlock { y, w },
            other => VerifyError::Equation(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub r: u8,
    pub y: i32,
    pub w: i32,
    pub x: Signal,
    pub buy: Rational,
    pub wait: Rational,
    pub prescribed: Gamma,
}

impl Violation {
    /// Payoff of the prescribed action minus the alternative (negative).
    pub fn margin(&self) -> Rational {
        if self.prescribed.action(self.x) == 1 {
            &self.buy - &self.wait
        } else {
            &self.wait - &self.buy
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Acting states and signals with exactly equal payoffs.
    pub ties: Vec<(u8, i32, i32, Signal)>,
    pub values: ValueTables<Rational>,
}

/// Cell system of `(y, w)` given solved layers above.
pub fn assemble_block(
    profile: &StrategyProfile,
    params: &GameParams,
    values: &ValueTables<Rational>,
    y: i32,
    w: i32,
) -> Result<CellSystem<Rational>, VerifyError> {
    let kernel = Kernel::new(params);
    Ok(equations::assemble_cell(&kernel, values, profile, y, w)?)
}

pub fn solve_exact_values(
    profile: &StrategyProfile,
    params: &GameParams,
) -> Result<ValueTables<Rational>, VerifyError> {
    solve_exact_values_with(profile, params, ExecMode::default())
}

pub fn solve_exact_values_with(
    profile: &StrategyProfile,
    params: &GameParams,
    mode: ExecMode,
) -> Result<ValueTables<Rational>, VerifyError> {
    if profile.n() != params.n() {
        return Err(VerifyError::SizeMismatch { profile: profile.n(), params: params.n() });
    }
    profile.check_total()?;
    let kernel = Kernel::<Rational>::new(params);
    let n = params.n_i32();
    let mut values = ValueTables::new(params.n());
    for w in (0..=n).rev() {
        let ys: Vec<i32> = (-n..=n).collect();
        let solved = par::map(mode, ys, |y| -> Result<_, EquationError> {
            let sys = equations::assemble_cell(&kernel, &values, profile, y, w)?;
            let sol = sys.solve()?;
            Ok((sys, sol))
        });
        for item in solved {
            let (sys, sol) = item?;
            equations::store(&mut values, &sys, sol);
        }
    }
    Ok(values)
}

/// Largest residual of any value equation when `values` are plugged into
/// both sides; zero exactly for the output of [`solve_exact_values`].
pub fn equation_residual(
    profile: &StrategyProfile,
    params: &GameParams,
    values: &ValueTables<Rational>,
) -> Result<Rational, VerifyError> {
    let kernel = Kernel::<Rational>::new(params);
    let n = params.n_i32();
    let mut worst = Rational::zero();
    for w in 0..=n {
        for y in -n..=n {
            let sys = equations::assemble_cell(&kernel, values, profile, y, w)?;
            let r = sys.residual(&sys.read(values)?);
            if r > worst {
                worst = r;
            }
        }
    }
    Ok(worst)
}

/// Checks the argmax condition at every feasible acting state.
pub fn check_profile(profile: &StrategyProfile, params: &GameParams) -> Result<VerificationReport, VerifyError> {
    check_profile_with(profile, params, ExecMode::default())
}

pub fn check_profile_with(
    profile: &StrategyProfile,
    params: &GameParams,
    mode: ExecMode,
) -> Result<VerificationReport, VerifyError> {
    let values = solve_exact_values_with(profile, params, mode)?;
    let kernel = Kernel::<Rational>::new(params);
    let mut violations = Vec::new();
    let mut ties = Vec::new();
    for (r, y, w) in acting_states(params.n()) {
        let g = profile.require(r, y, w)?;
        for x in Signal::BOTH {
            let buy = kernel.reward(y + i32::from(r) + x.value());
            let wait = equations::continuation_value(&kernel, &values, x, r, y, w, g)?;
            if buy == wait {
                ties.push((r, y, w, x));
                continue;
            }
            let ok = if g.action(x) == 1 { buy > wait } else { wait > buy };
            if !ok {
                violations.push(Violation { r, y, w, x, buy, wait, prescribed: g });
            }
        }
    }
    Ok(VerificationReport { passed: violations.is_empty(), violations, ties, values })
}

/// Outcome of a dyadic search for the smallest certifying discount.
#[derive(Debug, Clone)]
pub struct BisectReport {
    /// Smallest grid point found to verify, if the top of the grid verifies.
    pub delta_star: Option<Rational>,
    /// Largest grid point found to fail below `delta_star`.
    pub delta_fail: Option<Rational>,
    pub depth: u32,
    pub evaluations: Vec<(Rational, bool)>,
}

/// Binary search over `j / 2^depth`, `0 < j < 2^depth`, assuming the set of
/// certifying discounts is an upper interval of the grid.
pub fn bisect_delta(profile: &StrategyProfile, params: &GameParams, depth: u32) -> Result<BisectReport, VerifyError> {
    assert!((1..=62).contains(&depth), "grid depth must lie in 1..=62");
    let scale = 1i64 << depth;
    let mut evaluations = Vec::new();
    let passes = |j: i64, log: &mut Vec<(Rational, bool)>| -> Result<bool, VerifyError> {
        let delta = rational::rat(j, scale);
        let grid = params.with_delta(delta.clone()).expect("grid point lies in (0,1)");
        let ok = check_profile(profile, &grid)?.passed;
        log.push((delta, ok));
        Ok(ok)
    };
    let mut hi = scale - 1;
    if !passes(hi, &mut evaluations)? {
        let delta_fail = Some(rational::rat(hi, scale));
        return Ok(BisectReport { delta_star: None, delta_fail, depth, evaluations });
    }
    let mut lo = 0i64;
    if passes(1, &mut evaluations)? {
        hi = 1;
    } else {
        lo = 1;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid, &mut evaluations)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectReport {
        delta_star: Some(rational::rat(hi, scale)),
        delta_fail: (lo > 0).then(|| rational::rat(lo, scale)),
        depth,
        evaluations,
    })
}
