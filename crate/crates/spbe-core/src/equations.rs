//! Value equations of the quadratic fixed point, cell by cell.
//!
//! A cell `(y, w)` holds up to twelve unknowns: for each signal `x` and flag
//! `r`, the acting value `U_a(x,r)` and the two non-acting values
//! `U_na^r(x,0)`, `U_na^r(x,1)`. Transitions either stay in the cell or move
//! to `w + 1`, so once the layer above is known a cell is a small linear
//! system `(I - M) u = c`. The system splits into four independent groups
//! keyed by `(x, r)`.
//!
//! Write `k = delta/N`, `f = N-w-1+r` (free players other than the
//! evaluator) and `s = w-r` (other players that cannot reveal).
//!
//! ```text
//! U_a    = reward(y+r+x)                                 if gamma_r(x) = 1
//!        = k [U_a' + f U_na0' + s U_na1']  at (y-1, w+1)  if r = 0, gamma_r = I
//!        = k [U_a + f U_na0 + s U_na1]                    otherwise
//! U_na1  = k [U_a + s U_na1 + f U_na0]
//! U_na0  = k [U_a + U_na0 + s U_na1 + (f-1) U_na0]        if gamma_0 = WAIT
//!        = k E_x'[U_a' + (s+1) U_na1' + (f-1) U_na0']     otherwise, at (y', w+1)
//! ```

use thiserror::Error;

use crate::game::{is_feasible_acting, is_feasible_nonacting, Gamma, Kernel, Signal};
use crate::profile::{StrategyProfile, ValueTables};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquationError {
    #[error("value at {0} is needed but was never computed")]
    MissingValue(String),
    #[error("singular cell system at (y={y}, w={w})")]
    Singular { y: i32, w: i32 },
    #[error("profile has no entry for (r={r}, y={y}, w={w})")]
    MissingStrategy { r: u8, y: i32, w: i32 },
}

/// One unknown of a cell system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unknown {
    Acting { x: Signal, r: u8 },
    NonActing { x: Signal, r_tilde: u8, z: u8 },
}

/// Linear system `(I - M) u = c` over the unknowns of one cell.
///
/// `exit[i]` marks rows that receive a constant (a reward or a value from
/// the next layer); rows that cannot reach an exit through `M` belong to a
/// closed waiting class.
#[derive(Debug, Clone)]
pub struct CellSystem<S> {
    pub y: i32,
    pub w: i32,
    pub unknowns: Vec<Unknown>,
    pub m: Vec<Vec<S>>,
    pub c: Vec<S>,
    pub exit: Vec<bool>,
}

impl<S: Scalar> CellSystem<S> {
    fn empty(y: i32, w: i32) -> Self {
        Self { y, w, unknowns: Vec::new(), m: Vec::new(), c: Vec::new(), exit: Vec::new() }
    }

    fn push(&mut self, u: Unknown) -> usize {
        self.unknowns.push(u);
        for row in &mut self.m {
            row.push(S::zero());
        }
        self.m.push(vec![S::zero(); self.unknowns.len()]);
        self.c.push(S::zero());
        self.exit.push(false);
        self.unknowns.len() - 1
    }

    fn add_m(&mut self, i: usize, j: usize, v: S) {
        let cur = std::mem::replace(&mut self.m[i][j], S::zero());
        self.m[i][j] = cur + v;
    }

    fn add_c(&mut self, i: usize, v: S) {
        let cur = std::mem::replace(&mut self.c[i], S::zero());
        self.c[i] = cur + v;
        self.exit[i] = true;
    }

    fn append(&mut self, other: CellSystem<S>) {
        let base = self.unknowns.len();
        let add = other.unknowns.len();
        for row in &mut self.m {
            row.extend(std::iter::repeat_n(S::zero(), add));
        }
        for (k, mut row) in other.m.into_iter().enumerate() {
            let mut full = vec![S::zero(); base];
            full.append(&mut row);
            self.m.push(full);
            self.unknowns.push(other.unknowns[k]);
        }
        self.c.extend(other.c);
        self.exit.extend(other.exit);
    }

    /// Current values of the unknowns, read from `values`.
    pub fn read(&self, values: &ValueTables<S>) -> Result<Vec<S>, EquationError> {
        self.unknowns
            .iter()
            .map(|u| {
                let v = match *u {
                    Unknown::Acting { x, r } => values.u_a(x, r, self.y, self.w),
                    Unknown::NonActing { x, r_tilde, z } => values.u_na(x, r_tilde, z, self.y, self.w),
                };
                v.cloned().ok_or_else(|| EquationError::MissingValue(format!("{u:?} at ({}, {})", self.y, self.w)))
            })
            .collect()
    }

    /// Largest `|u_i - (M u)_i - c_i|`.
    pub fn residual(&self, u: &[S]) -> S {
        let mut worst = S::zero();
        for (i, row) in self.m.iter().enumerate() {
            let mut r = u[i].clone() - self.c[i].clone();
            for (mij, uj) in row.iter().zip(u) {
                if !mij.is_zero() {
                    r = r - mij.clone() * uj.clone();
                }
            }
            let r = r.abs();
            if r > worst {
                worst = r;
            }
        }
        worst
    }

    /// Solves the system. Unknowns in closed classes without an exit are set
    /// to zero first; any remaining singular pivot is an error.
    pub fn solve(&self) -> Result<Vec<S>, EquationError> {
        let n = self.unknowns.len();
        let mut live = self.exit.clone();
        loop {
            let mut grew = false;
            for i in 0..n {
                if !live[i] && (0..n).any(|j| live[j] && !self.m[i][j].is_zero()) {
                    live[i] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let idx: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
        let k = idx.len();
        let mut a: Vec<Vec<S>> = idx
            .iter()
            .map(|&i| {
                let mut row: Vec<S> = idx
                    .iter()
                    .map(|&j| {
                        let diag = if i == j { S::one() } else { S::zero() };
                        diag - self.m[i][j].clone()
                    })
                    .collect();
                row.push(self.c[i].clone());
                row
            })
            .collect();

        for col in 0..k {
            let pivot = if S::is_exact() {
                (col..k).find(|&r| !a[r][col].is_zero())
            } else {
                (col..k)
                    .filter(|&r| !a[r][col].is_zero())
                    .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            };
            let Some(pivot) = pivot else {
                return Err(EquationError::Singular { y: self.y, w: self.w });
            };
            a.swap(col, pivot);
            let pv = a[col][col].clone();
            for j in col..=k {
                let v = std::mem::replace(&mut a[col][j], S::zero());
                a[col][j] = v / pv.clone();
            }
            for r in 0..k {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in col..=k {
                    if a[col][j].is_zero() {
                        continue;
                    }
                    let v = std::mem::replace(&mut a[r][j], S::zero());
                    a[r][j] = v - f.clone() * a[col][j].clone();
                }
            }
        }

        let mut out = vec![S::zero(); n];
        for (row, &i) in idx.iter().enumerate() {
            out[i] = a[row][k].clone();
        }
        Ok(out)
    }
}

fn missing_a(x: Signal, r: u8, y: i32, w: i32) -> EquationError {
    EquationError::MissingValue(format!("U_a(x={}, r={r}, y={y}, w={w})", x.value()))
}

fn missing_na(x: Signal, rt: u8, z: u8, y: i32, w: i32) -> EquationError {
    EquationError::MissingValue(format!("U_na^{rt}(x={}, z={z}, y={y}, w={w})", x.value()))
}

fn get_a<S: Scalar>(v: &ValueTables<S>, x: Signal, r: u8, y: i32, w: i32) -> Result<S, EquationError> {
    v.u_a(x, r, y, w).cloned().ok_or_else(|| missing_a(x, r, y, w))
}

fn get_na<S: Scalar>(v: &ValueTables<S>, x: Signal, rt: u8, z: u8, y: i32, w: i32) -> Result<S, EquationError> {
    v.u_na(x, rt, z, y, w).cloned().ok_or_else(|| missing_na(x, rt, z, y, w))
}

/// `k [U_a + f U_na^r(0) + s U_na^r(1)]` at a cell of the next layer.
fn next_layer_mix<S: Scalar>(
    kernel: &Kernel<S>,
    values: &ValueTables<S>,
    x: Signal,
    r: u8,
    y: i32,
    w: i32,
    n_free: i32,
    n_fixed: i32,
) -> Result<S, EquationError> {
    let mut acc = get_a(values, x, r, y, w)?;
    if n_free > 0 {
        acc = acc + S::from_int(n_free.into()) * get_na(values, x, r, 0, y, w)?;
    }
    if n_fixed > 0 {
        acc = acc + S::from_int(n_fixed.into()) * get_na(values, x, r, 1, y, w)?;
    }
    Ok(kernel.step().clone() * acc)
}

/// Equations of group `(x, r)` in cell `(y, w)`.
///
/// `g_free` is the prescription of a free acting player at `(0, y, w)` and
/// `g_self` the evaluator's own prescription at `(r, y, w)`; either may be
/// `None` when the corresponding state is infeasible.
pub fn assemble_group<S: Scalar>(
    kernel: &Kernel<S>,
    values: &ValueTables<S>,
    x: Signal,
    r: u8,
    y: i32,
    w: i32,
    g_free: Option<Gamma>,
    g_self: Option<Gamma>,
) -> Result<CellSystem<S>, EquationError> {
    let n = kernel.n();
    let ni = n as i32;
    let ri = i32::from(r);
    let free = ni - w - 1 + ri;
    let fixed = w - ri;
    let k = kernel.step().clone();
    let mut sys = CellSystem::empty(y, w);

    let ia = is_feasible_acting(r, y, w, n).then(|| sys.push(Unknown::Acting { x, r }));
    let i0 = is_feasible_nonacting(r, 0, y, w, n).then(|| sys.push(Unknown::NonActing { x, r_tilde: r, z: 0 }));
    let i1 = is_feasible_nonacting(r, 1, y, w, n).then(|| sys.push(Unknown::NonActing { x, r_tilde: r, z: 1 }));
    let need = |i: Option<usize>, rt: u8, z: u8| i.ok_or_else(|| missing_na(x, rt, z, y, w));

    if let Some(ia) = ia {
        let g = g_self.ok_or(EquationError::MissingStrategy { r, y, w })?;
        if g.action(x) == 1 {
            sys.add_c(ia, kernel.reward(y + ri + x.value()));
        } else if r == 0 && g == Gamma::Reveal {
            let v = next_layer_mix(kernel, values, x, 1, y - 1, w + 1, free, fixed)?;
            sys.add_c(ia, v);
        } else {
            sys.add_m(ia, ia, k.clone());
            if free > 0 {
                sys.add_m(ia, need(i0, r, 0)?, k.clone() * S::from_int(free.into()));
            }
            if fixed > 0 {
                sys.add_m(ia, need(i1, r, 1)?, k.clone() * S::from_int(fixed.into()));
            }
        }
    }

    if let Some(i1) = i1 {
        let ia = ia.ok_or_else(|| missing_a(x, r, y, w))?;
        sys.add_m(i1, ia, k.clone());
        if fixed > 0 {
            sys.add_m(i1, i1, k.clone() * S::from_int(fixed.into()));
        }
        if free > 0 {
            sys.add_m(i1, need(i0, r, 0)?, k.clone() * S::from_int(free.into()));
        }
    }

    if let Some(i0) = i0 {
        let ia = ia.ok_or_else(|| missing_a(x, r, y, w))?;
        let g0 = g_free.ok_or(EquationError::MissingStrategy { r: 0, y, w })?;
        if g0 == Gamma::Wait {
            sys.add_m(i0, ia, k.clone());
            sys.add_m(i0, i0, k.clone() * S::from_int((free).into()));
            if fixed > 0 {
                sys.add_m(i0, need(i1, r, 1)?, k.clone() * S::from_int(fixed.into()));
            }
        } else {
            let e = y + ri + x.value();
            let mut acc = S::zero();
            for xn in Signal::BOTH {
                let a = g0.action(xn);
                let y2 = if g0 == Gamma::Reveal { y + 2 * i32::from(a) - 1 } else { y };
                let mix = next_layer_mix(kernel, values, x, r, y2, w + 1, free - 1, fixed + 1)?;
                acc = acc + kernel.posterior(xn, e) * mix;
            }
            sys.add_c(i0, acc);
        }
    }
    Ok(sys)
}

/// Full cell system: the four groups stacked in the order `x = +1, -1` by `r = 0, 1`.
pub fn assemble_cell<S: Scalar>(
    kernel: &Kernel<S>,
    values: &ValueTables<S>,
    profile: &StrategyProfile,
    y: i32,
    w: i32,
) -> Result<CellSystem<S>, EquationError> {
    let g_free = profile.get(0, y, w);
    let mut sys = CellSystem::empty(y, w);
    for x in Signal::BOTH {
        for r in 0..=1u8 {
            let g_self = profile.get(r, y, w);
            if is_feasible_acting(r, y, w, kernel.n()) && g_self.is_none() {
                return Err(EquationError::MissingStrategy { r, y, w });
            }
            sys.append(assemble_group(kernel, values, x, r, y, w, g_free, g_self)?);
        }
    }
    Ok(sys)
}

/// Writes a solved system back into the tables.
pub fn store<S: Scalar>(values: &mut ValueTables<S>, sys: &CellSystem<S>, sol: Vec<S>) {
    for (u, v) in sys.unknowns.iter().zip(sol) {
        match *u {
            Unknown::Acting { x, r } => values.set_a(x, r, sys.y, sys.w, v),
            Unknown::NonActing { x, r_tilde, z } => values.set_na(x, r_tilde, z, sys.y, sys.w, v),
        }
    }
}

/// Value of waiting for the acting player at `(r, y, w)` with signal `x`
/// when the prescription used to interpret their wait is `gamma`.
/// In-cell values are read from `values`, so they must already reflect `gamma`.
pub fn continuation_value<S: Scalar>(
    kernel: &Kernel<S>,
    values: &ValueTables<S>,
    x: Signal,
    r: u8,
    y: i32,
    w: i32,
    gamma: Gamma,
) -> Result<S, EquationError> {
    let ni = kernel.n() as i32;
    let ri = i32::from(r);
    let free = ni - w - 1 + ri;
    let fixed = w - ri;
    if free < 0 || fixed < 0 {
        return Err(EquationError::MissingValue(format!("acting state (r={r}, y={y}, w={w})")));
    }
    if r == 0 && gamma == Gamma::Reveal {
        next_layer_mix(kernel, values, x, 1, y - 1, w + 1, free, fixed)
    } else {
        next_layer_mix(kernel, values, x, r, y, w, free, fixed)
    }
}

/// Like [`continuation_value`] but reads in-cell values from a solved group
/// instead of the tables.
pub fn continuation_from_group<S: Scalar>(
    kernel: &Kernel<S>,
    values: &ValueTables<S>,
    sys: &CellSystem<S>,
    sol: &[S],
    x: Signal,
    r: u8,
    gamma: Gamma,
) -> Result<S, EquationError> {
    let (y, w) = (sys.y, sys.w);
    let ni = kernel.n() as i32;
    let ri = i32::from(r);
    let free = ni - w - 1 + ri;
    let fixed = w - ri;
    if r == 0 && gamma == Gamma::Reveal {
        return next_layer_mix(kernel, values, x, 1, y - 1, w + 1, free, fixed);
    }
    let find = |u: Unknown| {
        sys.unknowns
            .iter()
            .position(|&v| v == u)
            .map(|i| sol[i].clone())
            .ok_or_else(|| EquationError::MissingValue(format!("{u:?} at (y={y}, w={w})")))
    };
    let mut acc = find(Unknown::Acting { x, r })?;
    if free > 0 {
        acc = acc + S::from_int(free.into()) * find(Unknown::NonActing { x, r_tilde: r, z: 0 })?;
    }
    if fixed > 0 {
        acc = acc + S::from_int(fixed.into()) * find(Unknown::NonActing { x, r_tilde: r, z: 1 })?;
    }
    Ok(kernel.step().clone() * acc)
}
