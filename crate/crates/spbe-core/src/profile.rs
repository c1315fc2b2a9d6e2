//! Strategy profiles over quadratic states and the value tables that go with them.

use thiserror::Error;

use crate::game::{is_feasible_acting, is_feasible_nonacting, Gamma, Signal};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("state (r={r}, y={y}, w={w}) is not feasible for N={n}")]
    Infeasible { r: u8, y: i32, w: i32, n: usize },
    #[error("profile has no entry at feasible state (r={r}, y={y}, w={w})")]
    Missing { r: u8, y: i32, w: i32 },
}

/// Map from feasible acting states `(r, y, w)` to a partial strategy.
/// Infeasible cells hold no entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    n: usize,
    cells: Vec<Option<Gamma>>,
}

impl StrategyProfile {
    /// Profile with no entries.
    pub fn empty(n: usize) -> Self {
        Self { n, cells: vec![None; 2 * (2 * n + 1) * (n + 1)] }
    }

    /// Fills every feasible cell from `f(r, y, w)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(u8, i32, i32) -> Gamma) -> Self {
        let mut out = Self::empty(n);
        for (r, y, w) in acting_states(n) {
            let idx = out.index(r, y, w);
            out.cells[idx] = Some(f(r, y, w));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, r: u8, y: i32, w: i32) -> usize {
        let n = self.n as i32;
        let rows = (2 * n + 1) as usize;
        let cols = (n + 1) as usize;
        usize::from(r) * rows * cols + (y + n) as usize * cols + w as usize
    }

    pub fn get(&self, r: u8, y: i32, w: i32) -> Option<Gamma> {
        if is_feasible_acting(r, y, w, self.n) {
            self.cells[self.index(r, y, w)]
        } else {
            None
        }
    }

    /// Like [`get`](Self::get) but an error when a feasible cell is empty.
    pub fn require(&self, r: u8, y: i32, w: i32) -> Result<Gamma, ProfileError> {
        self.get(r, y, w).ok_or(ProfileError::Missing { r, y, w })
    }

    pub fn set(&mut self, r: u8, y: i32, w: i32, gamma: Gamma) -> Result<(), ProfileError> {
        if !is_feasible_acting(r, y, w, self.n) {
            return Err(ProfileError::Infeasible { r, y, w, n: self.n });
        }
        let idx = self.index(r, y, w);
        self.cells[idx] = Some(gamma);
        Ok(())
    }

    /// All feasible `(r, y, w, gamma)` entries, `w` descending then `y` ascending.
    pub fn entries(&self) -> impl Iterator<Item = (u8, i32, i32, Option<Gamma>)> + '_ {
        acting_states(self.n).map(move |(r, y, w)| (r, y, w, self.get(r, y, w)))
    }

    pub fn is_total(&self) -> bool {
        self.entries().all(|(.., g)| g.is_some())
    }

    pub fn check_total(&self) -> Result<(), ProfileError> {
        match self.entries().find(|(.., g)| g.is_none()) {
            Some((r, y, w, _)) => Err(ProfileError::Missing { r, y, w }),
            None => Ok(()),
        }
    }

    /// Cells where the two profiles disagree.
    pub fn diff(&self, other: &StrategyProfile) -> Vec<(u8, i32, i32, Option<Gamma>, Option<Gamma>)> {
        assert_eq!(self.n, other.n, "profiles for different N");
        self.entries()
            .filter_map(|(r, y, w, g)| {
                let h = other.get(r, y, w);
                (g != h).then_some((r, y, w, g, h))
            })
            .collect()
    }
}

/// Every feasible acting state, `w` descending, then `y` ascending, then `r`.
pub fn acting_states(n: usize) -> impl Iterator<Item = (u8, i32, i32)> {
    let ni = n as i32;
    (0..=ni).rev().flat_map(move |w| {
        (-ni..=ni).flat_map(move |y| {
            [0u8, 1].into_iter().filter_map(move |r| is_feasible_acting(r, y, w, n).then_some((r, y, w)))
        })
    })
}

/// Value functions of the acting and non-acting players.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables<S> {
    n: usize,
    u_a: Vec<Option<S>>,
    u_na: Vec<Option<S>>,
}

impl<S: Scalar> ValueTables<S> {
    pub fn new(n: usize) -> Self {
        let cells = (2 * n + 1) * (n + 1);
        Self { n, u_a: vec![None; 4 * cells], u_na: vec![None; 8 * cells] }
    }

    /// Zero at every feasible entry, the all-wait fixed point.
    pub fn zeros(n: usize) -> Self {
        let mut t = Self::new(n);
        let ni = n as i32;
        for w in 0..=ni {
            for y in -ni..=ni {
                for x in Signal::BOTH {
                    for r in 0..=1u8 {
                        if is_feasible_acting(r, y, w, n) {
                            t.set_a(x, r, y, w, S::zero());
                        }
                        for z in 0..=1u8 {
                            if is_feasible_nonacting(r, z, y, w, n) {
                                t.set_na(x, r, z, y, w, S::zero());
                            }
                        }
                    }
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn cell(&self, y: i32, w: i32) -> usize {
        let n = self.n as i32;
        (y + n) as usize * (self.n + 1) + w as usize
    }

    fn idx_a(&self, x: Signal, r: u8, y: i32, w: i32) -> usize {
        (x.index() * 2 + usize::from(r)) * (2 * self.n + 1) * (self.n + 1) + self.cell(y, w)
    }

    fn idx_na(&self, x: Signal, rt: u8, z: u8, y: i32, w: i32) -> usize {
        ((x.index() * 2 + usize::from(rt)) * 2 + usize::from(z)) * (2 * self.n + 1) * (self.n + 1) + self.cell(y, w)
    }

    pub fn u_a(&self, x: Signal, r: u8, y: i32, w: i32) -> Option<&S> {
        if !is_feasible_acting(r, y, w, self.n) {
            return None;
        }
        self.u_a[self.idx_a(x, r, y, w)].as_ref()
    }

    pub fn u_na(&self, x: Signal, rt: u8, z: u8, y: i32, w: i32) -> Option<&S> {
        if !is_feasible_nonacting(rt, z, y, w, self.n) {
            return None;
        }
        self.u_na[self.idx_na(x, rt, z, y, w)].as_ref()
    }

    pub fn set_a(&mut self, x: Signal, r: u8, y: i32, w: i32, v: S) {
        debug_assert!(is_feasible_acting(r, y, w, self.n));
        let i = self.idx_a(x, r, y, w);
        self.u_a[i] = Some(v);
    }

    pub fn set_na(&mut self, x: Signal, rt: u8, z: u8, y: i32, w: i32, v: S) {
        debug_assert!(is_feasible_nonacting(rt, z, y, w, self.n));
        let i = self.idx_na(x, rt, z, y, w);
        self.u_na[i] = Some(v);
    }

    /// Stored entries, acting first: `(is_acting, x, r, z, y, w, value)`.
    /// `z` is meaningless for acting entries and reported as 0.
    pub fn entries(&self) -> Vec<(bool, Signal, u8, u8, i32, i32, &S)> {
        let ni = self.n as i32;
        let mut out = Vec::new();
        for w in (0..=ni).rev() {
            for y in -ni..=ni {
                for x in Signal::BOTH {
                    for r in 0..=1u8 {
                        if let Some(v) = self.u_a(x, r, y, w) {
                            out.push((true, x, r, 0, y, w, v));
                        }
                        for z in 0..=1u8 {
                            if let Some(v) = self.u_na(x, r, z, y, w) {
                                out.push((false, x, r, z, y, w, v));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ValueTables<T> {
        ValueTables {
            n: self.n,
            u_a: self.u_a.iter().map(|v| v.as_ref().map(&f)).collect(),
            u_na: self.u_na.iter().map(|v| v.as_ref().map(&f)).collect(),
        }
    }

    pub fn to_f64(&self) -> ValueTables<f64> {
        self.map(|v| v.as_f64())
    }

    /// Largest absolute difference over entries present in both tables.
    pub fn max_abs_diff(&self, other: &ValueTables<S>) -> f64 {
        let pairs = self.u_a.iter().zip(&other.u_a).chain(self.u_na.iter().zip(&other.u_na));
        pairs
            .filter_map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some((a.clone() - b.clone()).abs().as_f64()),
                (None, None) => None,
                _ => Some(f64::INFINITY),
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infeasible_cells_stay_empty() {
        let mut p = StrategyProfile::from_fn(3, |_, _, _| Gamma::Wait);
        assert!(p.is_total());
        assert_eq!(p.get(0, 0, 3), None);
        assert!(p.set(0, 0, 3, Gamma::Buy).is_err());
        p.set(0, 0, 2, Gamma::Buy).unwrap();
        assert_eq!(p.get(0, 0, 2), Some(Gamma::Buy));
        assert_eq!(p.diff(&StrategyProfile::from_fn(3, |_, _, _| Gamma::Wait)).len(), 1);
    }

    #[test]
    fn state_order_is_w_descending() {
        let ws: Vec<i32> = acting_states(4).map(|(_, _, w)| w).collect();
        assert!(ws.windows(2).all(|p| p[0] >= p[1]));
        assert_eq!(*ws.first().unwrap(), 4);
    }

    #[test]
    fn tables_store_by_feasible_key() {
        let mut t = ValueTables::<f64>::zeros(3);
        assert_eq!(t.u_a(Signal::Plus, 0, 0, 0), Some(&0.0));
        assert_eq!(t.u_a(Signal::Plus, 0, 0, 3), None);
        t.set_na(Signal::Minus, 1, 0, -1, 1, 0.25);
        assert_eq!(t.u_na(Signal::Minus, 1, 0, -1, 1), Some(&0.25));
        assert_eq!(t.max_abs_diff(&ValueTables::zeros(3)), 0.25);
    }
}
