//! Closed-form equilibrium profiles and structural predicates.

use std::fmt;

use crate::game::{GameParams, Gamma, Signal};
use crate::profile::StrategyProfile;

/// Choice for the `(r = 1, y = 1)` row of the myopic profile, which the
/// value equations leave open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowChoice {
    Buy,
    Reveal,
}

impl RowChoice {
    pub const BOTH: [RowChoice; 2] = [RowChoice::Buy, RowChoice::Reveal];

    pub fn gamma(self) -> Gamma {
        match self {
            RowChoice::Buy => Gamma::Buy,
            RowChoice::Reveal => Gamma::Reveal,
        }
    }
}

/// Wait below `y = -2`, buy above `y = 2`, reveal in between. The `(1, 1, w)`
/// row is set to `y1_r1_choice` for every `w`.
pub fn myopic_profile(params: &GameParams, y1_r1_choice: RowChoice) -> StrategyProfile {
    StrategyProfile::from_fn(params.n(), |r, y, _| match (r, y) {
        (_, y) if y >= 2 => Gamma::Buy,
        (_, y) if y <= -2 => Gamma::Wait,
        (1, 1) => y1_r1_choice.gamma(),
        _ => Gamma::Reveal,
    })
}

/// Profile for `delta = 1`: no free player ever buys without revealing.
pub fn delta1_profile(params: &GameParams) -> StrategyProfile {
    let n = params.n_i32();
    StrategyProfile::from_fn(params.n(), |_, y, w| {
        if y <= -2 {
            Gamma::Wait
        } else if w < n || y <= 0 {
            Gamma::Reveal
        } else {
            Gamma::Buy
        }
    })
}

/// Profile for discounts close to one: reveal while `y + w < N`, then buy.
pub fn large_delta_profile(params: &GameParams) -> StrategyProfile {
    let n = params.n_i32();
    StrategyProfile::from_fn(params.n(), |r, y, w| {
        if y <= -2 {
            Gamma::Wait
        } else if y + w < n {
            Gamma::Reveal
        } else if y >= 2 {
            Gamma::Buy
        } else {
            match (r, y) {
                (0, 1) => Gamma::Reveal,
                (1, 1) => Gamma::Buy,
                _ => Gamma::Reveal,
            }
        }
    })
}

/// A structural property with the cells that break it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: PropertyName,
    pub passed: bool,
    /// `(r, y, w)` witnesses; for threshold checks `w` is the first cell past the break.
    pub witnesses: Vec<(u8, i32, i32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyName {
    /// Wait for `y <= -3`, and for `y = -2` when `r = 0`.
    WaitDeepNegative,
    /// A free player never waits for `y >= 0`.
    NoWaitNonNegative,
    /// A free player reveals at `y = 0`.
    RevealAtZero,
    /// For `r = 0`, `y != -1`: a row is all-wait or never waits.
    RowWaitOrActive,
    /// Each signal's action switches from 0 to 1 at most once as `w` grows.
    ThresholdInW,
    /// For `r = 0` and fixed `w`, each signal's action is monotone in `y`.
    ThresholdInY,
}

impl fmt::Display for PropertyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PropertyName::WaitDeepNegative => "a:wait-deep-negative",
            PropertyName::NoWaitNonNegative => "b:no-wait-nonnegative",
            PropertyName::RevealAtZero => "c:reveal-at-zero",
            PropertyName::RowWaitOrActive => "d:row-wait-or-active",
            PropertyName::ThresholdInW => "e:threshold-in-w",
            PropertyName::ThresholdInY => "f:threshold-in-y",
        };
        f.write_str(s)
    }
}

fn result(name: PropertyName, witnesses: Vec<(u8, i32, i32)>) -> PropertyResult {
    PropertyResult { name, passed: witnesses.is_empty(), witnesses }
}

/// Evaluates every `PropertyName` on the feasible cells of `profile`.
pub fn structural_check(profile: &StrategyProfile) -> Vec<PropertyResult> {
    let n = profile.n() as i32;
    let cells: Vec<_> = profile.entries().filter_map(|(r, y, w, g)| g.map(|g| (r, y, w, g))).collect();

    let a = cells
        .iter()
        .filter(|&&(r, y, _, g)| (y <= -3 || (y == -2 && r == 0)) && g != Gamma::Wait)
        .map(|&(r, y, w, _)| (r, y, w))
        .collect();
    let b = cells
        .iter()
        .filter(|&&(r, y, _, g)| r == 0 && y >= 0 && g == Gamma::Wait)
        .map(|&(r, y, w, _)| (r, y, w))
        .collect();
    let c = cells
        .iter()
        .filter(|&&(r, y, _, g)| r == 0 && y == 0 && g != Gamma::Reveal)
        .map(|&(r, y, w, _)| (r, y, w))
        .collect();

    let mut d = Vec::new();
    for y in -n..=n {
        if y == -1 {
            continue;
        }
        let row: Vec<_> = (0..=n).filter_map(|w| profile.get(0, y, w).map(|g| (w, g))).collect();
        let waits = row.iter().filter(|(_, g)| *g == Gamma::Wait).count();
        if waits > 0 && waits < row.len() {
            d.extend(row.iter().filter(|(_, g)| *g == Gamma::Wait).map(|&(w, _)| (0, y, w)));
        }
    }

    let mut e = Vec::new();
    for r in 0..=1u8 {
        for y in -n..=n {
            for x in Signal::BOTH {
                let mut last: Option<u8> = None;
                for w in 0..=n {
                    let Some(g) = profile.get(r, y, w) else { continue };
                    let act = g.action(x);
                    if last == Some(1) && act == 0 {
                        e.push((r, y, w));
                        break;
                    }
                    last = Some(act);
                }
            }
        }
    }

    let mut f = Vec::new();
    for w in 0..=n {
        for x in Signal::BOTH {
            let mut last: Option<u8> = None;
            for y in -n..=n {
                let Some(g) = profile.get(0, y, w) else { continue };
                let act = g.action(x);
                if last == Some(1) && act == 0 {
                    f.push((0, y, w));
                    break;
                }
                last = Some(act);
            }
        }
    }
    e.sort();
    e.dedup();
    f.sort();
    f.dedup();

    vec![
        result(PropertyName::WaitDeepNegative, a),
        result(PropertyName::NoWaitNonNegative, b),
        result(PropertyName::RevealAtZero, c),
        result(PropertyName::RowWaitOrActive, d),
        result(PropertyName::ThresholdInW, e),
        result(PropertyName::ThresholdInY, f),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn params(n: usize) -> GameParams {
        GameParams::new(n, rat(1, 10), int(0)).unwrap()
    }

    #[test]
    fn myopic_cells() {
        let p = myopic_profile(&params(5), RowChoice::Buy);
        assert_eq!(p.get(0, 3, 3), Some(Gamma::Buy));
        assert_eq!(p.get(0, 0, 4), Some(Gamma::Reveal));
        assert_eq!(p.get(1, -2, 2), Some(Gamma::Wait));
        assert_eq!(p.get(1, 1, 3), Some(Gamma::Buy));
        let p = myopic_profile(&params(5), RowChoice::Reveal);
        assert_eq!(p.get(1, 1, 3), Some(Gamma::Reveal));
        assert_eq!(p.get(1, 0, 2), Some(Gamma::Reveal));
    }

    #[test]
    fn delta1_cells() {
        let n = 6;
        let p = delta1_profile(&params(n));
        assert_eq!(p.get(0, 5, 5), Some(Gamma::Reveal));
        assert_eq!(p.get(1, 2, n as i32), Some(Gamma::Buy));
        assert_eq!(p.get(0, -3, 3), Some(Gamma::Wait));
        assert_eq!(p.get(1, 0, n as i32), Some(Gamma::Reveal));
        assert_eq!(p.get(1, -1, n as i32), Some(Gamma::Reveal));
    }

    #[test]
    fn large_delta_cells() {
        let n = 7;
        let p = large_delta_profile(&params(n as usize));
        assert_eq!(p.get(0, 2, n - 2), Some(Gamma::Buy));
        assert_eq!(p.get(0, 1, n - 1), Some(Gamma::Reveal));
        assert_eq!(p.get(1, 0, n), Some(Gamma::Reveal));
        assert_eq!(p.get(1, 1, n - 1), Some(Gamma::Buy));
        assert_eq!(p.get(0, 2, n - 3), Some(Gamma::Reveal));
    }

    #[test]
    fn broken_reveal_at_zero_is_reported() {
        let mut p = myopic_profile(&params(5), RowChoice::Buy);
        p.set(0, 0, 3, Gamma::Buy).unwrap();
        let c = &structural_check(&p)[2];
        assert_eq!(c.name, PropertyName::RevealAtZero);
        assert!(!c.passed);
        assert_eq!(c.witnesses, vec![(0, 0, 3)]);
    }
}
