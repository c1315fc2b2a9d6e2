//! Profile files and text renderings.
//!
//! A profile file is JSON with the parameters as exact rationals and one
//! grid of two-character codes per `r`. Row 0 is `y = N` and row `2N` is
//! `y = -N`; column `w` runs from 0 to `N`. Infeasible cells hold `"--"`.

use serde::{Deserialize, Serialize};
use spbe_core::game::{is_feasible_acting, GameParams, Gamma};
use spbe_core::rational::{format_rational, parse_rational};
use spbe_core::StrategyProfile;

use crate::CliError;

pub const INFEASIBLE: &str = "--";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grids {
    pub r0: Vec<Vec<String>>,
    pub r1: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub n: usize,
    pub p: String,
    pub delta: String,
    pub phi: Grids,
}

fn grid(profile: &StrategyProfile, r: u8) -> Vec<Vec<String>> {
    let n = profile.n() as i32;
    (-n..=n)
        .rev()
        .map(|y| {
            (0..=n)
                .map(|w| profile.get(r, y, w).map_or_else(|| INFEASIBLE.to_string(), |g| g.code().to_string()))
                .collect()
        })
        .collect()
}

impl ProfileFile {
    pub fn new(profile: &StrategyProfile, params: &GameParams) -> Self {
        Self {
            n: profile.n(),
            p: format_rational(params.p()),
            delta: format_rational(params.delta()),
            phi: Grids { r0: grid(profile, 0), r1: grid(profile, 1) },
        }
    }

    pub fn params(&self) -> Result<GameParams, CliError> {
        let p = parse_rational(&self.p).map_err(|e| CliError::Schema(format!("field p: {e}")))?;
        let d = parse_rational(&self.delta).map_err(|e| CliError::Schema(format!("field delta: {e}")))?;
        GameParams::new(self.n, p, d).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Rebuilds the profile, rejecting codes on infeasible cells and
    /// missing codes on feasible ones.
    pub fn profile(&self) -> Result<StrategyProfile, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Schema("n must be positive".into()));
        }
        let mut profile = StrategyProfile::empty(n);
        for (r, rows) in [(0u8, &self.phi.r0), (1u8, &self.phi.r1)] {
            if rows.len() != 2 * n + 1 {
                return Err(CliError::Schema(format!("phi.r{r} has {} rows, expected {}", rows.len(), 2 * n + 1)));
            }
            for (i, row) in rows.iter().enumerate() {
                let y = n as i32 - i as i32;
                if row.len() != n + 1 {
                    return Err(CliError::Schema(format!(
                        "phi.r{r} row for y={y} has {} cells, expected {}",
                        row.len(),
                        n + 1
                    )));
                }
                for (w, code) in row.iter().enumerate() {
                    let w = w as i32;
                    let feasible = is_feasible_acting(r, y, w, n);
                    match (feasible, code.as_str()) {
                        (false, INFEASIBLE) => {}
                        (false, c) => {
                            return Err(CliError::Schema(format!("({r},{y},{w}) is infeasible but holds {c:?}")))
                        }
                        (true, c) => {
                            let g = Gamma::from_code(c)
                                .ok_or_else(|| CliError::Schema(format!("({r},{y},{w}) holds unknown code {c:?}")))?;
                            profile.set(r, y, w, g).map_err(|e| CliError::Schema(e.to_string()))?;
                        }
                    }
                }
            }
        }
        Ok(profile)
    }
}

pub fn read_profile(path: &std::path::Path) -> Result<(StrategyProfile, GameParams), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: ProfileFile = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    Ok((file.profile()?, file.params()?))
}

/// One grid per `r`, `y` descending down the rows and `w` ascending across.
pub fn render_ascii(profile: &StrategyProfile) -> String {
    let n = profile.n() as i32;
    let width = n.to_string().len().max(2) + 1;
    let mut out = String::new();
    for r in 0..=1u8 {
        out.push_str(&format!("r = {r}\n"));
        out.push_str(&format!("{:>width$} |", "y\\w"));
        for w in 0..=n {
            out.push_str(&format!(" {w:>2}"));
        }
        out.push('\n');
        for y in (-n..=n).rev() {
            out.push_str(&format!("{y:>width$} |"));
            for w in 0..=n {
                out.push(' ');
                out.push_str(profile.get(r, y, w).map_or(INFEASIBLE, Gamma::code));
            }
            out.push('\n');
        }
        if r == 0 {
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use spbe_core::profiles::{myopic_profile, RowChoice};
    use spbe_core::rational::rat;

    #[test]
    fn ascii_layout() {
        let g = GameParams::new(2, rat(1, 10), rat(1, 2)).unwrap();
        let text = render_ascii(&myopic_profile(&g, RowChoice::Buy));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r = 0");
        assert_eq!(lines[1], "y\\w |  0  1  2");
        assert_eq!(lines[2], "  2 | -- -- --");
        assert_eq!(lines[4], "  0 | 01 01 --");
        assert_eq!(lines[8], "r = 1");
        assert_eq!(lines[14], " -2 | -- -- 00");
    }

    #[test]
    fn code_on_infeasible_cell_is_rejected() {
        let g = GameParams::new(2, rat(1, 10), rat(1, 2)).unwrap();
        let mut file = ProfileFile::new(&myopic_profile(&g, RowChoice::Buy), &g);
        file.phi.r0[0][0] = "11".into();
        assert!(matches!(file.profile(), Err(CliError::Schema(_))));
    }
}
