use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sensing stencil of the K-nearest-neighbor rules. Every stencil also
/// contains the cell itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum KnnRule {
    Four,
    #[default]
    Eight,
    Twelve,
}

const CENTER: [(isize, isize); 1] = [(0, 0)];
const ORTHO: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const DIAG: [(isize, isize); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
const ORTHO2: [(isize, isize); 4] = [(-2, 0), (0, -2), (0, 2), (2, 0)];

/// 8-connected movement offsets.
pub const MOORE: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

impl KnnRule {
    pub const ALL: [KnnRule; 3] = [KnnRule::Four, KnnRule::Eight, KnnRule::Twelve];

    pub fn count(self) -> u8 {
        match self {
            KnnRule::Four => 4,
            KnnRule::Eight => 8,
            KnnRule::Twelve => 12,
        }
    }

    /// Offsets of the neighbors plus the center cell.
    pub fn offsets(self) -> impl Iterator<Item = (isize, isize)> {
        let (diag, far): (&[_], &[_]) = match self {
            KnnRule::Four => (&[], &[]),
            KnnRule::Eight => (&DIAG, &[]),
            KnnRule::Twelve => (&DIAG, &ORTHO2),
        };
        CENTER.iter().chain(ORTHO.iter()).chain(diag).chain(far).copied()
    }

    /// Chebyshev radius of the stencil.
    pub fn reach(self) -> usize {
        match self {
            KnnRule::Twelve => 2,
            _ => 1,
        }
    }

    /// In-grid cells of the stencil around `(row, col)`.
    pub fn cells(self, n_rows: usize, n_cols: usize, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> {
        self.offsets().filter_map(move |(dr, dc)| {
            let (r, c) = (row as isize + dr, col as isize + dc);
            (r >= 0 && c >= 0 && (r as usize) < n_rows && (c as usize) < n_cols).then_some((r as usize, c as usize))
        })
    }
}

impl TryFrom<u8> for KnnRule {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            4 => Ok(KnnRule::Four),
            8 => Ok(KnnRule::Eight),
            12 => Ok(KnnRule::Twelve),
            other => Err(Error::Config(format!("knn rule must be 4, 8 or 12, got {other}"))),
        }
    }
}

impl From<KnnRule> for u8 {
    fn from(r: KnnRule) -> u8 {
        r.count()
    }
}

impl fmt::Display for KnnRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for KnnRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: u8 = s.trim().parse().map_err(|_| Error::Config(format!("knn rule must be 4, 8 or 12, got `{s}`")))?;
        KnnRule::try_from(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn stencil_sizes_include_center() {
        assert_eq!(KnnRule::Four.offsets().count(), 5);
        assert_eq!(KnnRule::Eight.offsets().count(), 9);
        assert_eq!(KnnRule::Twelve.offsets().count(), 13);
        for rule in KnnRule::ALL {
            let set: HashSet<_> = rule.offsets().collect();
            assert_eq!(set.len(), rule.count() as usize + 1);
            assert!(set.contains(&(0, 0)));
        }
    }

    #[test]
    fn corner_clips() {
        assert_eq!(KnnRule::Eight.cells(5, 5, 0, 0).count(), 4);
        assert_eq!(KnnRule::Twelve.cells(5, 5, 0, 0).count(), 6);
    }

    #[test]
    fn parse_rules() {
        assert_eq!("12".parse::<KnnRule>().unwrap(), KnnRule::Twelve);
        assert!("6".parse::<KnnRule>().is_err());
        assert_eq!(serde_json::to_string(&KnnRule::Four).unwrap(), "4");
        assert!(serde_json::from_str::<KnnRule>("5").is_err());
    }
}
