use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed integer interval `[lo, hi]`. Serialized as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameters(format!(
                "empty window [{lo}, {hi}]"
            )));
        }
        Ok(Window { lo, hi })
    }

    /// `[-r, r]`.
    pub fn symmetric(r: i64) -> Self {
        Window { lo: -r, hi: r }
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn contains_all(&self, idx: &[i64]) -> bool {
        idx.iter().all(|&i| self.contains(i))
    }

    /// First index of `idx` outside the window.
    pub fn first_outside(&self, idx: &[i64]) -> Option<i64> {
        idx.iter().copied().find(|&i| !self.contains(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grow(&self, margin: i64) -> Window {
        Window {
            lo: self.lo - margin,
            hi: self.hi + margin,
        }
    }

    pub fn shrink(&self, margin: i64) -> Option<Window> {
        Window::new(self.lo + margin, self.hi - margin).ok()
    }

    pub fn shift(&self, by: i64) -> Window {
        Window {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi
    }
}

impl TryFrom<[i64; 2]> for Window {
    type Error = Error;
    fn try_from(v: [i64; 2]) -> Result<Self> {
        Window::new(v[0], v[1])
    }
}

impl From<Window> for [i64; 2] {
    fn from(w: Window) -> Self {
        [w.lo, w.hi]
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Parses `LO:HI`.
impl FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = parse_range(s)?;
        Window::new(lo, hi)
    }
}

pub fn parse_range(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::Parse(format!("expected LO:HI, got {s:?}"));
    // split at the first ':' that is not a leading sign position
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}
