//! Flip-pattern taxonomy for node-majority label sequences.
//!
//! A flip is a position where the majority label changes from one node to
//! the next along a root-to-leaf path. Flip positions are normalised by the
//! path depth (`i / d` for the flip entering node `i`), so a flip at the leaf
//! sits at exactly 1.0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EARLY: f64 = 1.0 / 3.0;
const LATE: f64 = 2.0 / 3.0;

/// The six mutually exclusive path shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipPattern {
    /// No flips.
    Noflip,
    /// Single-direction switching that starts in the first third and ends
    /// before the last third.
    EarlySw,
    /// Single-direction switching that starts in the last third.
    LateSw,
    /// Two or more reversals, or one reversal ending in the last third.
    Oscillat,
    /// Exactly one reversal, ending before the last third.
    Recover,
    /// Remaining single-direction paths.
    Other,
}

impl FlipPattern {
    pub const COUNT: usize = 6;

    pub const ALL: [FlipPattern; 6] = [
        FlipPattern::Noflip,
        FlipPattern::EarlySw,
        FlipPattern::LateSw,
        FlipPattern::Oscillat,
        FlipPattern::Recover,
        FlipPattern::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlipPattern::Noflip => "noflip",
            FlipPattern::EarlySw => "early_sw",
            FlipPattern::LateSw => "late_sw",
            FlipPattern::Oscillat => "oscillat",
            FlipPattern::Recover => "recover",
            FlipPattern::Other => "other",
        }
    }
}

impl fmt::Display for FlipPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlipPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FlipPattern::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown flip pattern `{s}`")))
    }
}

/// Flip statistics of one path label sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipStats {
    /// Normalised flip positions, strictly increasing in `(0, 1]`.
    pub positions: Vec<f64>,
    /// Number of direction reversals between consecutive flips.
    pub reversals: usize,
    /// Path depth `d` (sequence length minus one).
    pub depth: usize,
}

impl FlipStats {
    /// Flip count `k`.
    pub fn flips(&self) -> usize {
        self.positions.len()
    }

    /// `k / d`; zero for a root-only path.
    pub fn flip_rate(&self) -> f64 {
        if self.depth == 0 {
            0.0
        } else {
            self.flips() as f64 / self.depth as f64
        }
    }

    pub fn classify(&self) -> FlipPattern {
        classify(self)
    }
}

/// Flip statistics of a node-majority label sequence.
pub fn flip_stats(labels: &[u8]) -> Result<FlipStats> {
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    let depth = labels.len() - 1;
    let mut positions = Vec::new();
    let mut reversals = 0;
    let mut last_direction: Option<(u8, u8)> = None;
    for (i, pair) in labels.windows(2).enumerate() {
        if pair[0] != pair[1] {
            positions.push((i + 1) as f64 / depth as f64);
            let direction = (pair[0], pair[1]);
            if let Some(prev) = last_direction {
                if prev != direction {
                    reversals += 1;
                }
            }
            last_direction = Some(direction);
        }
    }
    Ok(FlipStats {
        positions,
        reversals,
        depth,
    })
}

/// Assigns the flip pattern. Positions exactly at 1/3 or 2/3 fail the strict
/// early/late inequalities and fall through to `Other`.
pub fn classify(stats: &FlipStats) -> FlipPattern {
    let (first, last) = match (stats.positions.first(), stats.positions.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return FlipPattern::Noflip,
    };
    match stats.reversals {
        0 if first < EARLY && last < LATE => FlipPattern::EarlySw,
        0 if first > LATE => FlipPattern::LateSw,
        0 => FlipPattern::Other,
        1 if last < LATE => FlipPattern::Recover,
        _ => FlipPattern::Oscillat,
    }
}

/// Pattern of a label sequence in one call.
pub fn pattern_of(labels: &[u8]) -> Result<FlipPattern> {
    flip_stats(labels).map(|s| classify(&s))
}
