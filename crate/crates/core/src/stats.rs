//! Paired significance test, correlations and the M·S quintile table.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Largest number of nonzero differences handled by exact enumeration.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`; tied values share the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn signed_ranks(deltas: &[f64]) -> Result<(Vec<f64>, f64)> {
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite difference".into()));
    }
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::TooFewDifferences { needed: 1, got: 0 });
    }
    let ranks = average_ranks(&nonzero.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus = nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    Ok((ranks, w_plus))
}

/// Wilcoxon signed-rank test. Zero differences are dropped and tied
/// magnitudes get average ranks. Exact for up to 20 nonzero differences,
/// continuity-corrected normal approximation above.
pub fn wilcoxon_signed_rank(deltas: &[f64]) -> Result<WilcoxonResult> {
    let (ranks, w_plus) = signed_ranks(deltas)?;
    if ranks.len() <= EXACT_MAX_N {
        exact_from_ranks(&ranks, w_plus)
    } else {
        Ok(normal_from_ranks(&ranks, w_plus))
    }
}

/// Exact two-sided p-value regardless of `n`.
pub fn wilcoxon_exact(deltas: &[f64]) -> Result<WilcoxonResult> {
    let (ranks, w_plus) = signed_ranks(deltas)?;
    exact_from_ranks(&ranks, w_plus)
}

/// Normal approximation regardless of `n`.
pub fn wilcoxon_normal(deltas: &[f64]) -> Result<WilcoxonResult> {
    let (ranks, w_plus) = signed_ranks(deltas)?;
    Ok(normal_from_ranks(&ranks, w_plus))
}

fn exact_from_ranks(ranks: &[f64], w_plus: f64) -> Result<WilcoxonResult> {
    // Doubled average ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    if ranks.len() > 60 {
        return Err(Error::InvalidArgument("exact test limited to 60 differences".into()));
    }
    let mut dist = vec![0f64; total + 1];
    dist[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            dist[s] += dist[s - r];
        }
    }
    let all: f64 = dist.iter().sum();
    let w2 = (2.0 * w_plus).round() as usize;
    let lower: f64 = dist[..=w2].iter().sum::<f64>() / all;
    let upper: f64 = dist[w2..].iter().sum::<f64>() / all;
    Ok(WilcoxonResult {
        statistic: w_plus,
        p_value: (2.0 * lower.min(upper)).min(1.0),
        n: ranks.len(),
        exact: true,
    })
}

fn normal_from_ranks(ranks: &[f64], w_plus: f64) -> WilcoxonResult {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|r| **r == sorted[i]).count();
        let t = j as f64;
        var -= (t * t * t - t) / 48.0;
        i += j;
    }
    let d = w_plus - mean;
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let corrected = (d.abs() - 0.5).max(0.0);
        let z = corrected / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    WilcoxonResult {
        statistic: w_plus,
        p_value,
        n: ranks.len(),
        exact: false,
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value".into()));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Win/tie/loss counts of deltas against zero, exact comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl WinTieLoss {
    pub fn of(deltas: &[f64]) -> Self {
        let mut out = WinTieLoss::default();
        for &d in deltas {
            if d > 0.0 {
                out.wins += 1;
            } else if d < 0.0 {
                out.losses += 1;
            } else {
                out.ties += 1;
            }
        }
        out
    }

    pub fn total(&self) -> usize {
        self.wins + self.ties + self.losses
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuintileRow {
    pub quintile: usize,
    pub size: usize,
    pub ms_min: f64,
    pub ms_max: f64,
    pub mean_delta: f64,
    pub wtl: WinTieLoss,
    /// Input positions of the rows in this group.
    pub members: Vec<usize>,
}

/// Group sizes: `n / 5` each with the whole remainder added to the first
/// (lowest) group.
pub fn quintile_sizes(n: usize) -> Result<[usize; 5]> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 rows, got {n}")));
    }
    let base = n / 5;
    let mut sizes = [base; 5];
    sizes[0] += n % 5;
    Ok(sizes)
}

/// Sorts rows ascending by `ms` (stable) and summarises `deltas` per
/// contiguous quintile.
pub fn quintile_table(ms: &[f64], deltas: &[f64]) -> Result<Vec<QuintileRow>> {
    if ms.len() != deltas.len() {
        return Err(Error::DimensionMismatch {
            expected: ms.len(),
            got: deltas.len(),
        });
    }
    let sizes = quintile_sizes(ms.len())?;
    let mut order: Vec<usize> = (0..ms.len()).collect();
    order.sort_by(|&a, &b| ms[a].total_cmp(&ms[b]));
    let mut rows = Vec::with_capacity(5);
    let mut start = 0;
    for (q, &size) in sizes.iter().enumerate() {
        let members: Vec<usize> = order[start..start + size].to_vec();
        let d: Vec<f64> = members.iter().map(|&i| deltas[i]).collect();
        rows.push(QuintileRow {
            quintile: q + 1,
            size,
            ms_min: ms[members[0]],
            ms_max: ms[*members.last().expect("nonempty")],
            mean_delta: d.iter().sum::<f64>() / size as f64,
            wtl: WinTieLoss::of(&d),
            members,
        });
        start += size;
    }
    Ok(rows)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
