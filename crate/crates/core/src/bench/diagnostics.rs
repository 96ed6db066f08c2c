//! Held-out tree-vote diagnostics: pattern frequencies, accuracy by region,
//! pattern and predicted class, within-cell spread and the per-point best
//! pattern maps for the 2D geometries.
//!
//! Regions here are 0.2 wide; the weighting itself always uses 0.1.

use serde::{Deserialize, Serialize};

use crate::data::{stratified_kfold, Dataset};
use crate::forest::{uniform_proba, ForestConfig, ForestModel};
use crate::paw::fold_seed;
use crate::pattern::FlipPattern;
use crate::Result;

pub const N_REGIONS: usize = 5;
pub const REGION_WIDTH: f64 = 0.2;
/// Minimum pairs for a cell to enter spread and best-pattern tables.
pub const MIN_CELL: u64 = 30;

type Grid = [[[u64; 2]; FlipPattern::COUNT]; N_REGIONS];

pub fn region(fp: f64) -> usize {
    ((fp.clamp(0.0, 1.0) * N_REGIONS as f64) as usize).min(N_REGIONS - 1)
}

pub fn region_bounds(r: usize) -> (f64, f64) {
    (r as f64 * REGION_WIDTH, (r + 1) as f64 * REGION_WIDTH)
}

/// Correct and total (tree, point) pairs per `(region, pattern, ci)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub correct: Grid,
    pub count: Grid,
}

impl Default for PairCounts {
    fn default() -> Self {
        PairCounts {
            correct: [[[0; 2]; FlipPattern::COUNT]; N_REGIONS],
            count: [[[0; 2]; FlipPattern::COUNT]; N_REGIONS],
        }
    }
}

impl PairCounts {
    pub fn add(&mut self, region: usize, pattern: FlipPattern, class: u8, correct: bool) {
        self.count[region][pattern.index()][class as usize] += 1;
        self.correct[region][pattern.index()][class as usize] += u64::from(correct);
    }

    pub fn merge(&mut self, other: &PairCounts) {
        for r in 0..N_REGIONS {
            for p in 0..FlipPattern::COUNT {
                for c in 0..2 {
                    self.count[r][p][c] += other.count[r][p][c];
                    self.correct[r][p][c] += other.correct[r][p][c];
                }
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.count.iter().flatten().flatten().sum()
    }

    /// Sum over the cells selected by `keep(region, pattern, class)`.
    pub fn sum(&self, keep: impl Fn(usize, usize, usize) -> bool) -> (u64, u64) {
        let (mut c, mut n) = (0, 0);
        for r in 0..N_REGIONS {
            for p in 0..FlipPattern::COUNT {
                for k in 0..2 {
                    if keep(r, p, k) {
                        c += self.correct[r][p][k];
                        n += self.count[r][p][k];
                    }
                }
            }
        }
        (c, n)
    }
}

fn ratio((c, n): (u64, u64)) -> Option<f64> {
    (n > 0).then(|| c as f64 / n as f64)
}

/// The pattern whose trees were most accurate on one held-out point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBest {
    pub index: usize,
    pub x: Vec<f64>,
    pub label: u8,
    pub best: FlipPattern,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDiagnostics {
    pub dataset: String,
    pub counts: PairCounts,
    pub points: Vec<PointBest>,
}

/// Stratified k-fold collection: a forest per fold, every validation point
/// voted on by every tree.
pub fn collect(ds: &Dataset, n_trees: usize, folds: usize, seed: u64) -> Result<DatasetDiagnostics> {
    let mut counts = PairCounts::default();
    let mut points = Vec::with_capacity(ds.n_samples());
    for (k, fold) in stratified_kfold(ds, folds, seed)?.iter().enumerate() {
        let train = ds.subset(&fold.train_indices)?;
        let val = ds.subset(&fold.val_indices)?;
        let forest = ForestModel::fit(&train, &ForestConfig::new(n_trees, fold_seed(seed, k)))?;
        for (j, votes) in forest.votes_batch(&val)?.iter().enumerate() {
            let y = val.label(j);
            let proba = uniform_proba(votes);
            let mut by_pattern = [(0u32, 0u32); FlipPattern::COUNT];
            for v in votes {
                let ok = v.class == y;
                counts.add(region(proba[v.class as usize]), v.pattern, v.class, ok);
                let e = &mut by_pattern[v.pattern.index()];
                e.0 += u32::from(ok);
                e.1 += 1;
            }
            let mut best = (FlipPattern::Noflip, f64::NEG_INFINITY);
            for p in FlipPattern::ALL {
                let (c, n) = by_pattern[p.index()];
                if n > 0 {
                    let acc = f64::from(c) / f64::from(n);
                    if acc > best.1 {
                        best = (p, acc);
                    }
                }
            }
            points.push(PointBest {
                index: fold.val_indices[j],
                x: val.row(j).to_vec(),
                label: y,
                best: best.0,
                accuracy: best.1,
            });
        }
    }
    points.sort_by_key(|p| p.index);
    Ok(DatasetDiagnostics {
        dataset: ds.name().to_string(),
        counts,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub pattern: FlipPattern,
    /// Mean over datasets of the per-dataset share.
    pub mean_share: f64,
    pub pooled_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPatternRow {
    pub region: usize,
    pub lo: f64,
    pub hi: f64,
    pub pattern: FlipPattern,
    pub n: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternClassRow {
    pub pattern: FlipPattern,
    pub class: u8,
    pub n: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub region: usize,
    pub lo: f64,
    pub hi: f64,
    pub class: u8,
    pub n: u64,
    /// Share of all pairs falling in this `(region, ci)`.
    pub share: f64,
    pub marginal: Option<f64>,
    pub best: Option<FlipPattern>,
    pub best_accuracy: Option<f64>,
    pub worst: Option<FlipPattern>,
    pub worst_accuracy: Option<f64>,
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPatternRow {
    pub dataset: String,
    pub region: usize,
    pub class: u8,
    pub best: Option<FlipPattern>,
    pub accuracy: Option<f64>,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticTables {
    pub frequency: Vec<FrequencyRow>,
    pub region_pattern: Vec<RegionPatternRow>,
    pub pattern_class: Vec<PatternClassRow>,
    pub spread: Vec<SpreadRow>,
    pub best_pattern: Vec<BestPatternRow>,
}

/// Best and worst pattern among cells with at least `MIN_CELL` pairs.
fn extremes(counts: &PairCounts, r: usize, c: usize) -> Option<((FlipPattern, f64), (FlipPattern, f64))> {
    let mut eligible = FlipPattern::ALL
        .into_iter()
        .filter(|p| counts.count[r][p.index()][c] >= MIN_CELL)
        .map(|p| (p, counts.correct[r][p.index()][c] as f64 / counts.count[r][p.index()][c] as f64));
    let first = eligible.next()?;
    let (mut best, mut worst) = (first, first);
    for e in eligible {
        if e.1 > best.1 {
            best = e;
        }
        if e.1 < worst.1 {
            worst = e;
        }
    }
    Some((best, worst))
}

pub fn tables(diags: &[DatasetDiagnostics]) -> DiagnosticTables {
    let mut pooled = PairCounts::default();
    for d in diags {
        pooled.merge(&d.counts);
    }
    let total = pooled.total();

    let frequency = FlipPattern::ALL
        .into_iter()
        .map(|p| {
            let shares: Vec<f64> = diags
                .iter()
                .filter(|d| d.counts.total() > 0)
                .map(|d| d.counts.sum(|_, q, _| q == p.index()).1 as f64 / d.counts.total() as f64)
                .collect();
            FrequencyRow {
                pattern: p,
                mean_share: if shares.is_empty() { 0.0 } else { shares.iter().sum::<f64>() / shares.len() as f64 },
                pooled_share: if total == 0 { 0.0 } else { pooled.sum(|_, q, _| q == p.index()).1 as f64 / total as f64 },
            }
        })
        .collect();

    let mut region_pattern = Vec::new();
    for r in 0..N_REGIONS {
        for p in FlipPattern::ALL {
            let cn = pooled.sum(|rr, q, _| rr == r && q == p.index());
            let (lo, hi) = region_bounds(r);
            region_pattern.push(RegionPatternRow {
                region: r,
                lo,
                hi,
                pattern: p,
                n: cn.1,
                accuracy: ratio(cn),
            });
        }
    }

    let mut pattern_class = Vec::new();
    for p in FlipPattern::ALL {
        for c in 0..2usize {
            let cn = pooled.sum(|_, q, k| q == p.index() && k == c);
            pattern_class.push(PatternClassRow {
                pattern: p,
                class: c as u8,
                n: cn.1,
                accuracy: ratio(cn),
            });
        }
    }

    let mut spread = Vec::new();
    for r in 0..N_REGIONS {
        for c in 0..2usize {
            let cn = pooled.sum(|rr, _, k| rr == r && k == c);
            let ext = extremes(&pooled, r, c);
            let (lo, hi) = region_bounds(r);
            spread.push(SpreadRow {
                region: r,
                lo,
                hi,
                class: c as u8,
                n: cn.1,
                share: if total == 0 { 0.0 } else { cn.1 as f64 / total as f64 },
                marginal: ratio(cn),
                best: ext.map(|e| e.0 .0),
                best_accuracy: ext.map(|e| e.0 .1),
                worst: ext.map(|e| e.1 .0),
                worst_accuracy: ext.map(|e| e.1 .1),
                spread: ext.map(|e| e.0 .1 - e.1 .1),
            });
        }
    }

    let mut best_pattern = Vec::new();
    for d in diags {
        for r in 0..N_REGIONS {
            for c in 0..2usize {
                let ext = extremes(&d.counts, r, c);
                best_pattern.push(BestPatternRow {
                    dataset: d.dataset.clone(),
                    region: r,
                    class: c as u8,
                    best: ext.map(|e| e.0 .0),
                    accuracy: ext.map(|e| e.0 .1),
                    n: d.counts.sum(|rr, _, k| rr == r && k == c).1,
                });
            }
        }
    }

    DiagnosticTables {
        frequency,
        region_pattern,
        pattern_class,
        spread,
        best_pattern,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_edges() {
        assert_eq!(region(0.0), 0);
        assert_eq!(region(0.19), 0);
        assert_eq!(region(0.2), 1);
        assert_eq!(region(0.99), 4);
        assert_eq!(region(1.0), 4);
    }

    #[test]
    fn spread_needs_min_cell() {
        let mut c = PairCounts::default();
        for i in 0..40 {
            c.add(4, FlipPattern::Noflip, 0, i < 36);
            c.add(4, FlipPattern::LateSw, 0, i < 20);
        }
        for _ in 0..10 {
            c.add(4, FlipPattern::Other, 0, false);
        }
        let d = DatasetDiagnostics {
            dataset: "x".into(),
            counts: c,
            points: vec![],
        };
        let t = tables(&[d]);
        let row = t.spread.iter().find(|r| r.region == 4 && r.class == 0).unwrap();
        assert_eq!(row.best, Some(FlipPattern::Noflip));
        assert_eq!(row.worst, Some(FlipPattern::LateSw));
        assert!((row.spread.unwrap() - 0.4).abs() < 1e-12);
        let empty = t.spread.iter().find(|r| r.region == 0 && r.class == 1).unwrap();
        assert_eq!(empty.spread, None);
        assert_eq!(empty.marginal, None);
    }
}
