//! Path-based adaptive weighting.
//!
//! Every tree vote is keyed by a cell `(pb, pat, ci)`: the 0.1-wide bucket of
//! the forest's probability for the tree's predicted class, the flip pattern
//! of the leaf, and the predicted class. A weight table learned on held-out
//! votes stores, per cell, the cell accuracy divided by the accuracy of the
//! whole `(pb, ci)` slice, so the count-weighted mean weight of every slice
//! is one. Sparse cells (`N < min_n`) keep weight one.
//!
//! Also here: the out-of-bag table variant, the naive `1 - flip_rate`
//! ablation, the boundary mass / spread indicators, and weight amplification
//! with the amplification factor chosen on the held-out votes.

use serde::{Deserialize, Serialize};

use crate::data::{stratified_kfold, Dataset};
use crate::forest::{argmax, uniform_proba, weighted_proba, ForestConfig, ForestModel, VoteRecord};
use crate::pattern::FlipPattern;
use crate::{Error, Result};

pub const N_BUCKETS: usize = 10;
pub const N_PATTERNS: usize = FlipPattern::COUNT;
pub const N_CLASSES: usize = 2;
pub const N_CELLS: usize = N_BUCKETS * N_PATTERNS * N_CLASSES;
/// Cells observed fewer times than this keep weight one.
pub const MIN_N: u64 = 30;
/// Lower clamp applied to amplified weights.
pub const WEIGHT_FLOOR: f64 = 0.01;
/// Winning-class OOB probability window that defines the boundary set.
pub const BOUNDARY_WINDOW: (f64, f64) = (0.4, 0.6);
/// Minimum (tree, sample) pairs for a pattern to enter the boundary spread.
pub const SPREAD_MIN_CELL: usize = 10;
pub const DEFAULT_K_CANDIDATES: [u32; 4] = [0, 10, 20, 30];

type Grid<T> = [[[T; N_CLASSES]; N_PATTERNS]; N_BUCKETS];

/// Forest-probability bucket: `floor(10 * fp)`, with 1.0 in the last bucket.
pub fn bucket(fp: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&fp) {
        return Err(Error::InvalidArgument(format!("probability {fp} not in [0, 1]")));
    }
    Ok(((fp * N_BUCKETS as f64) as usize).min(N_BUCKETS - 1))
}

#[inline]
fn bucket_unchecked(fp: f64) -> usize {
    ((fp.clamp(0.0, 1.0) * N_BUCKETS as f64) as usize).min(N_BUCKETS - 1)
}

/// A `(pb, pat, ci)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub bucket: usize,
    pub pattern: FlipPattern,
    pub class: u8,
}

impl Cell {
    pub fn flat(self) -> usize {
        (self.bucket * N_PATTERNS + self.pattern.index()) * N_CLASSES + self.class as usize
    }

    pub fn from_flat(i: usize) -> Cell {
        Cell {
            bucket: i / (N_PATTERNS * N_CLASSES),
            pattern: FlipPattern::from_index((i / N_CLASSES) % N_PATTERNS).expect("index < 6"),
            class: (i % N_CLASSES) as u8,
        }
    }

    /// Cell of one vote given the forest's class distribution for the sample.
    #[inline]
    pub fn of_vote(vote: &VoteRecord, forest_proba: &[f64; 2]) -> Cell {
        Cell {
            bucket: bucket_unchecked(forest_proba[vote.class as usize]),
            pattern: vote.pattern,
            class: vote.class,
        }
    }
}

/// Correct and total vote counts per cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub correct: Grid<u64>,
    pub count: Grid<u64>,
}

impl Default for CellCounts {
    fn default() -> Self {
        CellCounts {
            correct: [[[0; N_CLASSES]; N_PATTERNS]; N_BUCKETS],
            count: [[[0; N_CLASSES]; N_PATTERNS]; N_BUCKETS],
        }
    }
}

impl CellCounts {
    pub fn add(&mut self, cell: Cell, correct: bool) {
        self.add_many(cell, 1, u64::from(correct));
    }

    pub fn add_many(&mut self, cell: Cell, count: u64, correct: u64) {
        let (b, p, c) = (cell.bucket, cell.pattern.index(), cell.class as usize);
        self.count[b][p][c] += count;
        self.correct[b][p][c] += correct;
    }

    pub fn merge(&mut self, other: &CellCounts) {
        for b in 0..N_BUCKETS {
            for p in 0..N_PATTERNS {
                for c in 0..N_CLASSES {
                    self.count[b][p][c] += other.count[b][p][c];
                    self.correct[b][p][c] += other.correct[b][p][c];
                }
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.count.iter().flatten().flatten().sum()
    }
}

/// Which held-out votes a weight table was estimated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightVariant {
    /// Stratified k-fold validation votes of inner forests.
    Cv,
    /// Out-of-bag votes of the deployed forest.
    Oob,
}

impl std::str::FromStr for WeightVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv" => Ok(WeightVariant::Cv),
            "oob" => Ok(WeightVariant::Oob),
            other => Err(Error::InvalidArgument(format!("unknown weight variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub variant: WeightVariant,
    pub seed: u64,
    pub folds: Option<usize>,
    pub trees: usize,
    /// Amplification factor applied after estimation, if any.
    pub alpha: Option<f64>,
}

/// The `10 x 6 x 2` weight lookup with its sufficient statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub dims: [usize; 3],
    pub min_n: u64,
    #[serde(rename = "C")]
    pub correct: Grid<u64>,
    #[serde(rename = "N")]
    pub count: Grid<u64>,
    #[serde(rename = "W")]
    pub weights: Grid<f64>,
    pub provenance: Option<Provenance>,
}

impl WeightTable {
    /// All weights one; reproduces uniform voting exactly.
    pub fn uniform() -> Self {
        WeightTable::from_counts(CellCounts::default(), MIN_N)
    }

    /// Ratio of cell accuracy to `(pb, ci)` slice accuracy, with cells below
    /// `min_n` (and slices with zero accuracy) set to one.
    pub fn from_counts(counts: CellCounts, min_n: u64) -> Self {
        let raw = raw_ratios(&counts);
        let mut weights = [[[1.0; N_CLASSES]; N_PATTERNS]; N_BUCKETS];
        for b in 0..N_BUCKETS {
            for p in 0..N_PATTERNS {
                for c in 0..N_CLASSES {
                    if counts.count[b][p][c] >= min_n {
                        if let Some(w) = raw[b][p][c] {
                            weights[b][p][c] = w;
                        }
                    }
                }
            }
        }
        WeightTable {
            dims: [N_BUCKETS, N_PATTERNS, N_CLASSES],
            min_n,
            correct: counts.correct,
            count: counts.count,
            weights,
            provenance: None,
        }
    }

    /// Table with explicit weights and no counts.
    pub fn from_weights(weights: Grid<f64>) -> Result<Self> {
        if weights.iter().flatten().flatten().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
        }
        let mut t = WeightTable::uniform();
        t.weights = weights;
        Ok(t)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    #[inline]
    pub fn weight(&self, cell: Cell) -> f64 {
        self.weights[cell.bucket][cell.pattern.index()][cell.class as usize]
    }

    pub fn counts(&self) -> CellCounts {
        CellCounts {
            correct: self.correct,
            count: self.count,
        }
    }

    /// Weights before the sparse-cell fallback; `None` where the ratio is
    /// undefined (empty cell or zero slice accuracy).
    pub fn raw_weights(&self) -> Grid<Option<f64>> {
        raw_ratios(&self.counts())
    }

    /// `max(1 + alpha (w - 1), 0.01)` applied cellwise. `alpha == 1` returns
    /// the table unchanged.
    pub fn amplify(&self, alpha: f64) -> WeightTable {
        let mut out = self.clone();
        if alpha != 1.0 {
            for w in out.weights.iter_mut().flatten().flatten() {
                *w = (1.0 + alpha * (*w - 1.0)).max(WEIGHT_FLOOR);
            }
        }
        if let Some(p) = out.provenance.as_mut() {
            p.alpha = Some(alpha);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn raw_ratios(counts: &CellCounts) -> Grid<Option<f64>> {
    let mut out = [[[None; N_CLASSES]; N_PATTERNS]; N_BUCKETS];
    for b in 0..N_BUCKETS {
        for c in 0..N_CLASSES {
            let slice_n: u64 = (0..N_PATTERNS).map(|p| counts.count[b][p][c]).sum();
            let slice_c: u64 = (0..N_PATTERNS).map(|p| counts.correct[b][p][c]).sum();
            if slice_n == 0 || slice_c == 0 {
                continue;
            }
            let marginal = slice_c as f64 / slice_n as f64;
            for p in 0..N_PATTERNS {
                let n = counts.count[b][p][c];
                if n > 0 {
                    out[b][p][c] = Some((counts.correct[b][p][c] as f64 / n as f64) / marginal);
                }
            }
        }
    }
    out
}

/// Weighted class distribution for one sample's votes. `forest_proba` is the
/// forest's uniform distribution for the same sample and sets each vote's
/// bucket.
pub fn predict_weighted_votes(votes: &[VoteRecord], forest_proba: &[f64; 2], table: &WeightTable) -> Result<[f64; 2]> {
    weighted_proba(votes, votes.iter().map(|v| table.weight(Cell::of_vote(v, forest_proba))))
        .ok_or(Error::ZeroWeight)
}

/// Weighted prediction for one feature vector.
pub fn predict_weighted(forest: &ForestModel, table: &WeightTable, x: &[f64]) -> Result<[f64; 2]> {
    let votes = forest.per_tree_votes(x)?;
    let proba = uniform_proba(&votes);
    predict_weighted_votes(&votes, &proba, table)
}

/// Naive ablation: each tree weighted by `1 - flip_rate` of its leaf path,
/// uniform when every weight is zero.
pub fn predict_naive_votes(votes: &[VoteRecord]) -> [f64; 2] {
    weighted_proba(votes, votes.iter().map(|v| 1.0 - v.flip_rate)).unwrap_or_else(|| uniform_proba(votes))
}

pub fn predict_naive(forest: &ForestModel, x: &[f64]) -> Result<[f64; 2]> {
    forest.per_tree_votes(x).map(|v| predict_naive_votes(&v))
}

/// Votes of one held-out sample folded into per-cell totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub label: u8,
    /// `(flat cell index, vote count, summed leaf distributions)`.
    pub cells: Vec<(u16, u32, [f64; 2])>,
}

impl SampleRecord {
    fn from_votes(label: u8, votes: &[VoteRecord], forest_proba: &[f64; 2]) -> Self {
        let mut acc: Vec<(u16, u32, [f64; 2])> = Vec::new();
        for v in votes {
            let flat = Cell::of_vote(v, forest_proba).flat() as u16;
            match acc.iter_mut().find(|e| e.0 == flat) {
                Some(e) => {
                    e.1 += 1;
                    e.2[0] += v.leaf_prob[0];
                    e.2[1] += v.leaf_prob[1];
                }
                None => acc.push((flat, 1, v.leaf_prob)),
            }
        }
        acc.sort_by_key(|e| e.0);
        SampleRecord { label, cells: acc }
    }

    /// Class distribution under `table`; `None` if all weights vanish.
    pub fn proba_under(&self, table: &WeightTable) -> Option<[f64; 2]> {
        let mut sum = [0.0; 2];
        let mut total = 0.0;
        for &(flat, n, mass) in &self.cells {
            let w = table.weight(Cell::from_flat(flat as usize));
            sum[0] += w * mass[0];
            sum[1] += w * mass[1];
            total += w * f64::from(n);
        }
        (total > 0.0).then(|| [sum[0] / total, sum[1] / total])
    }

    pub fn n_votes(&self) -> u64 {
        self.cells.iter().map(|e| u64::from(e.1)).sum()
    }
}

/// Held-out vote statistics sufficient to re-aggregate every held-out
/// prediction under any weight table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CvRecords {
    pub samples: Vec<SampleRecord>,
}

impl CvRecords {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_votes(&self) -> u64 {
        self.samples.iter().map(SampleRecord::n_votes).sum()
    }

    /// Cell counts implied by the records (a vote is correct when its class
    /// equals the sample label).
    pub fn cell_counts(&self) -> CellCounts {
        let mut counts = CellCounts::default();
        for s in &self.samples {
            for &(flat, n, _) in &s.cells {
                let cell = Cell::from_flat(flat as usize);
                let correct = if cell.class == s.label { u64::from(n) } else { 0 };
                counts.add_many(cell, u64::from(n), correct);
            }
        }
        counts
    }

    /// Held-out accuracy of the weighted prediction under `table`. A sample
    /// whose weights all vanish counts as wrong.
    pub fn accuracy_under(&self, table: &WeightTable) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let correct = self
            .samples
            .iter()
            .filter(|s| s.proba_under(table).is_some_and(|p| argmax(&p) == s.label))
            .count();
        correct as f64 / self.samples.len() as f64
    }
}

/// Settings for cross-validated weight estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PawConfig {
    /// Trees per inner forest.
    pub n_trees: usize,
    pub folds: usize,
    pub min_n: u64,
    pub max_features: Option<usize>,
}

impl Default for PawConfig {
    fn default() -> Self {
        PawConfig {
            n_trees: 300,
            folds: 5,
            min_n: MIN_N,
            max_features: None,
        }
    }
}

/// Seed for the inner forest of fold `k`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    // splitmix64 of (seed, fold)
    let mut z = seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimates the weight table from stratified k-fold validation votes: one
/// inner forest per fold, each validation vote bucketed by the inner
/// forest's own probability. Only `train` is touched.
pub fn estimate_weight_table_cv(train: &Dataset, config: &PawConfig, seed: u64) -> Result<(WeightTable, CvRecords)> {
    let folds = stratified_kfold(train, config.folds, seed)?;
    let mut records = CvRecords::default();
    for (k, fold) in folds.iter().enumerate() {
        let fold_train = train.subset(&fold.train_indices)?;
        let fold_val = train.subset(&fold.val_indices)?;
        let inner = ForestModel::fit(
            &fold_train,
            &ForestConfig {
                n_trees: config.n_trees,
                seed: fold_seed(seed, k),
                max_features: config.max_features,
            },
        )?;
        let votes = inner.votes_batch(&fold_val)?;
        records.samples.extend(votes.iter().enumerate().map(|(i, v)| {
            SampleRecord::from_votes(fold_val.label(i), v, &uniform_proba(v))
        }));
    }
    let table = WeightTable::from_counts(records.cell_counts(), config.min_n).with_provenance(Provenance {
        variant: WeightVariant::Cv,
        seed,
        folds: Some(config.folds),
        trees: config.n_trees,
        alpha: None,
    });
    Ok((table, records))
}

/// Out-of-bag by-products of a fitted forest on its own training rows.
#[derive(Debug, Clone)]
pub struct OobView {
    pub proba: Vec<Option<[f64; 2]>>,
    pub votes: Vec<Vec<VoteRecord>>,
}

impl OobView {
    pub fn new(forest: &ForestModel, train: &Dataset) -> Result<Self> {
        Ok(OobView {
            proba: forest.oob_decision_function(train)?,
            votes: forest.oob_votes(train)?,
        })
    }

    pub fn n_defined(&self) -> usize {
        self.proba.iter().filter(|p| p.is_some()).count()
    }
}

/// Weight table from the forest's own out-of-bag votes: each (tree, row)
/// pair with the row out of bag contributes, bucketed by the row's OOB
/// probability for the tree's class. Rows without an OOB estimate are
/// skipped.
pub fn estimate_weight_table_oob(forest: &ForestModel, train: &Dataset) -> Result<(WeightTable, CvRecords)> {
    let view = OobView::new(forest, train)?;
    Ok(oob_table_from_view(&view, train.labels(), forest, MIN_N))
}

pub fn oob_table_from_view(view: &OobView, labels: &[u8], forest: &ForestModel, min_n: u64) -> (WeightTable, CvRecords) {
    let samples = view
        .proba
        .iter()
        .zip(&view.votes)
        .zip(labels)
        .filter_map(|((p, v), &y)| p.as_ref().map(|p| SampleRecord::from_votes(y, v, p)))
        .collect();
    let records = CvRecords { samples };
    let table = WeightTable::from_counts(records.cell_counts(), min_n).with_provenance(Provenance {
        variant: WeightVariant::Oob,
        seed: forest.seed(),
        folds: None,
        trees: forest.n_trees(),
        alpha: None,
    });
    (table, records)
}

/// Boundary mass `M`, boundary spread `S` and their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "S")]
    pub spread: f64,
    #[serde(rename = "MS")]
    pub product: f64,
}

impl Indicators {
    pub fn new(mass: f64, spread: f64) -> Self {
        Indicators {
            mass,
            spread,
            product: mass * spread,
        }
    }

    pub fn from_view(view: &OobView, labels: &[u8]) -> Result<Self> {
        let mass = boundary_mass_from(view)?;
        let spread = boundary_spread_from(view, labels);
        Ok(Indicators::new(mass, spread))
    }
}

#[inline]
fn in_boundary(p: &[f64; 2]) -> bool {
    let win = p[0].max(p[1]);
    win >= BOUNDARY_WINDOW.0 && win < BOUNDARY_WINDOW.1
}

fn boundary_mass_from(view: &OobView) -> Result<f64> {
    let defined = view.n_defined();
    if defined == 0 {
        return Err(Error::NoOobSamples);
    }
    let inside = view.proba.iter().flatten().filter(|p| in_boundary(p)).count();
    Ok(inside as f64 / defined as f64)
}

fn boundary_spread_from(view: &OobView, labels: &[u8]) -> f64 {
    // [class][pattern] -> (correct, total)
    let mut tally = [[(0usize, 0usize); N_PATTERNS]; N_CLASSES];
    for (i, p) in view.proba.iter().enumerate() {
        if !p.as_ref().is_some_and(in_boundary) {
            continue;
        }
        for v in &view.votes[i] {
            let e = &mut tally[v.class as usize][v.pattern.index()];
            e.1 += 1;
            if v.class == labels[i] {
                e.0 += 1;
            }
        }
    }
    let spreads = tally.iter().map(|by_pattern| {
        let accs: Vec<f64> = by_pattern
            .iter()
            .filter(|(_, n)| *n >= SPREAD_MIN_CELL)
            .map(|&(c, n)| c as f64 / n as f64)
            .collect();
        if accs.len() < 2 {
            0.0
        } else {
            let max = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = accs.iter().cloned().fold(f64::INFINITY, f64::min);
            max - min
        }
    });
    spreads.sum::<f64>() / N_CLASSES as f64
}

/// Fraction of OOB-scored training rows whose winning-class OOB probability
/// lies in `[0.4, 0.6)`.
pub fn boundary_mass(forest: &ForestModel, train: &Dataset) -> Result<f64> {
    boundary_mass_from(&OobView::new(forest, train)?)
}

/// Max minus min per-pattern accuracy of OOB votes on boundary rows,
/// averaged over the two predicted-class subgroups. Zero for an empty
/// boundary.
pub fn boundary_spread(forest: &ForestModel, train: &Dataset) -> Result<f64> {
    Ok(boundary_spread_from(&OobView::new(forest, train)?, train.labels()))
}

pub fn indicators(forest: &ForestModel, train: &Dataset) -> Result<Indicators> {
    Indicators::from_view(&OobView::new(forest, train)?, train.labels())
}

/// `1 + K * M * S`.
pub fn alpha_for(k: u32, ind: &Indicators) -> f64 {
    1.0 + f64::from(k) * ind.product
}

/// Outcome of the amplification sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub k_star: u32,
    pub alpha: f64,
    /// `(K, held-out accuracy)` for every candidate, ascending in `K`.
    pub accuracies: Vec<(u32, f64)>,
}

/// Picks the amplification factor maximising held-out accuracy; ties go to
/// the smaller `K`.
pub fn select_k(records: &CvRecords, ind: &Indicators, table: &WeightTable, candidates: &[u32]) -> Result<KSelection> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let mut ks: Vec<u32> = candidates.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InvalidArgument("no K candidates".into()));
    }
    let accuracies: Vec<(u32, f64)> = ks
        .iter()
        .map(|&k| (k, records.accuracy_under(&table.amplify(alpha_for(k, ind)))))
        .collect();
    let mut best = accuracies[0];
    for &(k, acc) in &accuracies[1..] {
        if acc > best.1 {
            best = (k, acc);
        }
    }
    Ok(KSelection {
        k_star: best.0,
        alpha: alpha_for(best.0, ind),
        accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vote(class: u8, pattern: FlipPattern, leaf_prob: [f64; 2]) -> VoteRecord {
        VoteRecord {
            tree: 0,
            leaf: 0,
            class,
            pattern,
            flip_rate: 0.0,
            leaf_prob,
        }
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket(0.55).unwrap(), 5);
        assert_eq!(bucket(1.0).unwrap(), 9);
        assert_eq!(bucket(0.0).unwrap(), 0);
        assert_eq!(bucket(0.399999).unwrap(), 3);
        assert_eq!(bucket(0.4).unwrap(), 4);
        assert!(bucket(1.01).is_err());
        assert!(bucket(-0.1).is_err());
        assert!(bucket(f64::NAN).is_err());
    }

    #[test]
    fn cell_flat_index_round_trip() {
        for i in 0..N_CELLS {
            assert_eq!(Cell::from_flat(i).flat(), i);
        }
    }

    #[test]
    fn ratio_arithmetic_and_fallback() {
        let mut counts = CellCounts::default();
        let hi = Cell {
            bucket: 5,
            pattern: FlipPattern::Noflip,
            class: 0,
        };
        let lo = Cell {
            pattern: FlipPattern::Oscillat,
            ..hi
        };
        // slice marginal 150 / 200 = 0.75
        counts.add_many(hi, 100, 90);
        counts.add_many(lo, 100, 60);
        let sparse = Cell {
            bucket: 2,
            pattern: FlipPattern::Other,
            class: 1,
        };
        counts.add_many(sparse, 29, 29);
        counts.add_many(
            Cell {
                pattern: FlipPattern::Noflip,
                ..sparse
            },
            100,
            10,
        );
        let t = WeightTable::from_counts(counts, MIN_N);
        assert_relative_eq!(t.weight(hi), 1.2, epsilon = 1e-12);
        assert_relative_eq!(t.weight(lo), 0.8, epsilon = 1e-12);
        assert_eq!(t.weight(sparse), 1.0);
        assert!(t.raw_weights()[2][FlipPattern::Other.index()][1].unwrap() > 1.0);
    }

    #[test]
    fn single_pattern_slice_has_unit_weight() {
        let mut counts = CellCounts::default();
        let c = Cell {
            bucket: 9,
            pattern: FlipPattern::Noflip,
            class: 0,
        };
        counts.add_many(c, 500, 400);
        assert_eq!(WeightTable::from_counts(counts, MIN_N).weight(c), 1.0);
    }

    #[test]
    fn zero_accuracy_slice_keeps_unit_weight() {
        let mut counts = CellCounts::default();
        let c = Cell {
            bucket: 0,
            pattern: FlipPattern::LateSw,
            class: 1,
        };
        counts.add_many(c, 50, 0);
        let t = WeightTable::from_counts(counts, MIN_N);
        assert_eq!(t.weight(c), 1.0);
        assert_eq!(t.raw_weights()[0][FlipPattern::LateSw.index()][1], None);
    }

    #[test]
    fn amplify_examples() {
        let mut w = [[[1.0; 2]; 6]; 10];
        w[3][1][0] = 1.2;
        w[4][2][1] = 0.1;
        let t = WeightTable::from_weights(w).unwrap();
        assert_eq!(t.amplify(1.0), t);
        assert_relative_eq!(t.amplify(2.0).weights[3][1][0], 1.4, epsilon = 1e-12);
        assert_eq!(t.amplify(20.0).weights[4][2][1], WEIGHT_FLOOR);
        assert_eq!(t.amplify(7.5).weights[0][0][0], 1.0);
    }

    #[test]
    fn weighted_two_tree_arithmetic() {
        let votes = [vote(0, FlipPattern::Noflip, [1.0, 0.0]), vote(1, FlipPattern::LateSw, [0.0, 1.0])];
        let proba = uniform_proba(&votes);
        let mut w = [[[1.0; 2]; 6]; 10];
        w[5][FlipPattern::Noflip.index()][0] = 2.0;
        w[5][FlipPattern::LateSw.index()][1] = 0.01;
        let t = WeightTable::from_weights(w).unwrap();
        let p = predict_weighted_votes(&votes, &proba, &t).unwrap();
        assert_relative_eq!(p[0], 2.0 / 2.01, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.01 / 2.01, epsilon = 1e-12);
        let zero = WeightTable::from_weights([[[0.0; 2]; 6]; 10]).unwrap();
        assert!(matches!(predict_weighted_votes(&votes, &proba, &zero), Err(Error::ZeroWeight)));
    }

    #[test]
    fn naive_weights() {
        let mut a = vote(0, FlipPattern::Noflip, [1.0, 0.0]);
        let mut b = vote(1, FlipPattern::LateSw, [0.0, 1.0]);
        a.flip_rate = 0.0;
        b.flip_rate = 1.0;
        assert_eq!(predict_naive_votes(&[a, b]), [1.0, 0.0]);
        a.flip_rate = 1.0;
        assert_eq!(predict_naive_votes(&[a, b]), [0.5, 0.5]);
    }

    #[test]
    fn records_reaggregate_like_direct_prediction() {
        let votes = [
            vote(0, FlipPattern::Noflip, [0.8, 0.2]),
            vote(1, FlipPattern::LateSw, [0.3, 0.7]),
            vote(0, FlipPattern::Noflip, [0.6, 0.4]),
        ];
        let proba = uniform_proba(&votes);
        let rec = SampleRecord::from_votes(0, &votes, &proba);
        assert_eq!(rec.n_votes(), 3);
        let mut w = [[[1.0; 2]; 6]; 10];
        for b in 0..10 {
            w[b][FlipPattern::LateSw.index()][1] = 0.3;
        }
        let t = WeightTable::from_weights(w).unwrap();
        let direct = predict_weighted_votes(&votes, &proba, &t).unwrap();
        let via = rec.proba_under(&t).unwrap();
        assert_relative_eq!(direct[0], via[0], epsilon = 1e-12);
    }

    #[test]
    fn k_selection_ties_go_to_zero() {
        let votes = [vote(0, FlipPattern::Noflip, [1.0, 0.0])];
        let rec = SampleRecord::from_votes(0, &votes, &uniform_proba(&votes));
        let records = CvRecords { samples: vec![rec] };
        let sel = select_k(&records, &Indicators::new(0.0, 0.0), &WeightTable::uniform(), &DEFAULT_K_CANDIDATES).unwrap();
        assert_eq!(sel.k_star, 0);
        assert_eq!(sel.alpha, 1.0);
        assert_eq!(sel.accuracies.len(), 4);
        assert!(select_k(&CvRecords::default(), &Indicators::new(0.1, 0.1), &WeightTable::uniform(), &[0]).is_err());
    }

    #[test]
    fn table_json_has_named_arrays() {
        let json = WeightTable::uniform().to_json().unwrap();
        for key in ["\"dims\"", "\"min_n\"", "\"C\"", "\"N\"", "\"W\""] {
            assert!(json.contains(key), "{key}");
        }
        assert_eq!(WeightTable::from_json(&json).unwrap(), WeightTable::uniform());
    }
}
