//! Bootstrap random forests with uniform probability averaging, per-tree
//! vote records and out-of-bag estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cart::TreeModel;
use crate::data::Dataset;
use crate::exec;
use crate::pattern::FlipPattern;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub seed: u64,
    /// Features considered per split; `None` means `round(sqrt(p))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 300,
            seed: 42,
            max_features: None,
        }
    }
}

impl ForestConfig {
    pub fn new(n_trees: usize, seed: u64) -> Self {
        ForestConfig {
            n_trees,
            seed,
            max_features: None,
        }
    }
}

/// `round(sqrt(p))` with halves rounded up, clamped to `[1, p]`.
pub fn sqrt_features(p: usize) -> usize {
    ((p as f64).sqrt() + 0.5).floor().clamp(1.0, p.max(1) as f64) as usize
}

/// One tree's contribution for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub tree: usize,
    pub leaf: usize,
    /// The tree's predicted class (leaf majority, ties to 0).
    pub class: u8,
    pub pattern: FlipPattern,
    pub flip_rate: f64,
    /// Leaf class distribution.
    pub leaf_prob: [f64; 2],
}

/// Argmax of a two-class vector, ties to class 0.
#[inline]
pub fn argmax(p: &[f64; 2]) -> u8 {
    u8::from(p[1] > p[0])
}

/// Uniform mean of the leaf distributions, accumulated in tree order.
pub fn uniform_proba(votes: &[VoteRecord]) -> [f64; 2] {
    let mut sum = [0.0; 2];
    for v in votes {
        sum[0] += v.leaf_prob[0];
        sum[1] += v.leaf_prob[1];
    }
    let t = votes.len() as f64;
    [sum[0] / t, sum[1] / t]
}

/// Weighted mean of the leaf distributions. `None` when the weights sum to zero.
pub fn weighted_proba(votes: &[VoteRecord], weights: impl IntoIterator<Item = f64>) -> Option<[f64; 2]> {
    let mut sum = [0.0; 2];
    let mut total = 0.0;
    for (v, w) in votes.iter().zip(weights) {
        sum[0] += w * v.leaf_prob[0];
        sum[1] += w * v.leaf_prob[1];
        total += w;
    }
    (total > 0.0).then(|| [sum[0] / total, sum[1] / total])
}

#[derive(Serialize, Deserialize)]
struct ForestRepr {
    n_train: usize,
    n_features: usize,
    max_features: usize,
    seed: u64,
    trees: Vec<TreeModel>,
    /// Per tree, `(count, run length)` pairs of bootstrap multiplicities.
    in_bag: Vec<Vec<(u32, u32)>>,
}

/// A fitted forest together with each tree's bootstrap multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForestRepr", into = "ForestRepr")]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    in_bag: Vec<Vec<u32>>,
    n_train: usize,
    n_features: usize,
    max_features: usize,
    seed: u64,
}

fn run_length_encode(counts: &[u32]) -> Vec<(u32, u32)> {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for &c in counts {
        match runs.last_mut() {
            Some((v, len)) if *v == c => *len += 1,
            _ => runs.push((c, 1)),
        }
    }
    runs
}

fn run_length_decode(runs: &[(u32, u32)]) -> Vec<u32> {
    runs.iter()
        .flat_map(|&(v, len)| std::iter::repeat_n(v, len as usize))
        .collect()
}

impl TryFrom<ForestRepr> for ForestModel {
    type Error = Error;

    fn try_from(r: ForestRepr) -> Result<Self> {
        if r.trees.is_empty() || r.trees.len() != r.in_bag.len() {
            return Err(Error::InvalidArgument("tree and in-bag counts differ".into()));
        }
        let in_bag: Vec<Vec<u32>> = r.in_bag.iter().map(|runs| run_length_decode(runs)).collect();
        if in_bag.iter().any(|row| row.len() != r.n_train) {
            return Err(Error::InvalidArgument("in-bag row length differs from n_train".into()));
        }
        Ok(ForestModel {
            trees: r.trees,
            in_bag,
            n_train: r.n_train,
            n_features: r.n_features,
            max_features: r.max_features,
            seed: r.seed,
        })
    }
}

impl From<ForestModel> for ForestRepr {
    fn from(f: ForestModel) -> Self {
        ForestRepr {
            in_bag: f.in_bag.iter().map(|row| run_length_encode(row)).collect(),
            n_train: f.n_train,
            n_features: f.n_features,
            max_features: f.max_features,
            seed: f.seed,
            trees: f.trees,
        }
    }
}

impl ForestModel {
    /// Fits `config.n_trees` trees, each on its own bootstrap resample of
    /// `train`. Tree `t` uses ChaCha8 keyed by the forest seed on stream `2t`
    /// for its bootstrap and `2t + 1` for feature sampling.
    pub fn fit(train: &Dataset, config: &ForestConfig) -> Result<Self> {
        if config.n_trees == 0 {
            return Err(Error::InvalidArgument("need at least one tree".into()));
        }
        let n = train.n_samples();
        if n == 0 {
            return Err(Error::Empty);
        }
        let p = train.n_features();
        let max_features = config.max_features.unwrap_or_else(|| sqrt_features(p));
        let seed = config.seed;
        let fitted = exec::try_map_range(config.n_trees, |t| {
            let counts = bootstrap_counts(n, seed, t as u64);
            let tree = TreeModel::fit_weighted(
                train.features(),
                train.labels(),
                &counts,
                max_features,
                seed,
                2 * t as u64 + 1,
            )?;
            Ok::<_, Error>((tree, counts))
        })?;
        let (trees, in_bag) = fitted.into_iter().unzip();
        Ok(ForestModel {
            trees,
            in_bag,
            n_train: n,
            n_features: p,
            max_features,
            seed,
        })
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bootstrap multiplicity of every training row for tree `t`.
    pub fn in_bag_counts(&self, t: usize) -> &[u32] {
        &self.in_bag[t]
    }

    pub fn in_bag_mask(&self, t: usize) -> Vec<bool> {
        self.in_bag[t].iter().map(|&c| c > 0).collect()
    }

    #[inline]
    pub fn is_in_bag(&self, t: usize, i: usize) -> bool {
        self.in_bag[t][i] > 0
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        if let Some(column) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, column });
        }
        Ok(())
    }

    #[inline]
    fn vote_of(&self, t: usize, x: &[f64]) -> VoteRecord {
        let tree = &self.trees[t];
        let leaf = tree.leaf_of(x);
        let node = tree.node(leaf);
        VoteRecord {
            tree: t,
            leaf,
            class: node.majority(),
            pattern: tree.pattern(leaf),
            flip_rate: tree.flip_rate(leaf),
            leaf_prob: node.probability(),
        }
    }

    /// One vote record per tree, in tree order.
    pub fn per_tree_votes(&self, x: &[f64]) -> Result<Vec<VoteRecord>> {
        self.check(x)?;
        Ok((0..self.trees.len()).map(|t| self.vote_of(t, x)).collect())
    }

    /// Uniform average of the trees' leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; 2]> {
        self.check(x)?;
        let mut sum = [0.0; 2];
        for tree in &self.trees {
            let p = tree.node(tree.leaf_of(x)).probability();
            sum[0] += p[0];
            sum[1] += p[1];
        }
        let t = self.trees.len() as f64;
        Ok([sum[0] / t, sum[1] / t])
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        self.predict_proba(x).map(|p| argmax(&p))
    }

    /// Vote records for every row of `ds`, parallel across rows.
    pub fn votes_batch(&self, ds: &Dataset) -> Result<Vec<Vec<VoteRecord>>> {
        if ds.n_features() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: ds.n_features(),
            });
        }
        Ok(exec::map_range(ds.n_samples(), |i| {
            let x = ds.row(i);
            (0..self.trees.len()).map(|t| self.vote_of(t, x)).collect()
        }))
    }

    /// Out-of-bag class distribution for each training row: the mean leaf
    /// distribution over trees whose bootstrap excluded the row, or `None`
    /// when every tree saw it.
    pub fn oob_decision_function(&self, train: &Dataset) -> Result<Vec<Option<[f64; 2]>>> {
        if train.n_samples() != self.n_train {
            return Err(Error::DimensionMismatch {
                expected: self.n_train,
                got: train.n_samples(),
            });
        }
        Ok(exec::map_range(self.n_train, |i| {
            let x = train.row(i);
            let mut sum = [0.0; 2];
            let mut k = 0usize;
            for (t, tree) in self.trees.iter().enumerate() {
                if self.in_bag[t][i] == 0 {
                    let p = tree.node(tree.leaf_of(x)).probability();
                    sum[0] += p[0];
                    sum[1] += p[1];
                    k += 1;
                }
            }
            (k > 0).then(|| [sum[0] / k as f64, sum[1] / k as f64])
        }))
    }

    /// Out-of-bag vote records for each training row (trees that did not see
    /// the row only).
    pub fn oob_votes(&self, train: &Dataset) -> Result<Vec<Vec<VoteRecord>>> {
        if train.n_samples() != self.n_train {
            return Err(Error::DimensionMismatch {
                expected: self.n_train,
                got: train.n_samples(),
            });
        }
        Ok(exec::map_range(self.n_train, |i| {
            let x = train.row(i);
            (0..self.trees.len())
                .filter(|&t| self.in_bag[t][i] == 0)
                .map(|t| self.vote_of(t, x))
                .collect()
        }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Bootstrap multiplicities: `n` draws with replacement from `0..n`.
pub fn bootstrap_counts(n: usize, seed: u64, tree: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * tree);
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    counts
}
