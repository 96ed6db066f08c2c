//! Comparators that reuse a fitted forest: static OOB-accuracy weights (WRF)
//! and the KNORA-Eliminate / KNORA-Union dynamic selectors.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::forest::{uniform_proba, weighted_proba, ForestModel, VoteRecord};
use crate::{exec, Error, Result};

pub const DEFAULT_K: usize = 7;

/// Per-tree constant weights, normalised to mean one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticWeights {
    pub w: Vec<f64>,
}

impl StaticWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
        }
        if !w.iter().any(|v| *v > 0.0) {
            return Err(Error::ZeroWeight);
        }
        Ok(StaticWeights { w })
    }

    pub fn uniform(n_trees: usize) -> Self {
        StaticWeights { w: vec![1.0; n_trees] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Weights proportional to inverse out-of-bag error, the error floored at
/// `1 / (n_oob + 1)`. Trees with no out-of-bag rows get raw weight one.
pub fn wrf_weights(forest: &ForestModel, train: &Dataset) -> Result<StaticWeights> {
    if train.n_samples() != forest.n_train() {
        return Err(Error::DimensionMismatch {
            expected: forest.n_train(),
            got: train.n_samples(),
        });
    }
    let raw: Vec<f64> = exec::map_range(forest.n_trees(), |t| {
        let tree = &forest.trees()[t];
        let bag = forest.in_bag_counts(t);
        let (mut n, mut wrong) = (0usize, 0usize);
        for i in (0..train.n_samples()).filter(|&i| bag[i] == 0) {
            n += 1;
            if tree.node(tree.leaf_of(train.row(i))).majority() != train.label(i) {
                wrong += 1;
            }
        }
        if n == 0 {
            1.0
        } else {
            let err = (wrong as f64 / n as f64).max(1.0 / (n as f64 + 1.0));
            1.0 / err
        }
    });
    Ok(normalise(raw))
}

fn normalise(raw: Vec<f64>) -> StaticWeights {
    if raw.windows(2).all(|p| p[0] == p[1]) {
        return StaticWeights::uniform(raw.len());
    }
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    StaticWeights {
        w: raw.into_iter().map(|v| v / mean).collect(),
    }
}

pub fn wrf_predict_votes(votes: &[VoteRecord], weights: &StaticWeights) -> Result<[f64; 2]> {
    if votes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: votes.len(),
        });
    }
    weighted_proba(votes, votes.iter().map(|v| weights.w[v.tree])).ok_or(Error::ZeroWeight)
}

pub fn wrf_predict(forest: &ForestModel, weights: &StaticWeights, x: &[f64]) -> Result<[f64; 2]> {
    wrf_predict_votes(&forest.per_tree_votes(x)?, weights)
}

/// Exact Euclidean k-nearest-neighbour search over training rows.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    data: Vec<f64>,
    n_features: usize,
    k: usize,
}

impl NeighborIndex {
    pub fn new(train: &Dataset, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if train.n_samples() == 0 {
            return Err(Error::Empty);
        }
        Ok(NeighborIndex {
            data: train.features().iter().copied().collect(),
            n_features: train.n_features(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n_features.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Indices of the `min(k, n)` nearest rows, nearest first, ties to the
    /// lower index.
    pub fn query(&self, x: &[f64]) -> Result<Vec<usize>> {
        Ok(self.query_with_distances(x)?.into_iter().map(|(i, _)| i).collect())
    }

    /// As [`query`](Self::query), with squared distances.
    pub fn query_with_distances(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let mut d: Vec<(usize, f64)> = self
            .data
            .chunks_exact(self.n_features)
            .enumerate()
            .map(|(i, row)| (i, row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum()))
            .collect();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        let k = self.k.min(d.len());
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        Ok(d)
    }
}

/// Neighbour index plus each tree's correctness on every training row.
#[derive(Debug, Clone)]
pub struct KnoraModel {
    index: NeighborIndex,
    n_trees: usize,
    /// Row-major `n_train x n_trees`.
    correct: Vec<bool>,
}

impl KnoraModel {
    pub fn new(forest: &ForestModel, train: &Dataset, k: usize) -> Result<Self> {
        if train.n_features() != forest.n_features() {
            return Err(Error::DimensionMismatch {
                expected: forest.n_features(),
                got: train.n_features(),
            });
        }
        let index = NeighborIndex::new(train, k)?;
        let rows = exec::map_range(train.n_samples(), |i| {
            let x = train.row(i);
            forest
                .trees()
                .iter()
                .map(|tree| tree.node(tree.leaf_of(x)).majority() == train.label(i))
                .collect::<Vec<bool>>()
        });
        Ok(KnoraModel {
            index,
            n_trees: forest.n_trees(),
            correct: rows.concat(),
        })
    }

    pub fn index(&self) -> &NeighborIndex {
        &self.index
    }

    pub fn is_correct(&self, row: usize, tree: usize) -> bool {
        self.correct[row * self.n_trees + tree]
    }

    fn check(&self, votes: &[VoteRecord]) -> Result<()> {
        if votes.len() != self.n_trees {
            return Err(Error::DimensionMismatch {
                expected: self.n_trees,
                got: votes.len(),
            });
        }
        Ok(())
    }

    /// KNORA-E: uniform vote of the trees correct on all `k` neighbours,
    /// shrinking `k` until some tree qualifies; all trees if none ever does.
    pub fn eliminate_votes(&self, votes: &[VoteRecord], x: &[f64]) -> Result<[f64; 2]> {
        self.check(votes)?;
        let neighbours = self.index.query(x)?;
        for kk in (1..=neighbours.len()).rev() {
            let keep: Vec<f64> = (0..self.n_trees)
                .map(|t| f64::from(u8::from(neighbours[..kk].iter().all(|&i| self.is_correct(i, t)))))
                .collect();
            if let Some(p) = weighted_proba(votes, keep) {
                return Ok(p);
            }
        }
        Ok(uniform_proba(votes))
    }

    /// KNORA-U: each tree weighted by its number of correct neighbours;
    /// uniform if every count is zero.
    pub fn union_votes(&self, votes: &[VoteRecord], x: &[f64]) -> Result<[f64; 2]> {
        self.check(votes)?;
        let neighbours = self.index.query(x)?;
        let w = (0..self.n_trees).map(|t| neighbours.iter().filter(|&&i| self.is_correct(i, t)).count() as f64);
        Ok(weighted_proba(votes, w).unwrap_or_else(|| uniform_proba(votes)))
    }
}

pub fn knora_e_predict(forest: &ForestModel, model: &KnoraModel, x: &[f64]) -> Result<[f64; 2]> {
    model.eliminate_votes(&forest.per_tree_votes(x)?, x)
}

pub fn knora_u_predict(forest: &ForestModel, model: &KnoraModel, x: &[f64]) -> Result<[f64; 2]> {
    model.union_votes(&forest.per_tree_votes(x)?, x)
}
