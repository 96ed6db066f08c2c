//! CART classification trees (Gini) stored as flat node arrays, with a
//! per-node cache of the flip pattern of the root-to-node majority labels.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pattern::{self, FlipPattern};
use crate::{Error, Result};

/// Internal-node routing: `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Class counts of the (bootstrap-weighted) training rows reaching the node.
    pub counts: [u32; 2],
    pub depth: u32,
    pub split: Option<Split>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    /// Majority class, ties to class 0.
    pub fn majority(&self) -> u8 {
        u8::from(self.counts[1] > self.counts[0])
    }

    /// Class distribution `counts / sum(counts)`.
    pub fn probability(&self) -> [f64; 2] {
        let total = f64::from(self.counts[0] + self.counts[1]);
        [f64::from(self.counts[0]) / total, f64::from(self.counts[1]) / total]
    }
}

/// Serialized form; the pattern cache is rebuilt on load.
#[derive(Serialize, Deserialize)]
struct TreeRepr {
    n_features: usize,
    seed: u64,
    stream: u64,
    nodes: Vec<Node>,
}

/// A fitted tree. Node 0 is the root; nodes are numbered in depth-first
/// preorder with the left child first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct TreeModel {
    nodes: Vec<Node>,
    n_features: usize,
    seed: u64,
    stream: u64,
    patterns: Vec<FlipPattern>,
    flip_rates: Vec<f64>,
    parents: Vec<Option<usize>>,
}

impl TryFrom<TreeRepr> for TreeModel {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        if r.nodes.is_empty() {
            return Err(Error::Empty);
        }
        for (i, node) in r.nodes.iter().enumerate() {
            if node.counts[0] + node.counts[1] == 0 {
                return Err(Error::InvalidArgument(format!("node {i} has no samples")));
            }
            if let Some(s) = node.split {
                if s.left <= i || s.right <= i || s.left >= r.nodes.len() || s.right >= r.nodes.len() {
                    return Err(Error::InvalidArgument(format!("node {i} has invalid children")));
                }
                if s.feature >= r.n_features {
                    return Err(Error::InvalidArgument(format!("node {i} splits on feature {}", s.feature)));
                }
            }
        }
        Ok(TreeModel::from_nodes(r.nodes, r.n_features, r.seed, r.stream))
    }
}

impl From<TreeModel> for TreeRepr {
    fn from(t: TreeModel) -> Self {
        TreeRepr {
            n_features: t.n_features,
            seed: t.seed,
            stream: t.stream,
            nodes: t.nodes,
        }
    }
}

impl TreeModel {
    /// Fits a tree on every row of `x` with unit weights.
    pub fn fit(x: &Array2<f64>, y: &[u8], max_features: usize, seed: u64) -> Result<Self> {
        let counts = vec![1u32; y.len()];
        Self::fit_weighted(x, y, &counts, max_features, seed, 0)
    }

    /// Fits a tree where row `i` appears `counts[i]` times (bootstrap
    /// multiplicities); rows with a zero count are ignored. Feature sampling
    /// draws from ChaCha8 keyed by `seed` on stream `stream`.
    pub fn fit_weighted(
        x: &Array2<f64>,
        y: &[u8],
        counts: &[u32],
        max_features: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Empty);
        }
        if y.len() != n || counts.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if y.len() != n { y.len() } else { counts.len() },
            });
        }
        if max_features == 0 || max_features > p {
            return Err(Error::InvalidArgument(format!(
                "max_features = {max_features} not in [1, {p}]"
            )));
        }
        if let Some(&bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not 0 or 1")));
        }
        let rows: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let builder = Builder {
            x,
            y,
            w: counts,
            max_features,
        };
        let nodes = builder.grow(rows, &mut rng);
        Ok(TreeModel::from_nodes(nodes, p, seed, stream))
    }

    fn from_nodes(nodes: Vec<Node>, n_features: usize, seed: u64, stream: u64) -> Self {
        let mut tree = TreeModel {
            nodes,
            n_features,
            seed,
            stream,
            patterns: Vec::new(),
            flip_rates: Vec::new(),
            parents: Vec::new(),
        };
        tree.precompute_leaf_patterns();
        tree
    }

    /// Fills the per-node pattern cache in one depth-first traversal that
    /// carries the running majority-label path.
    pub fn precompute_leaf_patterns(&mut self) {
        let m = self.nodes.len();
        let mut patterns = vec![FlipPattern::Noflip; m];
        let mut rates = vec![0.0; m];
        let mut parents = vec![None; m];
        let mut path: Vec<u8> = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            path.truncate(depth);
            path.push(self.nodes[id].majority());
            let stats = pattern::flip_stats(&path).expect("path is non-empty");
            patterns[id] = stats.classify();
            rates[id] = stats.flip_rate();
            if let Some(s) = self.nodes[id].split {
                parents[s.left] = Some(id);
                parents[s.right] = Some(id);
                stack.push((s.right, depth + 1));
                stack.push((s.left, depth + 1));
            }
        }
        self.patterns = patterns;
        self.flip_rates = rates;
        self.parents = parents;
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn seed(&self) -> (u64, u64) {
        (self.seed, self.stream)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf()).map(|(i, _)| i)
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth as usize).max().unwrap_or(0)
    }

    /// Leaf reached by `x`, checking shape and finiteness.
    pub fn apply(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        if let Some(column) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, column });
        }
        Ok(self.leaf_of(x))
    }

    /// Leaf reached by `x` without validation.
    #[inline]
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut id = 0;
        while let Some(s) = self.nodes[id].split {
            id = if x[s.feature] <= s.threshold { s.left } else { s.right };
        }
        id
    }

    /// Cached flip pattern of the path ending at `node`.
    #[inline]
    pub fn pattern(&self, node: usize) -> FlipPattern {
        self.patterns[node]
    }

    /// Cached flip rate `k / d` of the path ending at `node`.
    #[inline]
    pub fn flip_rate(&self, node: usize) -> f64 {
        self.flip_rates[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node]
    }

    /// Node-majority labels from the root down to `leaf`.
    pub fn path_label_sequence(&self, leaf: usize) -> Result<Vec<u8>> {
        if leaf >= self.nodes.len() || !self.nodes[leaf].is_leaf() {
            return Err(Error::InvalidLeaf(leaf));
        }
        let mut seq = Vec::with_capacity(self.nodes[leaf].depth as usize + 1);
        let mut cur = Some(leaf);
        while let Some(id) = cur {
            seq.push(self.nodes[id].majority());
            cur = self.parents[id];
        }
        seq.reverse();
        Ok(seq)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct Builder<'a> {
    x: &'a Array2<f64>,
    y: &'a [u8],
    w: &'a [u32],
    max_features: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    // score = num / den, larger is better (weighted Gini proxy)
    num: u128,
    den: u128,
}

impl Candidate {
    fn beats(&self, best: &Option<Candidate>) -> bool {
        match best {
            None => true,
            Some(b) => {
                let lhs = self.num * b.den;
                let rhs = b.num * self.den;
                lhs > rhs
                    || (lhs == rhs
                        && (self.feature < b.feature
                            || (self.feature == b.feature && self.threshold < b.threshold)))
            }
        }
    }
}

impl Builder<'_> {
    fn grow(&self, mut rows: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<Node> {
        let p = self.x.ncols();
        let mut nodes: Vec<Node> = Vec::new();
        let mut features: Vec<usize> = (0..p).collect();
        let mut buf: Vec<(f64, u8, u32)> = Vec::with_capacity(rows.len());
        // (start, end, depth, parent id, is_left)
        let mut stack: Vec<(usize, usize, u32, Option<(usize, bool)>)> = vec![(0, rows.len(), 0, None)];
        while let Some((start, end, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((pid, is_left)) = parent {
                let split = nodes[pid].split.as_mut().expect("parent was split");
                if is_left {
                    split.left = id;
                } else {
                    split.right = id;
                }
            }
            let slice = &rows[start..end];
            let mut counts = [0u32; 2];
            for &r in slice {
                counts[self.y[r] as usize] += self.w[r];
            }
            nodes.push(Node {
                counts,
                depth,
                split: None,
            });
            if counts[0] == 0 || counts[1] == 0 {
                continue;
            }
            let Some(best) = self.best_split(slice, counts, &mut features, &mut buf, rng) else {
                continue;
            };
            let x = self.x;
            let slice = &mut rows[start..end];
            let mut mid = 0;
            for i in 0..slice.len() {
                if x[[slice[i], best.feature]] <= best.threshold {
                    slice.swap(i, mid);
                    mid += 1;
                }
            }
            debug_assert!(mid > 0 && mid < slice.len());
            nodes[id].split = Some(Split {
                feature: best.feature,
                threshold: best.threshold,
                left: 0,
                right: 0,
            });
            stack.push((start + mid, end, depth + 1, Some((id, false))));
            stack.push((start, start + mid, depth + 1, Some((id, true))));
        }
        nodes
    }

    /// Draws features without replacement until `max_features` features that
    /// vary within the node have been evaluated.
    fn best_split(
        &self,
        rows: &[usize],
        counts: [u32; 2],
        features: &mut [usize],
        buf: &mut Vec<(f64, u8, u32)>,
        rng: &mut ChaCha8Rng,
    ) -> Option<Candidate> {
        let p = features.len();
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        let mut i = 0;
        while visited < self.max_features && i < p {
            let j = rng.random_range(i..p);
            features.swap(i, j);
            let f = features[i];
            i += 1;

            buf.clear();
            buf.extend(rows.iter().map(|&r| (self.x[[r, f]], self.y[r], self.w[r])));
            buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if buf[0].0 == buf[buf.len() - 1].0 {
                continue;
            }
            visited += 1;

            let total = [u128::from(counts[0]), u128::from(counts[1])];
            let mut left = [0u128; 2];
            for k in 0..buf.len() - 1 {
                left[buf[k].1 as usize] += u128::from(buf[k].2);
                let (v, next) = (buf[k].0, buf[k + 1].0);
                if v == next {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let nl = left[0] + left[1];
                let nr = right[0] + right[1];
                let num = (left[0] * left[0] + left[1] * left[1]) * nr
                    + (right[0] * right[0] + right[1] * right[1]) * nl;
                let den = nl * nr;
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next || !threshold.is_finite() {
                    threshold = v;
                }
                let cand = Candidate {
                    feature: f,
                    threshold,
                    num,
                    den,
                };
                if cand.beats(&best) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}
