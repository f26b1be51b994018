//! Axis-aligned binary regression trees with scalar or vector leaves.
//!
//! Trees are grown best-first: a priority queue keeps every expandable leaf
//! ordered by the absolute impurity decrease of its best split, and the
//! queue's top leaf is expanded until the leaf budget is reached or no split
//! helps. The impurity of a node is the unweighted sum over outputs of the
//! within-node variance (equivalently, the sum of squared deviations from
//! the node mean), so multi-output trees minimize the same `l2` criterion a
//! boosting stage asks of them.
//!
//! A fitted structure can be relabelled in a different target space: the
//! topology is kept and every leaf takes the mean of the new targets over
//! the training rows that reach it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Growth parameters for one tree.
#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    /// Leaf budget; 2 with `k_features = p` is a stump.
    pub max_leaves: usize,
    /// Features drawn uniformly without replacement at every node.
    pub k_features: usize,
    pub min_samples_leaf: usize,
    pub seed: RngSeed,
}

impl TreeConfig {
    pub fn stump(n_features: usize, seed: RngSeed) -> Self {
        TreeConfig {
            max_leaves: 2,
            k_features: n_features,
            min_samples_leaf: 1,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
        n_samples: usize,
    },
}

/// A fitted regression tree. Node 0 is the root; children reference nodes by
/// index in creation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_outputs: usize,
}

// A leaf awaiting expansion, ordered by the gain of its precomputed best
// split; ties go to the earlier-enqueued node for reproducibility.
struct PendingSplit {
    gain: f64,
    counter: u64,
    node: usize,
    samples: Vec<usize>,
    feature: usize,
    threshold: f64,
}

impl PartialEq for PendingSplit {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.counter == other.counter
    }
}
impl Eq for PendingSplit {}
impl PartialOrd for PendingSplit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PendingSplit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .unwrap()
            .then_with(|| other.counter.cmp(&self.counter))
    }
}

struct NodeStats {
    sums: Vec<f64>,
    sum_squares: Vec<f64>,
    n: usize,
}

impl NodeStats {
    fn collect(targets: ArrayView2<'_, f64>, samples: &[usize]) -> Self {
        let c = targets.ncols();
        let mut sums = vec![0.0; c];
        let mut sum_squares = vec![0.0; c];
        for &s in samples {
            for j in 0..c {
                let v = targets[[s, j]];
                sums[j] += v;
                sum_squares[j] += v * v;
            }
        }
        NodeStats {
            sums,
            sum_squares,
            n: samples.len(),
        }
    }

    // Sum over outputs of squared deviations from the node mean.
    fn sse(&self) -> f64 {
        let n = self.n as f64;
        self.sums
            .iter()
            .zip(self.sum_squares.iter())
            .map(|(&s, &sq)| (sq - s * s / n).max(0.0))
            .sum()
    }

    fn means(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sums.iter().map(|&s| s / n).collect()
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn find_best_split(
    x: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    samples: &[usize],
    stats: &NodeStats,
    config: &TreeConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Option<BestSplit> {
    let p = x.ncols();
    let c = targets.ncols();
    let n_node = samples.len();
    if n_node < 2 * config.min_samples_leaf || n_node < 2 {
        return None;
    }
    let node_sse = stats.sse();
    if node_sse <= 0.0 {
        return None;
    }

    // Candidate features, ascending so equal-gain ties resolve to the lowest
    // feature index.
    let features: Vec<usize> = if config.k_features >= p {
        (0..p).collect()
    } else {
        let mut picked: Vec<usize> = rand::seq::index::sample(rng, p, config.k_features).into_vec();
        picked.sort_unstable();
        picked
    };

    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n_node);
    for &feature in &features {
        order.clear();
        order.extend_from_slice(samples);
        order.sort_unstable_by(|&a, &b| x[[a, feature]].partial_cmp(&x[[b, feature]]).unwrap());

        let mut left_sum = vec![0.0; c];
        let mut left_sq = vec![0.0; c];
        for i in 0..n_node - 1 {
            let s = order[i];
            for j in 0..c {
                let v = targets[[s, j]];
                left_sum[j] += v;
                left_sq[j] += v * v;
            }
            let a = x[[order[i], feature]];
            let b = x[[order[i + 1], feature]];
            if a == b {
                continue;
            }
            let n_left = i + 1;
            let n_right = n_node - n_left;
            if n_left < config.min_samples_leaf || n_right < config.min_samples_leaf {
                continue;
            }
            let mut children_sse = 0.0;
            for j in 0..c {
                let ls = left_sum[j];
                let rs = stats.sums[j] - ls;
                let lsq = left_sq[j];
                let rsq = stats.sum_squares[j] - lsq;
                children_sse += (lsq - ls * ls / n_left as f64).max(0.0);
                children_sse += (rsq - rs * rs / n_right as f64).max(0.0);
            }
            let gain = node_sse - children_sse;
            if gain <= 0.0 {
                continue;
            }
            if best.as_ref().map_or(true, |bst| gain > bst.gain) {
                // Midpoint of consecutive distinct values; if rounding lands
                // on the upper value, fall back to the lower so that the
                // `x <= threshold` rule reproduces this partition exactly.
                let mut threshold = 0.5 * (a + b);
                if threshold >= b {
                    threshold = a;
                }
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

impl RegressionTree {
    /// Grows a tree on `x` (`n x p`) against `targets` (`n x c`).
    /// Degenerate inputs produce a single-leaf tree rather than an error.
    pub fn fit(
        x: ArrayView2<'_, f64>,
        targets: ArrayView2<'_, f64>,
        config: &TreeConfig,
    ) -> Result<Self> {
        let n = x.nrows();
        let p = x.ncols();
        if n == 0 || p == 0 {
            return Err(Error::Parameter("tree fit needs n >= 1 and p >= 1".into()));
        }
        if targets.nrows() != n {
            return Err(Error::Shape(format!(
                "x has {n} rows but targets have {}",
                targets.nrows()
            )));
        }
        if config.max_leaves < 2 {
            return Err(Error::Parameter("max_leaves must be >= 2".into()));
        }
        if config.k_features == 0 || config.k_features > p {
            return Err(Error::Parameter(format!(
                "k_features must lie in [1, {p}], got {}",
                config.k_features
            )));
        }
        if config.min_samples_leaf == 0 {
            return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
        }

        let mut rng = config.seed.rng();
        let all: Vec<usize> = (0..n).collect();
        let root_stats = NodeStats::collect(targets, &all);
        let mut nodes = vec![Node::Leaf {
            value: root_stats.means(),
            n_samples: n,
        }];

        let mut heap: BinaryHeap<PendingSplit> = BinaryHeap::new();
        let mut counter = 0u64;
        if let Some(split) = find_best_split(x, targets, &all, &root_stats, config, &mut rng) {
            heap.push(PendingSplit {
                gain: split.gain,
                counter,
                node: 0,
                samples: all,
                feature: split.feature,
                threshold: split.threshold,
            });
            counter += 1;
        }

        let mut n_leaves = 1usize;
        while n_leaves < config.max_leaves {
            let Some(pending) = heap.pop() else { break };

            let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = pending
                .samples
                .iter()
                .partition(|&&s| x[[s, pending.feature]] <= pending.threshold);

            let left_index = nodes.len();
            let right_index = nodes.len() + 1;
            for child in [&left_samples, &right_samples] {
                let stats = NodeStats::collect(targets, child);
                nodes.push(Node::Leaf {
                    value: stats.means(),
                    n_samples: child.len(),
                });
            }
            nodes[pending.node] = Node::Internal {
                feature: pending.feature,
                threshold: pending.threshold,
                left: left_index,
                right: right_index,
            };
            n_leaves += 1;

            for (index, samples) in [(left_index, left_samples), (right_index, right_samples)] {
                let stats = NodeStats::collect(targets, &samples);
                if let Some(split) = find_best_split(x, targets, &samples, &stats, config, &mut rng)
                {
                    heap.push(PendingSplit {
                        gain: split.gain,
                        counter,
                        node: index,
                        samples,
                        feature: split.feature,
                        threshold: split.threshold,
                    });
                    counter += 1;
                }
            }
        }

        Ok(RegressionTree {
            nodes,
            n_features: p,
            n_outputs: targets.ncols(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Root split, if the tree has one.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first() {
            Some(Node::Internal {
                feature, threshold, ..
            }) => Some((*feature, *threshold)),
            _ => None,
        }
    }

    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        n_features: usize,
        n_outputs: usize,
    ) -> Result<Self> {
        // Light structural validation for deserialized trees.
        if nodes.is_empty() {
            return Err(Error::ModelFormat("tree has no nodes".into()));
        }
        for node in &nodes {
            match node {
                Node::Internal {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= n_features || *left >= nodes.len() || *right >= nodes.len() {
                        return Err(Error::ModelFormat("tree node index out of range".into()));
                    }
                }
                Node::Leaf { value, .. } => {
                    if value.len() != n_outputs {
                        return Err(Error::ModelFormat("leaf dimension mismatch".into()));
                    }
                }
            }
        }
        Ok(RegressionTree {
            nodes,
            n_features,
            n_outputs,
        })
    }

    fn leaf_index(&self, row: ArrayView1<'_, f64>) -> usize {
        let mut index = 0;
        loop {
            match &self.nodes[index] {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    index = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { .. } => return index,
            }
        }
    }

    /// Routes every row to a leaf and returns the leaf values, `m x c`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "tree was fit on {} features, input has {}",
                self.n_features,
                x.ncols()
            )));
        }
        let mut out = Array2::zeros((x.nrows(), self.n_outputs));
        for (i, row) in x.outer_iter().enumerate() {
            let leaf = self.leaf_index(row);
            if let Node::Leaf { value, .. } = &self.nodes[leaf] {
                for (j, &v) in value.iter().enumerate() {
                    out[[i, j]] = v;
                }
            }
        }
        Ok(out)
    }

    /// Keeps the structure but replaces every leaf value with the mean of
    /// `new_targets` over the rows of `x` reaching that leaf. The output
    /// dimension becomes `new_targets.ncols()`.
    pub fn relabel(
        &self,
        x: ArrayView2<'_, f64>,
        new_targets: ArrayView2<'_, f64>,
    ) -> Result<Self> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "tree was fit on {} features, input has {}",
                self.n_features,
                x.ncols()
            )));
        }
        if x.nrows() != new_targets.nrows() {
            return Err(Error::Shape(
                "relabelling needs one target row per input row".into(),
            ));
        }
        let d = new_targets.ncols();
        let mut sums: Vec<Vec<f64>> = vec![vec![0.0; d]; self.nodes.len()];
        let mut counts: Vec<usize> = vec![0; self.nodes.len()];
        for (i, row) in x.outer_iter().enumerate() {
            let leaf = self.leaf_index(row);
            counts[leaf] += 1;
            for j in 0..d {
                sums[leaf][j] += new_targets[[i, j]];
            }
        }
        let mut nodes = self.nodes.clone();
        for (index, node) in nodes.iter_mut().enumerate() {
            if let Node::Leaf { value, n_samples } = node {
                if counts[index] == 0 {
                    return Err(Error::Relabel(format!(
                        "no rows reach leaf node {index}"
                    )));
                }
                let n = counts[index] as f64;
                *value = sums[index].iter().map(|&s| s / n).collect();
                *n_samples = counts[index];
            }
        }
        Ok(RegressionTree {
            nodes,
            n_features: self.n_features,
            n_outputs: d,
        })
    }
}
