//! CART decision tree: binary splits minimizing class-weighted Gini
//! impurity, grown depth-first from presorted feature orderings.
//!
//! Split evaluation accumulates integer class counts and converts to
//! weighted masses only at candidate boundaries, so fits are bit-exact
//! under any permutation of the training rows.

use super::hash_f64s;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeHyper {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        /// class-weighted probabilities, length C
        proba: Vec<f64>,
    },
    Split {
        feature: usize,
        /// rows with value <= threshold go left
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TreeParams {
    nodes: Vec<Node>,
}

struct Builder<'a> {
    hyper: &'a TreeHyper,
    x: ArrayView2<'a, f64>,
    y: &'a [u32],
    class_weights: &'a [f64],
    class_count: usize,
    nodes: Vec<Node>,
    /// scratch: marks rows going to the left child of the split in progress
    goes_left: Vec<bool>,
}

pub(crate) fn fit(
    hyper: &TreeHyper,
    x: ArrayView2<'_, f64>,
    y: &[u32],
    class_count: usize,
    class_weights: &[f64],
) -> TreeParams {
    let n = x.nrows();
    // one ordering per feature: row indices sorted by (value, row index)
    let sorted: Vec<Vec<u32>> = (0..x.ncols())
        .map(|j| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x[[a as usize, j]]
                    .total_cmp(&x[[b as usize, j]])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();
    let mut builder = Builder {
        hyper,
        x: x.reborrow(),
        y,
        class_weights,
        class_count,
        nodes: Vec::new(),
        goes_left: vec![false; n],
    };
    builder.build(sorted, 0);
    TreeParams {
        nodes: builder.nodes,
    }
}

impl Builder<'_> {
    /// Grow the subtree for the rows listed in `sorted` (one presorted
    /// index list per feature, all listing the same row set); returns the
    /// subtree root's node index.
    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let n_node = rows.len();
        let mut counts = vec![0u64; self.class_count];
        for &i in rows {
            counts[self.y[i as usize] as usize] += 1;
        }
        let present = counts.iter().filter(|&&c| c > 0).count();

        let make_leaf = |this: &mut Self| {
            let masses: Vec<f64> = counts
                .iter()
                .zip(this.class_weights)
                .map(|(&c, &w)| c as f64 * w)
                .collect();
            let total: f64 = masses.iter().sum();
            let proba = if total > 0.0 {
                masses.iter().map(|m| m / total).collect()
            } else {
                // unweighted fallback (cannot occur with supported classes)
                counts.iter().map(|&c| c as f64 / n_node as f64).collect()
            };
            this.nodes.push(Node::Leaf { proba });
            this.nodes.len() - 1
        };

        if depth >= self.hyper.max_depth || present <= 1 || n_node < 2 * self.hyper.min_leaf {
            return make_leaf(self);
        }

        let Some((feature, threshold)) = self.best_split(&sorted, &counts) else {
            return make_leaf(self);
        };

        // mark membership, then stably partition every feature's ordering
        for &i in rows {
            self.goes_left[i as usize] = self.x[[i as usize, feature]] <= threshold;
        }
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for ordering in &sorted {
            let mut l = Vec::new();
            let mut r = Vec::new();
            for &i in ordering {
                if self.goes_left[i as usize] {
                    l.push(i);
                } else {
                    r.push(i);
                }
            }
            left_sorted.push(l);
            right_sorted.push(r);
        }
        drop(sorted);

        // reserve this node's slot before children claim theirs
        self.nodes.push(Node::Leaf { proba: Vec::new() });
        let this = self.nodes.len() - 1;
        let left = self.build(left_sorted, depth + 1);
        let right = self.build(right_sorted, depth + 1);
        self.nodes[this] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        this
    }

    /// The (feature, threshold) minimizing the weighted-Gini split score,
    /// or None when no split satisfies the min_leaf constraint. Strictly
    /// better scores win, so the scan order (feature index, then
    /// threshold) breaks ties deterministically.
    fn best_split(&self, sorted: &[Vec<u32>], node_counts: &[u64]) -> Option<(usize, f64)> {
        let n_node = sorted[0].len();
        let min_leaf = self.hyper.min_leaf;
        let mut best: Option<(f64, usize, f64)> = None;

        let mut left_counts = vec![0u64; self.class_count];
        for (j, ordering) in sorted.iter().enumerate() {
            left_counts.iter_mut().for_each(|c| *c = 0);
            for (pos, &i) in ordering.iter().enumerate() {
                left_counts[self.y[i as usize] as usize] += 1;
                let n_left = pos + 1;
                let n_right = n_node - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                // candidate boundary only between distinct values
                let v = self.x[[i as usize, j]];
                let v_next = self.x[[ordering[pos + 1] as usize, j]];
                if v == v_next {
                    continue;
                }
                let score = self.split_score(&left_counts, node_counts);
                if best.map_or(true, |(s, _, _)| score < s) {
                    best = Some((score, j, 0.5 * (v + v_next)));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }

    /// Weighted-Gini objective `W_L·G_L + W_R·G_R` (the shared 1/W factor
    /// is constant per node and omitted).
    fn split_score(&self, left_counts: &[u64], node_counts: &[u64]) -> f64 {
        let mut w_left = 0.0;
        let mut w_right = 0.0;
        let mut sq_left = 0.0;
        let mut sq_right = 0.0;
        for c in 0..self.class_count {
            let wl = left_counts[c] as f64 * self.class_weights[c];
            let wr = (node_counts[c] - left_counts[c]) as f64 * self.class_weights[c];
            w_left += wl;
            w_right += wr;
            sq_left += wl * wl;
            sq_right += wr * wr;
        }
        let gini = |w: f64, sq: f64| if w > 0.0 { w * (1.0 - sq / (w * w)) } else { 0.0 };
        gini(w_left, sq_left) + gini(w_right, sq_right)
    }
}

impl TreeParams {
    pub(crate) fn predict_proba(&self, x: ArrayView2<f64>, class_count: usize) -> Array2<f64> {
        let mut out = Array2::zeros((x.nrows(), class_count));
        for (i, row) in x.rows().into_iter().enumerate() {
            let mut node = 0usize;
            loop {
                match &self.nodes[node] {
                    Node::Leaf { proba } => {
                        for (c, &p) in proba.iter().enumerate() {
                            out[[i, c]] = p;
                        }
                        break;
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        node = if row[*feature] <= *threshold {
                            *left
                        } else {
                            *right
                        };
                    }
                }
            }
        }
        out
    }

    pub(crate) fn hash_into(&self, hasher: &mut Sha256) {
        use sha2::Digest;
        for node in &self.nodes {
            match node {
                Node::Leaf { proba } => {
                    hasher.update([0u8]);
                    hash_f64s(hasher, proba.iter().copied());
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    hasher.update([1u8]);
                    hasher.update(feature.to_le_bytes());
                    hasher.update(threshold.to_le_bytes());
                    hasher.update(left.to_le_bytes());
                    hasher.update(right.to_le_bytes());
                }
            }
        }
    }
}
