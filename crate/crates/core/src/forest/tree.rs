//! Multi-output CART regression tree.
//!
//! Splits maximise the reduction of within-node squared error summed over
//! all outputs. For a candidate partition into left/right children this is
//! equivalent to maximising `sum_k L_k^2 / n_L + R_k^2 / n_R` where `L_k` and
//! `R_k` are per-output target sums of each child, so a single sorted sweep
//! per feature scores every threshold.

use ndarray::ArrayView2;
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ForestParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `offset` indexes the first of `output_dim` values in `leaf_values`.
    Leaf { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
    output_dim: usize,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_values.len() / self.output_dim
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Leaf values reached by `x`.
    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
                Node::Leaf { offset } => return &self.leaf_values[offset..offset + self.output_dim],
            }
        }
    }

    pub(crate) fn is_well_formed(&self, input_dim: usize) -> bool {
        self.output_dim > 0
            && !self.nodes.is_empty()
            && self.leaf_values.len().is_multiple_of(self.output_dim)
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < input_dim
                        && threshold.is_finite()
                        && left > i
                        && right > i
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
                Node::Leaf { offset } => offset + self.output_dim <= self.leaf_values.len(),
            })
    }
}

/// Training data for one tree. `y` is row-major `n x k`; `centered` is the
/// same matrix minus its column means and only feeds the split search.
pub(crate) struct TrainingSet<'a> {
    pub x: ArrayView2<'a, f64>,
    pub y: &'a [f64],
    pub centered: &'a [f64],
    pub k: usize,
    pub y_min: &'a [f64],
    pub y_max: &'a [f64],
}

impl TrainingSet<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.y[i * self.k..(i + 1) * self.k]
    }

    fn centered_row(&self, i: usize) -> &[f64] {
        &self.centered[i * self.k..(i + 1) * self.k]
    }
}

struct Split {
    feature: usize,
    threshold: f64,
}

struct Builder<'a, 'b> {
    data: &'b TrainingSet<'a>,
    params: &'b ForestParams,
    n_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
    order: Vec<usize>,
    left_sum: Vec<f64>,
    total: Vec<f64>,
}

pub(crate) fn fit_tree(data: &TrainingSet<'_>, params: &ForestParams, mut rng: ChaCha8Rng) -> RegressionTree {
    let n = data.x.nrows();
    let mut rows: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let m = data.x.ncols();
    let n_features = ((params.max_features_fraction * m as f64) as usize).clamp(1, m);
    let mut b = Builder {
        data,
        params,
        n_features,
        rng,
        nodes: Vec::new(),
        leaf_values: Vec::new(),
        order: Vec::with_capacity(n),
        left_sum: vec![0.0; data.k],
        total: vec![0.0; data.k],
    };
    b.grow(&mut rows, 0);
    RegressionTree {
        nodes: b.nodes,
        leaf_values: b.leaf_values,
        output_dim: data.k,
    }
}

impl Builder<'_, '_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { offset: 0 });
        let can_split = rows.len() >= self.params.min_samples_split
            && rows.len() >= 2 * self.params.min_samples_leaf
            && self.params.max_depth.is_none_or(|d| depth < d)
            && !self.is_pure(rows);
        let split = if can_split { self.best_split(rows) } else { None };
        match split {
            None => {
                let offset = self.push_leaf(rows);
                self.nodes[id] = Node::Leaf { offset };
            }
            Some(Split { feature, threshold }) => {
                let x = self.data.x;
                let mut lo = 0;
                for i in 0..rows.len() {
                    if x[[rows[i], feature]] <= threshold {
                        rows.swap(lo, i);
                        lo += 1;
                    }
                }
                let (l, r) = rows.split_at_mut(lo);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        let first = self.data.row(rows[0]);
        rows[1..].iter().all(|&r| self.data.row(r) == first)
    }

    fn push_leaf(&mut self, rows: &[usize]) -> usize {
        let k = self.data.k;
        let offset = self.leaf_values.len();
        if self.is_pure(rows) {
            self.leaf_values.extend_from_slice(self.data.row(rows[0]));
            return offset;
        }
        self.leaf_values.resize(offset + k, 0.0);
        let leaf = &mut self.leaf_values[offset..];
        for &r in rows {
            for (acc, v) in leaf.iter_mut().zip(self.data.row(r)) {
                *acc += v;
            }
        }
        let inv = 1.0 / rows.len() as f64;
        for (j, v) in leaf.iter_mut().enumerate() {
            *v = (*v * inv).clamp(self.data.y_min[j], self.data.y_max[j]);
        }
        offset
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let m = self.data.x.ncols();
        if self.n_features >= m {
            return (0..m).collect();
        }
        let mut f = index::sample(&mut self.rng, m, self.n_features).into_vec();
        f.sort_unstable();
        f
    }

    /// Best split over the sampled features. Ties keep the lowest feature,
    /// then the lowest threshold.
    fn best_split(&mut self, rows: &[usize]) -> Option<Split> {
        let data = self.data;
        let n = rows.len();
        let min_leaf = self.params.min_samples_leaf;
        self.total.fill(0.0);
        for &r in rows {
            for (t, v) in self.total.iter_mut().zip(data.centered_row(r)) {
                *t += v;
            }
        }
        let mut best: Option<(f64, Split)> = None;
        for feature in self.candidate_features() {
            let col = data.x.column(feature);
            self.order.clear();
            self.order.extend_from_slice(rows);
            self.order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            if col[self.order[0]] == col[self.order[n - 1]] {
                continue;
            }
            self.left_sum.fill(0.0);
            for pos in 1..n {
                let prev = self.order[pos - 1];
                for (l, v) in self.left_sum.iter_mut().zip(data.centered_row(prev)) {
                    *l += v;
                }
                if pos < min_leaf || n - pos < min_leaf {
                    continue;
                }
                let (xa, xb) = (col[prev], col[self.order[pos]]);
                if xa >= xb {
                    continue;
                }
                let (nl, nr) = (pos as f64, (n - pos) as f64);
                let mut sl = 0.0;
                let mut sr = 0.0;
                for (l, t) in self.left_sum.iter().zip(&self.total) {
                    let r = t - l;
                    sl += l * l;
                    sr += r * r;
                }
                let proxy = sl / nl + sr / nr;
                if best.as_ref().is_none_or(|(p, _)| proxy > *p) {
                    let mut threshold = 0.5 * (xa + xb);
                    if threshold >= xb {
                        threshold = xa;
                    }
                    best = Some((proxy, Split { feature, threshold }));
                }
            }
        }
        best.map(|(_, s)| s)
    }
}
