//! CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
    /// Features drawn per split; `None` uses all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: 15, min_samples_split: 2, max_features: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Class frequencies of the training samples that reached the leaf.
        distribution: Vec<f64>,
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub n_features: usize,
    pub n_classes: usize,
    pub max_depth: usize,
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub fn distribution(&self, x: &[f64]) -> Result<&[f64]> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { distribution } => return Ok(distribution),
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Most frequent class at the reached leaf, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(self.distribution(x)?))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Trains one tree on the rows `indices` of `ds`.
///
/// Splits minimize the weighted Gini impurity and must strictly reduce it.
/// Candidates are scanned feature by feature in ascending order and, within
/// a feature, by ascending threshold; only a strictly better candidate
/// replaces the incumbent. `rng` is used only when `max_features` is set.
pub fn grow_tree<R: Rng + ?Sized>(
    ds: &Dataset,
    indices: &[usize],
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<TreeModel> {
    if indices.is_empty() {
        return Err(Error::Dataset("cannot grow a tree on zero rows".into()));
    }
    let mut builder = Builder { ds, cfg, nodes: Vec::new() };
    let mut idx = indices.to_vec();
    builder.grow(&mut idx, 0, rng);
    Ok(TreeModel {
        n_features: ds.n_features(),
        n_classes: ds.n_classes(),
        max_depth: cfg.max_depth,
        nodes: builder.nodes,
    })
}

/// CART tree over the whole dataset in its stored order.
pub fn train_tree<R: Rng + ?Sized>(ds: &Dataset, max_depth: usize, rng: &mut R) -> Result<TreeModel> {
    let all: Vec<usize> = (0..ds.len()).collect();
    grow_tree(ds, &all, &TreeConfig { max_depth, ..Default::default() }, rng)
}

struct Builder<'a> {
    ds: &'a Dataset,
    cfg: &'a TreeConfig,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted impurity times the node size.
    score: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.ds.n_classes()];
        for &i in idx {
            c[self.ds.labels()[i]] += 1;
        }
        c
    }

    fn grow<R: Rng + ?Sized>(&mut self, idx: &mut [usize], depth: usize, rng: &mut R) -> usize {
        let counts = self.counts(idx);
        let n = idx.len();
        let at = self.nodes.len();
        let distribution: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        self.nodes.push(Node::Leaf { distribution });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || n < self.cfg.min_samples_split.max(2) {
            return at;
        }
        let Some(best) = self.best_split(idx, &counts, rng) else {
            return at;
        };
        // Stable partition keeps the row order inside each child.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.ds.row(i)[best.feature] <= best.threshold);
        let l = self.grow(&mut left, depth + 1, rng);
        let r = self.grow(&mut right, depth + 1, rng);
        self.nodes[at] =
            Node::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
        at
    }

    fn best_split<R: Rng + ?Sized>(
        &self,
        idx: &[usize],
        counts: &[usize],
        rng: &mut R,
    ) -> Option<Candidate> {
        let n = idx.len();
        let f = self.ds.n_features();
        let features: Vec<usize> = match self.cfg.max_features {
            Some(m) if m < f => {
                let mut s = sample(rng, f, m.max(1)).into_vec();
                s.sort_unstable();
                s
            }
            _ => (0..f).collect(),
        };
        let parent_sq: usize = counts.iter().map(|c| c * c).sum();
        let parent = n as f64 - parent_sq as f64 / n as f64;
        let mut best: Option<Candidate> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);

        for feature in features {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.ds.row(i)[feature], self.ds.labels()[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            let mut left = vec![0usize; counts.len()];
            let mut left_sq = 0usize;
            let mut right_sq = parent_sq;
            for i in 0..n - 1 {
                let y = pairs[i].1;
                // Moving one sample of class y from right to left.
                let cr = counts[y] - left[y];
                right_sq -= 2 * cr - 1;
                left_sq += 2 * left[y] + 1;
                left[y] += 1;
                let (x0, x1) = (pairs[i].0, pairs[i + 1].0);
                if x0 == x1 {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                let score = (nl - left_sq as f64 / nl) + (nr - right_sq as f64 / nr);
                if score < parent - 1e-12 * n as f64 && best.as_ref().is_none_or(|b| score < b.score) {
                    let mid = x0 + (x1 - x0) / 2.0;
                    let threshold = if mid < x1 { mid } else { x0 };
                    best = Some(Candidate { feature, threshold, score });
                }
            }
        }
        best
    }
}
