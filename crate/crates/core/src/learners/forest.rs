use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, grow_tree, TreeConfig, TreeModel};
use super::Dataset;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub tree_count: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
    /// Features drawn per split; `None` means `round(sqrt(F))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { tree_count: 50, max_depth: 25, bootstrap: true, max_features: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_classes: usize,
    pub trees: Vec<TreeModel>,
}

impl ForestModel {
    /// Vote counts per class.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)?] += 1.0;
        }
        Ok(v)
    }

    /// Majority vote, lowest class index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.votes(x)?))
    }
}

/// Trains `tree_count` CART trees. Each tree draws its own seed from `rng`,
/// then its bootstrap sample and per-split feature subsets from that seed.
pub fn train_forest<R: Rng + ?Sized>(ds: &Dataset, cfg: &ForestConfig, rng: &mut R) -> Result<ForestModel> {
    if cfg.tree_count == 0 {
        return Err(Error::InvalidConfig("forest needs at least one tree".into()));
    }
    let f = ds.n_features();
    let max_features = cfg.max_features.unwrap_or_else(|| ((f as f64).sqrt().round() as usize).max(1));
    let tree_cfg = TreeConfig { max_depth: cfg.max_depth, min_samples_split: 2, max_features: Some(max_features) };
    let n = ds.len();
    let trees = (0..cfg.tree_count)
        .map(|_| {
            let mut tree_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
            let idx: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| tree_rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(ds, &idx, &tree_cfg, &mut tree_rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel { n_classes: ds.n_classes(), trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::train_tree;
    use crate::learners::DatasetMeta;

    /// Noisy two-feature problem: label = quadrant of (x0, x1), 20% flipped.
    fn noisy(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let noise: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut label = usize::from(a > 0.0) * 2 + usize::from(b > 0.0);
            if rng.random_bool(0.2) {
                label = rng.random_range(0..4);
            }
            x.extend([a, b]);
            x.extend(noise);
            y.push(label);
        }
        Dataset::new(x, y, 6, 4, DatasetMeta::default()).unwrap()
    }

    #[test]
    fn degenerate_forest_equals_tree() {
        let ds = noisy(300, 1);
        let cfg = ForestConfig { tree_count: 1, max_depth: 15, bootstrap: false, max_features: Some(6) };
        let forest = train_forest(&ds, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let tree = train_tree(&ds, 15, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(forest.trees[0], tree);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
            assert_eq!(forest.predict(&x).unwrap(), tree.predict(&x).unwrap());
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let ds = noisy(200, 2);
        let cfg = ForestConfig { tree_count: 5, ..Default::default() };
        let a = train_forest(&ds, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = train_forest(&ds, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        let c = train_forest(&ds, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forest_not_worse_than_tree_on_noisy_data() {
        let train = noisy(500, 10);
        let test = noisy(2000, 11);
        let acc = |pred: &dyn Fn(&[f64]) -> usize| {
            (0..test.len()).filter(|&i| pred(test.row(i)) == test.labels()[i]).count() as f64
                / test.len() as f64
        };
        let tree = train_tree(&train, 25, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let cfg = ForestConfig { tree_count: 50, ..Default::default() };
        let forest = train_forest(&train, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let a_tree = acc(&|x| tree.predict(x).unwrap());
        let a_forest = acc(&|x| forest.predict(x).unwrap());
        assert!(a_forest >= a_tree - 0.02, "forest {a_forest} tree {a_tree}");
    }

    #[test]
    fn depth_limit_respected() {
        let ds = noisy(400, 3);
        let cfg = ForestConfig { tree_count: 3, max_depth: 4, ..Default::default() };
        let f = train_forest(&ds, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(f.trees.iter().all(|t| t.depth() <= 4));
    }
}
