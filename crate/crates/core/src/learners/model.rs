use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestConfig, ForestModel};
use super::nn::{softmax, train_network, Network, TrainConfig};
use super::tree::{argmax, train_tree, TreeModel};
use super::{Dataset, FeatureSpec};
use crate::rx::euclidean_select;
use crate::sigchain::SelectionMode;
use crate::{Cplx, Error, Result};

/// Selection algorithms compared by the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Dtree,
    Mlp,
    Rforest,
    Cnn,
    Classical,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Dtree, Algorithm::Mlp, Algorithm::Rforest, Algorithm::Cnn, Algorithm::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dtree => "DTREE",
            Algorithm::Mlp => "MLP",
            Algorithm::Rforest => "RFOREST",
            Algorithm::Cnn => "CNN",
            Algorithm::Classical => "CLASSICAL",
        }
    }

    pub fn is_learned(self) -> bool {
        self != Algorithm::Classical
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// Hyperparameters of every learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub tree_max_depth: usize,
    pub forest: ForestConfig,
    pub mlp_hidden: Vec<usize>,
    pub cnn_filters: usize,
    pub cnn_kernel: usize,
    pub cnn_hidden: Vec<usize>,
    pub train: TrainConfig,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            tree_max_depth: 15,
            forest: ForestConfig::default(),
            mlp_hidden: vec![10, 10],
            cnn_filters: 256,
            cnn_kernel: 3,
            cnn_hidden: vec![128],
            train: TrainConfig::default(),
        }
    }
}

/// A trained selector, or the Euclidean rule reading the current-frame
/// magnitudes straight out of the feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "UPPERCASE")]
pub enum SelectorModel {
    Dtree(TreeModel),
    Rforest(ForestModel),
    Mlp(Network<f32>),
    Cnn(Network<f32>),
    Classical { n_tx: usize, mode: SelectionMode, features: FeatureSpec },
}

/// Chosen class plus per-class scores where the model has them.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub scores: Option<Vec<f64>>,
}

/// On-disk wrapper carrying a format version.
#[derive(Debug, Serialize, Deserialize)]
struct SavedModel {
    format_version: u32,
    model: SelectorModel,
}

const MODEL_FORMAT: u32 = 1;

impl SelectorModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SelectorModel::Dtree(_) => Algorithm::Dtree,
            SelectorModel::Rforest(_) => Algorithm::Rforest,
            SelectorModel::Mlp(_) => Algorithm::Mlp,
            SelectorModel::Cnn(_) => Algorithm::Cnn,
            SelectorModel::Classical { .. } => Algorithm::Classical,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            SelectorModel::Dtree(t) => t.n_classes,
            SelectorModel::Rforest(f) => f.n_classes,
            SelectorModel::Mlp(n) | SelectorModel::Cnn(n) => n.n_classes,
            SelectorModel::Classical { n_tx, mode, .. } => mode.class_count(*n_tx),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            SelectorModel::Dtree(t) => {
                let dist = t.distribution(x)?;
                Ok(Prediction { class: argmax(dist), scores: Some(dist.to_vec()) })
            }
            SelectorModel::Rforest(f) => {
                let votes = f.votes(x)?;
                let total: f64 = votes.iter().sum();
                Ok(Prediction { class: argmax(&votes), scores: Some(votes.iter().map(|v| v / total).collect()) })
            }
            SelectorModel::Mlp(net) | SelectorModel::Cnn(net) => {
                let input = Array2::from_shape_vec((1, x.len()), x.iter().map(|&v| v as f32).collect())
                    .expect("one row");
                let logits = net.forward(input.view())?;
                let p: Vec<f64> = softmax(logits.as_slice().expect("contiguous"))
                    .into_iter()
                    .map(f64::from)
                    .collect();
                Ok(Prediction { class: argmax(&p), scores: Some(p) })
            }
            SelectorModel::Classical { n_tx, mode, features } => {
                let dim = features.dimension(*n_tx);
                if x.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
                }
                let csi: Vec<Cplx> = x[..n_tx * 3].chunks(3).map(|c| Cplx::new(c[0], c[1])).collect();
                Ok(Prediction { class: euclidean_select(&csi, *mode)?.index, scores: None })
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SavedModel { format_version: MODEL_FORMAT, model: self.clone() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(s)?;
        if saved.format_version != MODEL_FORMAT {
            return Err(Error::Model(format!("unsupported model format {}", saved.format_version)));
        }
        Ok(saved.model)
    }
}

/// Trains `algorithm` on `ds`. All randomness comes from `seed`.
pub fn train_selector(
    algorithm: Algorithm,
    ds: &Dataset,
    cfg: &LearnerConfig,
    mode: SelectionMode,
    features: FeatureSpec,
    seed: u64,
) -> Result<SelectorModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tx = ds.n_features() / (FeatureSpec::DESCRIPTORS * features.frames_needed());
    Ok(match algorithm {
        Algorithm::Dtree => SelectorModel::Dtree(train_tree(ds, cfg.tree_max_depth, &mut rng)?),
        Algorithm::Rforest => SelectorModel::Rforest(train_forest(ds, &cfg.forest, &mut rng)?),
        Algorithm::Mlp | Algorithm::Cnn => {
            let mut net = if algorithm == Algorithm::Mlp {
                Network::<f32>::mlp(ds.n_features(), &cfg.mlp_hidden, ds.n_classes(), &mut rng)?
            } else {
                Network::<f32>::cnn(
                    ds.n_features(),
                    cfg.cnn_filters,
                    cfg.cnn_kernel,
                    &cfg.cnn_hidden,
                    ds.n_classes(),
                    &mut rng,
                )?
            };
            let x = Array2::from_shape_vec(
                (ds.len(), ds.n_features()),
                ds.features().iter().map(|&v| v as f32).collect(),
            )
            .expect("row-major dataset");
            let train = TrainConfig { seed: seed ^ 0x5eed, ..cfg.train };
            train_network(&mut net, &x, ds.labels(), &train)?;
            if algorithm == Algorithm::Mlp {
                SelectorModel::Mlp(net)
            } else {
                SelectorModel::Cnn(net)
            }
        }
        Algorithm::Classical => SelectorModel::Classical { n_tx, mode, features },
    })
}
