use serde::{Deserialize, Serialize};

use crate::{Cplx, Error, Result};

/// Per-antenna `{Re, Im, |h|}` of the reported CSI for the current frame
/// and `history` earlier frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSpec {
    pub history: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self { history: 1 }
    }
}

impl FeatureSpec {
    pub const DESCRIPTORS: usize = 3;

    pub fn dimension(&self, n_tx: usize) -> usize {
        n_tx * Self::DESCRIPTORS * (1 + self.history)
    }

    /// Frames of reported CSI needed to build one vector.
    pub fn frames_needed(&self) -> usize {
        1 + self.history
    }
}

/// Builds one feature vector from reported CSI, oldest frame first.
///
/// Layout: current frame first, then each earlier frame; within a frame
/// antenna-major with `[Re, Im, |h|]` per antenna.
pub fn extract_features(history: &[Vec<Cplx>], spec: &FeatureSpec) -> Result<Vec<f64>> {
    let need = spec.frames_needed();
    if history.len() < need {
        return Err(Error::InsufficientHistory { have: history.len(), need });
    }
    let n_tx = history[history.len() - 1].len();
    let mut out = Vec::with_capacity(spec.dimension(n_tx));
    for frame in history.iter().rev().take(need) {
        if frame.len() != n_tx {
            return Err(Error::DimensionMismatch { expected: n_tx, got: frame.len() });
        }
        for h in frame {
            out.extend([h.re, h.im, h.re.hypot(h.im)]);
        }
    }
    Ok(out)
}
