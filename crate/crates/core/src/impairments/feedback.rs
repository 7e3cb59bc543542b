use rand::Rng;
use serde::{Deserialize, Serialize};

use super::complex_normal;
use crate::{Cplx, Error, Result};

/// Delayed and noisy CSI feedback.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackModel {
    pub delay_frames: usize,
    /// Standard deviation of the complex error per antenna (`E|e|^2 = std^2`).
    pub error_std: f64,
}

impl Default for FeedbackModel {
    fn default() -> Self {
        Self { delay_frames: 1, error_std: 0.05 }
    }
}

impl FeedbackModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.error_std >= 0.0) {
            return Err(Error::InvalidConfig("feedback error_std must be non-negative".into()));
        }
        Ok(())
    }
}

/// Returns `h[m - d] + e` where `history` is ordered oldest first and its
/// last entry is frame `m`.
pub fn feedback_csi<R: Rng + ?Sized>(
    history: &[Vec<Cplx>],
    model: &FeedbackModel,
    rng: &mut R,
) -> Result<Vec<Cplx>> {
    let need = model.delay_frames + 1;
    if history.len() < need {
        return Err(Error::InsufficientHistory { have: history.len(), need });
    }
    let stale = &history[history.len() - need];
    let var = model.error_std * model.error_std;
    Ok(stale
        .iter()
        .map(|&h| if var > 0.0 { h + complex_normal(rng, var) } else { h })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn history(n: usize) -> Vec<Vec<Cplx>> {
        (0..n).map(|m| vec![Cplx::new(m as f64, -(m as f64)); 4]).collect()
    }

    #[test]
    fn ideal_feedback_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = history(3);
        let fb = FeedbackModel { delay_frames: 0, error_std: 0.0 };
        assert_eq!(feedback_csi(&h, &fb, &mut rng).unwrap(), h[2]);
    }

    #[test]
    fn delayed_feedback_indexes_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = history(5);
        let fb = FeedbackModel { delay_frames: 2, error_std: 0.0 };
        assert_eq!(feedback_csi(&h, &fb, &mut rng).unwrap(), h[2]);
    }

    #[test]
    fn insufficient_history_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let fb = FeedbackModel { delay_frames: 2, error_std: 0.0 };
        assert!(matches!(
            feedback_csi(&history(2), &fb, &mut rng),
            Err(Error::InsufficientHistory { have: 2, need: 3 })
        ));
    }

    #[test]
    fn error_variance_matches_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = vec![vec![Cplx::new(0.0, 0.0)]];
        let fb = FeedbackModel { delay_frames: 0, error_std: 0.1 };
        let n = 100_000;
        let var: f64 = (0..n)
            .map(|_| feedback_csi(&h, &fb, &mut rng).unwrap()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((var / 0.01 - 1.0).abs() < 0.1, "{var}");
    }
}
