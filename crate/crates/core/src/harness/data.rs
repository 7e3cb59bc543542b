use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HarnessConfig;
use crate::impairments::{feedback_csi, quantize, ChannelModel};
use crate::learners::{extract_features, Dataset, DatasetMeta};
use crate::rx::euclidean_select;
use crate::sigchain::{AntennaSubset, SelectionMode};
use crate::{Cplx, Error, Result};

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a seed together with a path of labels into a new seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Best subset for the true channel: the one with the largest summed
/// `|h|^2`, lowest index on ties.
pub fn oracle_label(true_csi: &[Cplx], mode: SelectionMode) -> Result<AntennaSubset> {
    if true_csi.iter().any(|h| !h.is_finite()) {
        return Err(Error::InvalidConfig("non-finite channel gain".into()));
    }
    euclidean_select(true_csi, mode)
}

/// One frame of the CSI stream.
#[derive(Clone, Debug)]
pub struct CsiFrame {
    /// Channel in force while the frame is transmitted.
    pub truth: Vec<Cplx>,
    /// Reported (delayed, noisy, quantized) CSI for this frame.
    pub reported: Vec<Cplx>,
    /// Features built from the reported CSI history.
    pub features: Vec<f64>,
}

/// Fading channel plus the feedback path that reports it.
///
/// The stream is warmed up on construction so the first frame already has
/// the full feedback delay and feature history behind it. All randomness
/// comes from one generator, and every frame consumes the same amount.
pub struct CsiStream {
    channel: ChannelModel,
    cfg: HarnessConfig,
    adc_bits: Option<u32>,
    truth: VecDeque<Vec<Cplx>>,
    reported: VecDeque<Vec<Cplx>>,
    rng: ChaCha8Rng,
}

impl CsiStream {
    pub fn new(cfg: &HarnessConfig, adc_bits: Option<u32>, seed: u64) -> Result<Self> {
        cfg.feedback.validate()?;
        let mut s = Self {
            channel: ChannelModel::new(&cfg.channel)?,
            cfg: cfg.clone(),
            adc_bits,
            truth: VecDeque::new(),
            reported: VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for _ in 0..cfg.feedback.delay_frames + cfg.features.frames_needed() - 1 {
            s.step()?;
        }
        Ok(s)
    }

    fn step(&mut self) -> Result<()> {
        let keep = self.cfg.feedback.delay_frames + 1;
        self.truth.push_back(self.channel.evolve(&mut self.rng).gains);
        if self.truth.len() > keep {
            self.truth.pop_front();
        }
        if self.truth.len() == keep {
            let hist: Vec<Vec<Cplx>> = self.truth.iter().cloned().collect();
            let mut rep = feedback_csi(&hist, &self.cfg.feedback, &mut self.rng)?;
            if let Some(bits) = self.adc_bits {
                rep = quantize(&rep, bits, self.cfg.impairments.adc_full_scale_rms);
            }
            self.reported.push_back(rep);
            if self.reported.len() > self.cfg.features.frames_needed() {
                self.reported.pop_front();
            }
        }
        Ok(())
    }

    pub fn next_frame(&mut self) -> Result<CsiFrame> {
        self.step()?;
        let hist: Vec<Vec<Cplx>> = self.reported.iter().cloned().collect();
        Ok(CsiFrame {
            truth: self.truth.back().expect("warmed up").clone(),
            reported: self.reported.back().expect("warmed up").clone(),
            features: extract_features(&hist, &self.cfg.features)?,
        })
    }
}

/// Labelled selector training data: features from the reported CSI, labels
/// from the true channel of the same frame.
///
/// The reported CSI is quantized at `adc_bits` (unit-power channel, full
/// scale from the impairment profile). Receiver noise plays no part, so one
/// dataset serves every SNR.
pub fn generate_dataset(
    cfg: &HarnessConfig,
    adc_bits: Option<u32>,
    n_frames: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_frames == 0 {
        return Err(Error::Dataset("need at least one frame".into()));
    }
    let mut stream = CsiStream::new(cfg, adc_bits, seed)?;
    let dim = cfg.features.dimension(cfg.channel.n_tx);
    let mut features = Vec::with_capacity(n_frames * dim);
    let mut labels = Vec::with_capacity(n_frames);
    for _ in 0..n_frames {
        let f = stream.next_frame()?;
        labels.push(oracle_label(&f.truth, cfg.mode)?.index);
        features.extend(f.features);
    }
    let source = serde_json::json!({
        "channel": cfg.channel,
        "feedback": cfg.feedback,
        "features": cfg.features,
        "mode": cfg.mode,
        "adc_bits": adc_bits,
        "adc_full_scale_rms": cfg.impairments.adc_full_scale_rms,
    });
    Dataset::new(features, labels, dim, cfg.mode.class_count(cfg.channel.n_tx), DatasetMeta { seed, source })
}
