use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{derive_seed, generate_dataset, oracle_label, CsiFrame, CsiStream};
use super::link::Link;
use super::HarnessConfig;
use crate::impairments::ImpairmentProfile;
use crate::learners::{train_selector, Algorithm, Dataset, SelectorModel};
use crate::sigchain::AntennaSubset;
use crate::{Error, Result};

const TAG_TRAIN: u64 = 1;
const TAG_MODEL: u64 = 2;
const TAG_EVAL: u64 = 3;

/// One cell of the benchmark grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub adc_bits: u32,
    pub snr_db: f64,
    pub train_frames: usize,
    pub algorithm: Algorithm,
    /// Seed of the evaluation stream.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub case: CaseSpec,
    pub ber: f64,
    /// Fraction of frames on which the selector matched the oracle.
    pub selection_accuracy: f64,
    pub frames_evaluated: usize,
    pub acq_drops: usize,
    pub train_seconds: f64,
    pub predict_us_mean: f64,
}

/// Raw counters of one evaluation run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinkStats {
    pub frames: usize,
    pub bits: usize,
    /// Bit errors, with each bit of a dropped frame counted as half an error.
    pub bit_errors: f64,
    pub correct_selections: usize,
    pub acq_drops: usize,
    pub predict_seconds: f64,
}

impl LinkStats {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors / self.bits as f64
        }
    }

    pub fn selection_accuracy(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.correct_selections as f64 / self.frames as f64
        }
    }
}

/// Runs `frames` frames through `profile`. `select` maps each frame's
/// reported CSI to a subset index. The reported CSI is quantized at the
/// profile's converter resolution.
///
/// The CSI stream, payload bits and link noise come from three generators
/// derived from `seed`, and each frame consumes the same amount from each
/// whatever subset is picked. Two selectors run with the same seed
/// therefore see identical channels, bits and noise.
pub fn run_link<F>(
    cfg: &HarnessConfig,
    profile: &ImpairmentProfile,
    frames: usize,
    seed: u64,
    mut select: F,
) -> Result<LinkStats>
where
    F: FnMut(&CsiFrame) -> Result<usize>,
{
    let link = Link::new(cfg, profile.clone())?;
    let mut stream = CsiStream::new(cfg, profile.adc_bits, derive_seed(seed, &[1]))?;
    let mut bit_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2]));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[3]));
    let n_tx = cfg.channel.n_tx;
    let mut stats = LinkStats::default();
    for _ in 0..frames {
        let frame = stream.next_frame()?;
        let bits: Vec<u8> = (0..link.bits_per_frame()).map(|_| bit_rng.random_range(0..2)).collect();
        let t = Instant::now();
        let class = select(&frame)?;
        stats.predict_seconds += t.elapsed().as_secs_f64();
        let subset = AntennaSubset::from_index(n_tx, cfg.mode, class)?;
        if subset.index == oracle_label(&frame.truth, cfg.mode)?.index {
            stats.correct_selections += 1;
        }
        let order = Link::stream_order(&subset, &frame.reported);
        let rx = link.transmit(&bits, &order, &frame.truth, &mut noise_rng)?;
        stats.frames += 1;
        stats.bits += bits.len();
        match link.receive(&rx) {
            Ok(out) => {
                stats.bit_errors += out.bits.iter().zip(&bits).filter(|(a, b)| a != b).count() as f64;
            }
            Err(Error::NoAcquisition { .. }) => {
                stats.acq_drops += 1;
                stats.bit_errors += bits.len() as f64 / 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(stats)
}

/// Frames needed to send at least `bits` data bits.
pub fn frames_for_bits(cfg: &HarnessConfig, bits: usize) -> usize {
    bits.div_ceil(cfg.layout.data_symbols())
}

/// Evaluates `model` on a fresh stream seeded by `case.seed`.
pub fn evaluate_case(
    cfg: &HarnessConfig,
    case: &CaseSpec,
    model: &SelectorModel,
    eval_frames: usize,
) -> Result<GridResult> {
    if model.algorithm() != case.algorithm {
        return Err(Error::Model(format!(
            "model is {} but the case asks for {}",
            model.algorithm(),
            case.algorithm
        )));
    }
    let profile = cfg.profile(case.adc_bits, case.snr_db);
    let stats = run_link(cfg, &profile, eval_frames, case.seed, |f| {
        Ok(model.predict(&f.features)?.class)
    })?;
    let predict_us_mean = if cfg.grid.record_timings && stats.frames > 0 {
        stats.predict_seconds * 1e6 / stats.frames as f64
    } else {
        0.0
    };
    Ok(GridResult {
        case: case.clone(),
        ber: stats.ber(),
        selection_accuracy: stats.selection_accuracy(),
        frames_evaluated: stats.frames,
        acq_drops: stats.acq_drops,
        train_seconds: 0.0,
        predict_us_mean,
    })
}

/// Seed of the training data. Every resolution and training size draws
/// from the same channel stream, smaller sets being prefixes of larger ones.
pub fn training_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, &[TAG_TRAIN])
}

/// Seed of the evaluation stream, shared by every case of a grid.
pub fn evaluation_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, &[TAG_EVAL])
}

/// Seed of model initialization and bagging. It depends on the algorithm
/// only, so models at different resolutions or training sizes start from
/// the same weights and differ only through their data.
pub fn model_seed(master_seed: u64, algorithm: Algorithm) -> u64 {
    derive_seed(master_seed, &[TAG_MODEL, algorithm as u64])
}

/// Cases in output order: resolution, then SNR, training size, algorithm.
pub fn grid_cases(cfg: &HarnessConfig) -> Vec<CaseSpec> {
    let g = &cfg.grid;
    let seed = evaluation_seed(g.master_seed);
    let mut out = Vec::with_capacity(g.case_count());
    for &adc_bits in &g.adc_bits {
        for &snr_db in &g.snr_db {
            for &train_frames in &g.train_frames {
                for &algorithm in &g.algorithms {
                    out.push(CaseSpec { adc_bits, snr_db, train_frames, algorithm, seed });
                }
            }
        }
    }
    out
}

/// A case that could not be completed.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseFailure {
    pub case: CaseSpec,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridOutcome {
    pub results: Vec<GridResult>,
    pub failures: Vec<CaseFailure>,
}

/// Resolution, training size and algorithm.
pub type ModelKey = (u32, usize, Algorithm);

/// Trains every model the grid needs. Models do not depend on SNR, so each
/// one is shared by all SNR points of its resolution and training size.
pub fn train_grid_models(cfg: &HarnessConfig) -> Result<BTreeMap<ModelKey, Result<(SelectorModel, f64)>>> {
    let g = &cfg.grid;
    let largest = *g.train_frames.iter().max().ok_or_else(|| Error::InvalidConfig("no training sizes".into()))?;
    let seed = training_seed(g.master_seed);
    let datasets: BTreeMap<u32, Dataset> = g
        .adc_bits
        .par_iter()
        .map(|&b| generate_dataset(cfg, Some(b), largest, seed).map(|d| (b, d)))
        .collect::<Result<_>>()?;

    let mut keys: Vec<ModelKey> = Vec::new();
    for &b in &g.adc_bits {
        for &n in &g.train_frames {
            for &a in &g.algorithms {
                if !keys.contains(&(b, n, a)) {
                    keys.push((b, n, a));
                }
            }
        }
    }
    let trained: Vec<(ModelKey, Result<(SelectorModel, f64)>)> = keys
        .par_iter()
        .map(|&(b, n, a)| {
            let run = || -> Result<(SelectorModel, f64)> {
                let idx: Vec<usize> = (0..n).collect();
                let ds = datasets[&b].subset(&idx)?;
                let t = Instant::now();
                let model = train_selector(a, &ds, &cfg.train, cfg.mode, cfg.features, model_seed(g.master_seed, a))?;
                let seconds = if g.record_timings { t.elapsed().as_secs_f64() } else { 0.0 };
                log::info!("trained {a} on {n} frames at {b} bits");
                Ok((model, seconds))
            };
            ((b, n, a), run())
        })
        .collect();
    Ok(trained.into_iter().collect())
}

/// Runs every case of the grid. Cases whose model failed to train or whose
/// evaluation errored are reported in `failures`; the rest still run.
/// Output order and content do not depend on the number of threads.
pub fn run_grid(cfg: &HarnessConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let models = train_grid_models(cfg)?;
    let eval_frames = frames_for_bits(cfg, cfg.grid.eval_bits);
    let outcomes: Vec<std::result::Result<GridResult, CaseFailure>> = grid_cases(cfg)
        .into_par_iter()
        .map(|case| {
            let fail = |e: &dyn std::fmt::Display| CaseFailure { case: case.clone(), error: e.to_string() };
            match &models[&(case.adc_bits, case.train_frames, case.algorithm)] {
                Ok((model, seconds)) => match evaluate_case(cfg, &case, model, eval_frames) {
                    Ok(r) => Ok(GridResult { train_seconds: *seconds, ..r }),
                    Err(e) => Err(fail(&e)),
                },
                Err(e) => Err(fail(e)),
            }
        })
        .collect();
    let mut out = GridOutcome::default();
    for o in outcomes {
        match o {
            Ok(r) => out.results.push(r),
            Err(f) => {
                log::warn!("case {:?} failed: {}", f.case, f.error);
                out.failures.push(f);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::nn::TrainConfig;
    use crate::learners::ForestConfig;

    fn ideal() -> HarnessConfig {
        HarnessConfig { impairments: ImpairmentProfile::ideal(), ..HarnessConfig::default() }
    }

    #[test]
    fn ideal_stack_with_oracle_is_error_free() {
        let mut cfg = ideal();
        cfg.feedback.delay_frames = 0;
        cfg.feedback.error_std = 0.0;
        let frames = frames_for_bits(&cfg, 100_000);
        let profile = ImpairmentProfile::ideal();
        let stats = run_link(&cfg, &profile, frames, 1, |f| Ok(oracle_label(&f.truth, cfg.mode)?.index)).unwrap();
        assert!(stats.bits >= 100_000);
        assert_eq!(stats.bit_errors, 0.0);
        assert_eq!(stats.acq_drops, 0);
        assert_eq!(stats.selection_accuracy(), 1.0);
    }

    #[test]
    fn oracle_beats_random_selection() {
        let cfg = HarnessConfig::default();
        let frames = 2000;
        let profile = cfg.profile(16, 10.0);
        let oracle = run_link(&cfg, &profile, frames, 4, |f| Ok(oracle_label(&f.truth, cfg.mode)?.index)).unwrap();
        let mut pick = ChaCha8Rng::seed_from_u64(99);
        let random = run_link(&cfg, &profile, frames, 4, |_| Ok(pick.random_range(0..6))).unwrap();
        assert!(oracle.ber() < random.ber(), "oracle {} random {}", oracle.ber(), random.ber());
        assert!((random.selection_accuracy() - 1.0 / 6.0).abs() < 0.03);
    }

    #[test]
    fn grid_is_ordered_and_reproducible() {
        let mut cfg = HarnessConfig::default();
        cfg.train.forest = ForestConfig { tree_count: 3, ..Default::default() };
        cfg.train.cnn_filters = 4;
        cfg.train.cnn_hidden = vec![8];
        cfg.train.train = TrainConfig { epochs: 2, ..Default::default() };
        cfg.grid.adc_bits = vec![8, 16];
        cfg.grid.snr_db = vec![5.0];
        cfg.grid.train_frames = vec![100, 200];
        cfg.grid.eval_bits = 320;
        cfg.grid.record_timings = false;
        let a = run_grid(&cfg).unwrap();
        assert!(a.failures.is_empty());
        assert_eq!(a.results.len(), 20);
        assert_eq!(a.results.iter().map(|r| r.case.clone()).collect::<Vec<_>>(), grid_cases(&cfg));
        for r in &a.results {
            assert!((0.0..=0.5).contains(&r.ber));
            assert!((0.0..=1.0).contains(&r.selection_accuracy));
            assert_eq!(r.frames_evaluated, 2);
        }
        assert_eq!(run_grid(&cfg).unwrap(), a);
    }

    #[test]
    fn mismatched_model_rejected() {
        let cfg = HarnessConfig::default();
        let model = SelectorModel::Classical { n_tx: 4, mode: cfg.mode, features: cfg.features };
        let case = CaseSpec { adc_bits: 16, snr_db: 10.0, train_frames: 1, algorithm: Algorithm::Cnn, seed: 0 };
        assert!(evaluate_case(&cfg, &case, &model, 1).is_err());
    }
}
