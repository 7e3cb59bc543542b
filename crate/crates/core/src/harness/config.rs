use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::impairments::{ChannelConfig, FeedbackModel, ImpairmentProfile};
use crate::learners::{Algorithm, FeatureSpec, LearnerConfig};
use crate::rx::ReceiverConfig;
use crate::sigchain::{FrameLayout, PulseConfig, SelectionMode};
use crate::{Error, Result};

/// Benchmark grid. Every combination of the four axes is one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub master_seed: u64,
    pub adc_bits: Vec<u32>,
    pub snr_db: Vec<f64>,
    pub train_frames: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Data bits transmitted per case; rounded up to whole frames.
    pub eval_bits: usize,
    /// Writes wall-clock columns; off makes the results CSV reproducible
    /// byte for byte.
    pub record_timings: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            adc_bits: vec![8, 16],
            snr_db: vec![0.0, 5.0, 10.0, 15.0],
            train_frames: vec![1000, 2000, 5000, 10_000, 20_000],
            algorithms: Algorithm::ALL.to_vec(),
            eval_bits: 200_000,
            record_timings: true,
        }
    }
}

impl GridConfig {
    /// Shrunk grid for quick checks: two resolutions, two SNRs, one
    /// training size and 10^4 bits per case.
    pub fn smoke() -> Self {
        Self {
            snr_db: vec![0.0, 10.0],
            train_frames: vec![2000],
            eval_bits: 10_000,
            ..Self::default()
        }
    }

    pub fn case_count(&self) -> usize {
        self.adc_bits.len() * self.snr_db.len() * self.train_frames.len() * self.algorithms.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.case_count() == 0 {
            return Err(Error::InvalidConfig("grid has no cases".into()));
        }
        if let Some(b) = self.adc_bits.iter().find(|b| !(1..=24).contains(*b)) {
            return Err(Error::InvalidConfig(format!("adc_bits {b} outside 1..=24")));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR values must be finite".into()));
        }
        if self.train_frames.contains(&0) {
            return Err(Error::InvalidConfig("training sizes must be positive".into()));
        }
        if self.eval_bits == 0 {
            return Err(Error::InvalidConfig("eval_bits must be positive".into()));
        }
        Ok(())
    }
}

/// Everything a run depends on. Defaults are written out in full by
/// [`HarnessConfig::to_json`], so a saved config describes its run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub sample_rate_hz: f64,
    pub mode: SelectionMode,
    pub pulse: PulseConfig,
    pub layout: FrameLayout,
    pub channel: ChannelConfig,
    /// Link impairments. `adc_bits` and `snr_db` are overridden per case.
    pub impairments: ImpairmentProfile,
    pub feedback: FeedbackModel,
    pub features: FeatureSpec,
    pub train: LearnerConfig,
    pub receiver: ReceiverConfig,
    pub grid: GridConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 125_000.0,
            mode: SelectionMode::Pair,
            pulse: PulseConfig::default(),
            layout: FrameLayout::default(),
            channel: ChannelConfig::default(),
            impairments: ImpairmentProfile::default(),
            feedback: FeedbackModel::default(),
            features: FeatureSpec::default(),
            train: LearnerConfig::default(),
            receiver: ReceiverConfig::default(),
            grid: GridConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn smoke() -> Self {
        Self { grid: GridConfig::smoke(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidConfig("sample_rate_hz must be positive".into()));
        }
        self.pulse.validate()?;
        self.layout.validate()?;
        self.impairments.validate()?;
        self.feedback.validate()?;
        self.train.train.validate()?;
        if self.channel.n_tx < self.mode.antennas_per_subset() {
            return Err(Error::InvalidConfig("fewer antennas than the subset size".into()));
        }
        self.grid.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Impairments for one case.
    pub fn profile(&self, adc_bits: u32, snr_db: f64) -> ImpairmentProfile {
        ImpairmentProfile { adc_bits: Some(adc_bits), snr_db: Some(snr_db), ..self.impairments.clone() }
    }
}
