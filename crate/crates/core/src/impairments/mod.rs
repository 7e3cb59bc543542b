//! Seeded channel and front-end impairments.
//!
//! Every transform takes its randomness from an explicit RNG so that a case
//! seed fully determines the output. At their ideal settings all transforms
//! reduce to the identity.

mod channel;
mod feedback;
mod front_end;

pub use channel::{ChannelConfig, ChannelModel, ChannelRealization, SpatialCorrelation};
pub use feedback::{feedback_csi, FeedbackModel};
pub use front_end::{
    apply_awgn, apply_cfo, apply_iq_imbalance, apply_pa, apply_phase_noise, apply_timing_offset,
    complex_normal, iq_imbalance_coefficients, quantize,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rapp solid-state amplifier model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RappPa {
    /// Output saturation amplitude.
    pub saturation: f64,
    /// Smoothness exponent `p`.
    pub smoothness: f64,
}

impl Default for RappPa {
    fn default() -> Self {
        Self { saturation: 1.0, smoothness: 2.0 }
    }
}

/// All impairment parameters applied to one link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpairmentProfile {
    pub cfo_hz: f64,
    /// Fractional receive timing offset, `|offset| < 4`.
    pub timing_offset_samples: f64,
    /// IQ amplitude imbalance `g` (1 is ideal).
    pub iq_gain: f64,
    /// IQ phase imbalance in radians (0 is ideal).
    pub iq_phase_rad: f64,
    /// Per-sample standard deviation of the Wiener phase increment.
    pub phase_noise_std_rad: f64,
    /// Converter resolution; `None` is an ideal converter.
    pub adc_bits: Option<u32>,
    /// Converter full scale as a multiple of the nominal RMS level.
    pub adc_full_scale_rms: f64,
    /// Power amplifier nonlinearity; `None` disables it.
    pub pa: Option<RappPa>,
    /// Symbol SNR `Es/N0` in dB; `None` disables noise.
    pub snr_db: Option<f64>,
}

impl Default for ImpairmentProfile {
    /// The impaired benchmark profile.
    fn default() -> Self {
        Self {
            cfo_hz: 200.0,
            timing_offset_samples: 0.0,
            iq_gain: 1.05,
            iq_phase_rad: 5f64.to_radians(),
            phase_noise_std_rad: 0.01,
            adc_bits: Some(16),
            adc_full_scale_rms: 4.0,
            pa: None,
            snr_db: Some(10.0),
        }
    }
}

impl ImpairmentProfile {
    /// Every impairment at its identity setting.
    pub fn ideal() -> Self {
        Self {
            cfo_hz: 0.0,
            timing_offset_samples: 0.0,
            iq_gain: 1.0,
            iq_phase_rad: 0.0,
            phase_noise_std_rad: 0.0,
            adc_bits: None,
            adc_full_scale_rms: 4.0,
            pa: None,
            snr_db: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.adc_bits {
            if !(1..=24).contains(&b) {
                return Err(Error::InvalidConfig(format!("adc_bits {b} outside 1..=24")));
            }
        }
        if !(self.adc_full_scale_rms > 0.0) {
            return Err(Error::InvalidConfig("adc_full_scale_rms must be positive".into()));
        }
        if !(self.phase_noise_std_rad >= 0.0) {
            return Err(Error::InvalidConfig("phase_noise_std_rad must be non-negative".into()));
        }
        if !(self.iq_gain > 0.0) {
            return Err(Error::InvalidConfig("iq_gain must be positive".into()));
        }
        if !(self.timing_offset_samples.abs() < 4.0) {
            return Err(Error::InvalidConfig("|timing_offset_samples| must be below 4".into()));
        }
        if let Some(pa) = self.pa {
            if !(pa.saturation > 0.0 && pa.smoothness > 0.0) {
                return Err(Error::InvalidConfig("PA saturation and smoothness must be positive".into()));
            }
        }
        if !self.cfo_hz.is_finite() || !self.iq_phase_rad.is_finite() {
            return Err(Error::InvalidConfig("non-finite impairment parameter".into()));
        }
        Ok(())
    }
}
