//! Classical receiver and the Euclidean subset selector.
//!
//! [`Receiver::demodulate`] runs the whole chain on one frame: acquisition
//! timing, Moose CFO estimation and correction, per-antenna LS estimation
//! on the pilots with linear interpolation, Alamouti combining and ML
//! detection.

mod detect;
mod estimate;
mod sync;

pub use detect::{euclidean_select, ml_detect};
pub use estimate::{interpolate_csi, ls_estimate, ls_gain, CsiEstimate};
pub use sync::{acquire_timing, moose_cfo, AcquisitionWord, SyncEstimate};

use serde::{Deserialize, Serialize};

use crate::impairments::apply_cfo;
use crate::sigchain::{
    alamouti_combine, bpsk_modulate, downsample_with_taps, rrc_taps, FrameLayout, IQFrame,
    PulseConfig, SelectionMode,
};
use crate::{Cplx, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverConfig {
    /// Minimum normalized acquisition metric; lower frames are dropped.
    pub acq_threshold: f64,
    /// Largest lag, in samples, searched for the acquisition word.
    pub max_timing_lag: usize,
    pub correct_cfo: bool,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self { acq_threshold: 0.5, max_timing_lag: 16, correct_cfo: true }
    }
}

/// Decoded frame plus the intermediate estimates.
#[derive(Clone, Debug)]
pub struct RxOutput {
    pub bits: Vec<u8>,
    pub sync: SyncEstimate,
    /// One estimate per active antenna.
    pub csi: Vec<CsiEstimate>,
}

/// Precomputed references for one frame format.
#[derive(Clone, Debug)]
pub struct Receiver {
    layout: FrameLayout,
    mode: SelectionMode,
    taps: Vec<f64>,
    acq_word: AcquisitionWord,
    pilots: Vec<Cplx>,
    cfg: ReceiverConfig,
}

impl Receiver {
    pub fn new(
        layout: &FrameLayout,
        pulse: &PulseConfig,
        mode: SelectionMode,
        acq_bits: &[u8],
        pilot_bits: &[u8],
        cfg: ReceiverConfig,
    ) -> Result<Self> {
        layout.validate()?;
        if acq_bits.len() != layout.acq_symbols || pilot_bits.len() != layout.pilot_symbols() {
            return Err(Error::LayoutMismatch("reference words do not match layout".into()));
        }
        if layout.pilot_symbols() < mode.antennas_per_subset() {
            return Err(Error::LayoutMismatch("fewer pilots than active antennas".into()));
        }
        let taps = rrc_taps(pulse)?;
        let acq_word = AcquisitionWord::new(acq_bits, &taps, pulse.samples_per_symbol)?;
        Ok(Self {
            layout: *layout,
            mode,
            taps,
            acq_word,
            pilots: bpsk_modulate(pilot_bits),
            cfg,
        })
    }

    pub fn demodulate(&self, rx: &IQFrame) -> Result<RxOutput> {
        let (timing, metric) = acquire_timing(&rx.samples, &self.acq_word, self.cfg.max_timing_lag)?;
        if metric < self.cfg.acq_threshold {
            return Err(Error::NoAcquisition { metric, threshold: self.cfg.acq_threshold });
        }
        let correction = timing as isize - rx.first_symbol_index() as isize;
        let symbol_rate = rx.sample_rate_hz / rx.samples_per_symbol as f64;
        let acq_len = self.layout.acq_symbols;

        let raw = downsample_with_taps(rx, &self.taps, correction)?;
        let cfo_hz = moose_cfo(&raw[..acq_len], acq_len / 2, symbol_rate)?;
        let symbols = if self.cfg.correct_cfo && cfo_hz != 0.0 {
            let fixed = rx.with_samples(apply_cfo(&rx.samples, -cfo_hz, rx.sample_rate_hz));
            downsample_with_taps(&fixed, &self.taps, correction)?
        } else {
            raw
        };
        let payload = &symbols[acq_len..];

        let n_ant = self.mode.antennas_per_subset();
        let pilot_pos = self.layout.pilot_positions();
        let data_pos = self.layout.data_positions();
        let mut csi = Vec::with_capacity(n_ant);
        for ant in 0..n_ant {
            let mine: Vec<usize> = (ant..pilot_pos.len()).step_by(n_ant).collect();
            let positions: Vec<usize> = mine.iter().map(|&k| pilot_pos[k]).collect();
            let rx_p: Vec<Cplx> = positions.iter().map(|&p| payload[p]).collect();
            let tx_p: Vec<Cplx> = mine.iter().map(|&k| self.pilots[k]).collect();
            let effective_gain = ls_estimate(&rx_p, &tx_p)?;
            let all = interpolate_csi(&effective_gain, &positions, self.layout.payload_symbols)?;
            let per_symbol_gain = data_pos.iter().map(|&p| all[p]).collect();
            csi.push(CsiEstimate { effective_gain, per_symbol_gain });
        }

        let data: Vec<Cplx> = data_pos.iter().map(|&p| payload[p]).collect();
        let bits = match self.mode {
            SelectionMode::Single => ml_detect(&data, &csi[0].per_symbol_gain)?,
            SelectionMode::Pair => {
                let pair_gain = |g: &[Cplx]| -> Vec<Cplx> {
                    g.chunks_exact(2).map(|w| (w[0] + w[1]) * 0.5).collect()
                };
                let h_a = pair_gain(&csi[0].per_symbol_gain);
                let h_b = pair_gain(&csi[1].per_symbol_gain);
                let (soft, gain) = alamouti_combine(&data, &h_a, &h_b)?;
                let gains: Vec<Cplx> =
                    gain.iter().flat_map(|&g| [Cplx::new(g, 0.0); 2]).collect();
                ml_detect(&soft, &gains)?
            }
        };
        Ok(RxOutput {
            bits,
            sync: SyncEstimate { cfo_hz, timing_samples: timing, acq_metric: metric },
            csi,
        })
    }
}
