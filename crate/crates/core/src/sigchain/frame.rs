use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::{alamouti_encode, bpsk_modulate, rrc_taps, shape_symbols, PulseConfig, SelectionMode};
use crate::{Cplx, Error, Result};

/// Symbol layout of one frame: an acquisition block followed by a payload
/// in which every `pilot_period`-th symbol (starting at 0) is a pilot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub acq_symbols: usize,
    pub payload_symbols: usize,
    pub pilot_period: usize,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self { acq_symbols: 32, payload_symbols: 192, pilot_period: 6 }
    }
}

impl FrameLayout {
    pub fn validate(&self) -> Result<()> {
        if self.acq_symbols == 0 || self.acq_symbols % 2 != 0 {
            return Err(Error::InvalidConfig("acq_symbols must be positive and even".into()));
        }
        if self.pilot_period < 2 || self.payload_symbols % self.pilot_period != 0 {
            return Err(Error::InvalidConfig(format!(
                "payload_symbols {} not divisible by pilot_period {}",
                self.payload_symbols, self.pilot_period
            )));
        }
        if self.data_symbols() % 2 != 0 || self.data_symbols() == 0 {
            return Err(Error::InvalidConfig("data symbol count must be positive and even".into()));
        }
        Ok(())
    }

    pub fn pilot_symbols(&self) -> usize {
        self.payload_symbols / self.pilot_period
    }

    pub fn data_symbols(&self) -> usize {
        self.payload_symbols - self.pilot_symbols()
    }

    pub fn total_symbols(&self) -> usize {
        self.acq_symbols + self.payload_symbols
    }

    pub fn is_pilot(&self, payload_pos: usize) -> bool {
        payload_pos % self.pilot_period == 0
    }

    /// Payload-relative pilot positions.
    pub fn pilot_positions(&self) -> Vec<usize> {
        (0..self.payload_symbols).filter(|&p| self.is_pilot(p)).collect()
    }

    /// Payload-relative data positions.
    pub fn data_positions(&self) -> Vec<usize> {
        (0..self.payload_symbols).filter(|&p| !self.is_pilot(p)).collect()
    }
}

/// Complex baseband samples of one frame for one antenna (or the receiver).
#[derive(Clone, Debug, PartialEq)]
pub struct IQFrame {
    pub samples: Vec<Cplx>,
    pub layout: FrameLayout,
    pub sample_rate_hz: f64,
    pub samples_per_symbol: usize,
    /// Shaping-filter transient included in `samples` (taps - 1).
    pub transient: usize,
}

impl IQFrame {
    /// Sample index at which the first symbol's pulse peaks.
    pub fn first_symbol_index(&self) -> usize {
        self.transient / 2
    }

    pub fn with_samples(&self, samples: Vec<Cplx>) -> Self {
        Self { samples, ..self.clone() }
    }
}

/// Per-antenna output of [`build_frame`].
#[derive(Clone, Debug)]
pub struct TxBurst {
    pub mode: SelectionMode,
    /// Symbol-rate stream per selected antenna, before shaping.
    pub symbols: Vec<Vec<Cplx>>,
    /// Shaped stream per selected antenna.
    pub streams: Vec<IQFrame>,
}

/// Maximal-length sequence from the 7-bit LFSR `x^7 + x^6 + 1`.
fn lfsr_bits(n: usize) -> Vec<u8> {
    let mut state: u8 = 0x7f;
    (0..n)
        .map(|_| {
            let bit = ((state >> 6) ^ (state >> 5)) & 1;
            state = ((state << 1) | bit) & 0x7f;
            bit
        })
        .collect()
}

/// Fixed acquisition word: two identical halves of a pseudo-random sequence.
pub fn default_acquisition_bits(layout: &FrameLayout) -> Vec<u8> {
    let half = lfsr_bits(layout.acq_symbols / 2);
    half.iter().chain(half.iter()).copied().collect()
}

/// Fixed pilot sequence, taken from the same LFSR after the acquisition half.
pub fn default_pilot_bits(layout: &FrameLayout) -> Vec<u8> {
    let all = lfsr_bits(layout.acq_symbols / 2 + layout.pilot_symbols());
    all[layout.acq_symbols / 2..].to_vec()
}

/// Builds the shaped per-antenna streams for one frame.
///
/// The acquisition block goes out from the first stream only, at unit
/// amplitude; the caller maps its strongest antenna to that stream. Sending
/// it from both antennas would make the receiver see `h_a + h_b`, which
/// fades even when both gains are strong. In pair mode pilots alternate
/// between the two antennas at unit amplitude, so the receiver can estimate
/// each gain separately, and data pairs are Alamouti-coded with `1/sqrt(2)`
/// scaling.
pub fn build_frame(
    data_bits: &[u8],
    pilot_bits: &[u8],
    acq_bits: &[u8],
    layout: &FrameLayout,
    cfg: &PulseConfig,
    mode: SelectionMode,
    sample_rate_hz: f64,
) -> Result<TxBurst> {
    layout.validate()?;
    if data_bits.len() != layout.data_symbols() {
        return Err(Error::LayoutMismatch(format!(
            "expected {} data bits, got {}",
            layout.data_symbols(),
            data_bits.len()
        )));
    }
    if pilot_bits.len() != layout.pilot_symbols() {
        return Err(Error::LayoutMismatch(format!(
            "expected {} pilot bits, got {}",
            layout.pilot_symbols(),
            pilot_bits.len()
        )));
    }
    if acq_bits.len() != layout.acq_symbols {
        return Err(Error::LayoutMismatch(format!(
            "expected {} acquisition bits, got {}",
            layout.acq_symbols,
            acq_bits.len()
        )));
    }
    let half = layout.acq_symbols / 2;
    if acq_bits[..half] != acq_bits[half..] {
        return Err(Error::LayoutMismatch("acquisition halves differ".into()));
    }

    let n_ant = mode.antennas_per_subset();
    let acq = bpsk_modulate(acq_bits);
    let pilots = bpsk_modulate(pilot_bits);
    let data = bpsk_modulate(data_bits);
    let zero = Cplx::new(0.0, 0.0);

    let data_streams: Vec<Vec<Cplx>> = match mode {
        SelectionMode::Single => vec![data],
        SelectionMode::Pair => {
            let (a, b) = alamouti_encode(&data)?;
            vec![a, b]
                .into_iter()
                .map(|s| s.into_iter().map(|x| x * FRAC_1_SQRT_2).collect())
                .collect()
        }
    };

    let mut symbols = vec![Vec::with_capacity(layout.total_symbols()); n_ant];
    for (ant, stream) in symbols.iter_mut().enumerate() {
        stream.extend(acq.iter().map(|&s| if ant == 0 { s } else { zero }));
        let mut pilot_k = 0;
        let mut data_k = 0;
        for p in 0..layout.payload_symbols {
            if layout.is_pilot(p) {
                let owner = pilot_k % n_ant;
                stream.push(if owner == ant { pilots[pilot_k] } else { zero });
                pilot_k += 1;
            } else {
                stream.push(data_streams[ant][data_k]);
                data_k += 1;
            }
        }
    }

    let taps = rrc_taps(cfg)?;
    let streams = symbols
        .iter()
        .map(|s| IQFrame {
            samples: shape_symbols(s, &taps, cfg.samples_per_symbol),
            layout: *layout,
            sample_rate_hz,
            samples_per_symbol: cfg.samples_per_symbol,
            transient: taps.len() - 1,
        })
        .collect();
    Ok(TxBurst { mode, symbols, streams })
}

/// One output sample of the (full) convolution of `x` with `taps`.
pub fn matched_filter_at(x: &[Cplx], taps: &[f64], i: usize) -> Cplx {
    let lo = i.saturating_sub(x.len().saturating_sub(1));
    let hi = i.min(taps.len() - 1);
    let mut acc = Cplx::new(0.0, 0.0);
    for j in lo..=hi {
        acc += x[i - j] * taps[j];
    }
    acc
}

/// Matched-filters `rx` and samples every symbol instant.
///
/// `timing_correction` shifts the sampling grid relative to the nominal one
/// (the cascade group delay). Returns one sample per layout symbol.
pub(crate) fn downsample_with_taps(
    rx: &IQFrame,
    taps: &[f64],
    timing_correction: isize,
) -> Result<Vec<Cplx>> {
    if rx.samples.len() < taps.len() {
        return Err(Error::FrameTooShort { len: rx.samples.len(), needed: taps.len() });
    }
    let sps = rx.samples_per_symbol;
    let n_sym = rx.layout.total_symbols();
    let full_len = rx.samples.len() + taps.len() - 1;
    let nominal = (rx.first_symbol_index() + (taps.len() - 1) / 2) as isize;
    let start = nominal + timing_correction;
    let last = start + ((n_sym - 1) * sps) as isize;
    if start < 0 || last >= full_len as isize {
        return Err(Error::FrameTooShort {
            len: rx.samples.len(),
            needed: (last.max(0) as usize + 1).saturating_sub(taps.len() - 1),
        });
    }
    Ok((0..n_sym)
        .map(|k| matched_filter_at(&rx.samples, taps, start as usize + k * sps))
        .collect())
}

pub fn matched_filter_downsample(
    rx: &IQFrame,
    cfg: &PulseConfig,
    timing_correction: isize,
) -> Result<Vec<Cplx>> {
    let taps = rrc_taps(cfg)?;
    downsample_with_taps(rx, &taps, timing_correction)
}
