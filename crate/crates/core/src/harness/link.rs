use rand::Rng;

use super::HarnessConfig;
use crate::impairments::{
    apply_awgn, apply_cfo, apply_iq_imbalance, apply_pa, apply_phase_noise, apply_timing_offset,
    quantize, ImpairmentProfile,
};
use crate::rx::{Receiver, RxOutput};
use crate::sigchain::{
    build_frame, default_acquisition_bits, default_pilot_bits, AntennaSubset, IQFrame,
};
use crate::{Cplx, Error, Result};

/// Zero samples placed on both sides of a received frame, so the timing
/// search has room when the receive chain shifts the signal.
pub const GUARD_SAMPLES: usize = 8;

fn rms(x: &[Cplx]) -> f64 {
    (x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

/// Converter with automatic gain control: full scale follows the measured
/// RMS level of the block.
fn convert(x: &[Cplx], bits: Option<u32>, full_scale_rms: f64) -> Vec<Cplx> {
    match bits {
        Some(b) => {
            let level = rms(x);
            if level > 0.0 {
                quantize(x, b, full_scale_rms * level)
            } else {
                x.to_vec()
            }
        }
        None => x.to_vec(),
    }
}

/// Transmitter, impairment chain and classical receiver for one case.
pub struct Link {
    cfg: HarnessConfig,
    profile: ImpairmentProfile,
    acq_bits: Vec<u8>,
    pilot_bits: Vec<u8>,
    receiver: Receiver,
}

impl Link {
    pub fn new(cfg: &HarnessConfig, profile: ImpairmentProfile) -> Result<Self> {
        profile.validate()?;
        let acq_bits = default_acquisition_bits(&cfg.layout);
        let pilot_bits = default_pilot_bits(&cfg.layout);
        let receiver =
            Receiver::new(&cfg.layout, &cfg.pulse, cfg.mode, &acq_bits, &pilot_bits, cfg.receiver)?;
        Ok(Self { cfg: cfg.clone(), profile, acq_bits, pilot_bits, receiver })
    }

    pub fn bits_per_frame(&self) -> usize {
        self.cfg.layout.data_symbols()
    }

    /// Sends `bits` over `channel` and returns the samples at the receiver's
    /// converter output. Stream `i` goes out of antenna `antennas[i]`; the
    /// first one also carries the acquisition block.
    ///
    /// Each stream may pass a PA and a DAC; the sum then sees CFO, phase
    /// noise, fractional timing offset, AWGN, IQ imbalance and the ADC, in
    /// that order. Every call draws the same amount of randomness from `rng`
    /// whatever the subset.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        bits: &[u8],
        antennas: &[usize],
        channel: &[Cplx],
        rng: &mut R,
    ) -> Result<IQFrame> {
        if antennas.len() != self.cfg.mode.antennas_per_subset() {
            return Err(Error::InvalidConfig("subset size does not match the mode".into()));
        }
        let burst = build_frame(
            bits,
            &self.pilot_bits,
            &self.acq_bits,
            &self.cfg.layout,
            &self.cfg.pulse,
            self.cfg.mode,
            self.cfg.sample_rate_hz,
        )?;
        let p = &self.profile;
        let len = burst.streams[0].samples.len();
        let mut rx = vec![Cplx::new(0.0, 0.0); len + 2 * GUARD_SAMPLES];
        for (stream, &ant) in burst.streams.iter().zip(antennas) {
            let g = *channel
                .get(ant)
                .ok_or(Error::DimensionMismatch { expected: ant + 1, got: channel.len() })?;
            let mut s = stream.samples.clone();
            if let Some(pa) = p.pa {
                s = apply_pa(&s, pa.saturation, pa.smoothness);
            }
            s = convert(&s, p.adc_bits, p.adc_full_scale_rms);
            for (y, x) in rx[GUARD_SAMPLES..].iter_mut().zip(&s) {
                *y += g * x;
            }
        }
        let fs = self.cfg.sample_rate_hz;
        rx = apply_cfo(&rx, p.cfo_hz, fs);
        rx = apply_phase_noise(&rx, p.phase_noise_std_rad, rng);
        if p.timing_offset_samples != 0.0 {
            rx = apply_timing_offset(&rx, p.timing_offset_samples);
        }
        rx = apply_awgn(&rx, p.snr_db.unwrap_or(f64::INFINITY), 1.0, rng);
        rx = apply_iq_imbalance(&rx, p.iq_gain, p.iq_phase_rad);
        rx = convert(&rx, p.adc_bits, p.adc_full_scale_rms);

        Ok(burst.streams[0].with_samples(rx))
    }

    /// Members of `subset`, strongest reported gain first (lower index on
    /// ties), so the acquisition block leaves from the best antenna.
    pub fn stream_order(subset: &AntennaSubset, reported: &[Cplx]) -> Vec<usize> {
        let mut order = subset.members.clone();
        order.sort_by(|&a, &b| reported[b].norm_sqr().total_cmp(&reported[a].norm_sqr()));
        order
    }

    pub fn receive(&self, frame: &IQFrame) -> Result<RxOutput> {
        self.receiver.demodulate(frame)
    }
}
