use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::sigchain::{bpsk_modulate, matched_filter_at, shape_symbols};
use crate::{Cplx, Error, Result};

/// Output of timing acquisition and CFO estimation for one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncEstimate {
    pub cfo_hz: f64,
    /// Sample index at which the first acquisition pulse peaks.
    pub timing_samples: usize,
    /// Normalized correlation peak in `[0, 1]`.
    pub acq_metric: f64,
}

/// The acquisition word as it appears after the matched filter.
#[derive(Clone, Debug)]
pub struct AcquisitionWord {
    /// Acquisition symbols shaped with the raised-cosine cascade.
    reference: Vec<Cplx>,
    taps: Vec<f64>,
    /// Offset of the first symbol peak inside `reference`.
    peak_delay: usize,
}

impl AcquisitionWord {
    pub fn new(acq_bits: &[u8], taps: &[f64], sps: usize) -> Result<Self> {
        if acq_bits.is_empty() || taps.is_empty() {
            return Err(Error::InvalidConfig("empty acquisition word or filter".into()));
        }
        let cascade: Vec<f64> = shape_symbols(
            &taps.iter().map(|&t| Cplx::new(t, 0.0)).collect::<Vec<_>>(),
            taps,
            1,
        )
        .iter()
        .map(|c| c.re)
        .collect();
        let shaped = shape_symbols(&bpsk_modulate(acq_bits), &cascade, sps);
        let peak_delay = taps.len() - 1;
        // Stop at the last acquisition peak so that payload pulses barely
        // leak into the correlation window.
        let end = peak_delay + (acq_bits.len() - 1) * sps + 1;
        Ok(Self { reference: shaped[..end].to_vec(), taps: taps.to_vec(), peak_delay })
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }
}

/// Searches lags `0..=max_lag` of the matched-filter output for the
/// acquisition word.
///
/// The metric correlates the two halves of the reference separately and
/// adds their magnitudes, so a residual CFO costs little coherence. It is
/// normalized by both window energies and lies in `[0, 1]`. Returns the
/// input sample index at which the first acquisition pulse peaks, and the
/// metric.
pub fn acquire_timing(rx: &[Cplx], word: &AcquisitionWord, max_lag: usize) -> Result<(usize, f64)> {
    let l = word.reference.len();
    let filtered_len = rx.len() + word.taps.len() - 1;
    if filtered_len < l || rx.len() < word.taps.len() {
        return Err(Error::FrameTooShort { len: rx.len(), needed: l.max(word.taps.len()) });
    }
    let last = max_lag.min(filtered_len - l);
    let y: Vec<Cplx> = (0..last + l).map(|i| matched_filter_at(rx, &word.taps, i)).collect();
    let mid = l / 2;
    let ref_energy: f64 = word.reference.iter().map(|x| x.norm_sqr()).sum();

    let mut best = (0, -1.0);
    for lag in 0..=last {
        let win = &y[lag..lag + l];
        let mut c1 = Cplx::new(0.0, 0.0);
        let mut c2 = Cplx::new(0.0, 0.0);
        let mut energy = 0.0;
        for (i, (&r, &p)) in win.iter().zip(&word.reference).enumerate() {
            let prod = r * p.conj();
            if i < mid {
                c1 += prod;
            } else {
                c2 += prod;
            }
            energy += r.norm_sqr();
        }
        let metric = if energy > 0.0 {
            (c1.norm() + c2.norm()) / (energy * ref_energy).sqrt()
        } else {
            0.0
        };
        if metric > best.1 {
            best = (lag, metric);
        }
    }
    // The matched filter adds half its length to the pulse peak.
    Ok((best.0 + word.peak_delay - (word.taps.len() - 1) / 2, best.1))
}

/// Moose estimator over two identical halves of `half_len` symbols:
/// `rate / (2 pi N) * arg(sum r[n+N] conj(r[n]))`.
///
/// The estimate is unambiguous for `|cfo| < rate / (2N)`; larger offsets
/// alias by multiples of `rate / N`.
pub fn moose_cfo(acq: &[Cplx], half_len: usize, symbol_rate: f64) -> Result<f64> {
    if half_len == 0 || acq.len() < 2 * half_len {
        return Err(Error::FrameTooShort { len: acq.len(), needed: 2 * half_len.max(1) });
    }
    let corr: Cplx = (0..half_len).map(|n| acq[n + half_len] * acq[n].conj()).sum();
    if corr.norm() == 0.0 {
        return Err(Error::UndefinedEstimate("acquisition correlation is zero"));
    }
    Ok(symbol_rate / (2.0 * PI * half_len as f64) * corr.arg())
}
