use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::{Cplx, Error, Result};

/// Root-raised-cosine pulse parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    /// Roll-off factor in `[0, 1]`.
    pub rolloff: f64,
    /// Total filter support in symbols; must be even.
    pub span_symbols: usize,
    pub samples_per_symbol: usize,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { rolloff: 0.5, span_symbols: 16, samples_per_symbol: 4 }
    }
}

impl PulseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidConfig(format!("rolloff {} outside [0, 1]", self.rolloff)));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::InvalidConfig("samples_per_symbol must be at least 2".into()));
        }
        if self.span_symbols == 0 || self.span_symbols % 2 != 0 {
            return Err(Error::InvalidConfig("span_symbols must be positive and even".into()));
        }
        Ok(())
    }

    pub fn num_taps(&self) -> usize {
        self.span_symbols * self.samples_per_symbol + 1
    }

    /// Delay of one filter pass, in samples.
    pub fn group_delay(&self) -> usize {
        self.span_symbols * self.samples_per_symbol / 2
    }
}

/// Unnormalized RRC impulse response at `t` (in symbol periods).
pub(crate) fn rrc_impulse(t: f64, beta: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if t.abs() < EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < EPS {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Odd-length symmetric RRC taps with unit energy.
pub fn rrc_taps(cfg: &PulseConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.num_taps();
    let mid = (n - 1) as f64 / 2.0;
    let sps = cfg.samples_per_symbol as f64;
    let mut taps: Vec<f64> =
        (0..n).map(|i| rrc_impulse((i as f64 - mid) / sps, cfg.rolloff)).collect();
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let norm = energy.sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    Ok(taps)
}

/// Upsamples `symbols` by `samples_per_symbol` and filters with `taps`.
///
/// Output length is `symbols.len() * sps + taps.len() - 1`; symbol `k` peaks
/// at sample `k * sps + (taps.len() - 1) / 2`.
pub fn shape_symbols(symbols: &[Cplx], taps: &[f64], sps: usize) -> Vec<Cplx> {
    let mut out = vec![Cplx::new(0.0, 0.0); symbols.len() * sps + taps.len() - 1];
    for (k, &s) in symbols.iter().enumerate() {
        if s == Cplx::new(0.0, 0.0) {
            continue;
        }
        let base = k * sps;
        for (j, &t) in taps.iter().enumerate() {
            out[base + j] += s * t;
        }
    }
    out
}
