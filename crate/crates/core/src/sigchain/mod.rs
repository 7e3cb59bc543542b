//! Deterministic transmit/receive baseband chain.
//!
//! Symbols are BPSK, shaped with a unit-energy root-raised-cosine pulse and
//! carried in frames of `[acquisition | pilots interleaved with data]`. In
//! pair mode the data symbols are Alamouti-coded over the two selected
//! antennas; in single mode one antenna carries everything.

mod alamouti;
mod frame;
mod pulse;

pub use alamouti::{alamouti_combine, alamouti_encode};
pub use frame::{
    build_frame, default_acquisition_bits, default_pilot_bits, matched_filter_at,
    matched_filter_downsample, FrameLayout, IQFrame, TxBurst,
};
pub use pulse::{rrc_taps, shape_symbols, PulseConfig};

pub(crate) use frame::downsample_with_taps;

use serde::{Deserialize, Serialize};

use crate::{Cplx, Error, Result};

/// Maps bit 0 to +1 and bit 1 to -1.
pub fn bpsk_modulate(bits: &[u8]) -> Vec<Cplx> {
    bits.iter()
        .map(|&b| if b == 0 { Cplx::new(1.0, 0.0) } else { Cplx::new(-1.0, 0.0) })
        .collect()
}

/// Hard decision on the real part; zero maps to bit 0.
pub fn bpsk_demodulate(symbols: &[Cplx]) -> Vec<u8> {
    symbols.iter().map(|s| u8::from(s.re < 0.0)).collect()
}

/// How many antennas carry a frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// One antenna, plain BPSK.
    Single,
    /// Two antennas, Alamouti-coded.
    #[default]
    Pair,
}

impl SelectionMode {
    pub fn antennas_per_subset(self) -> usize {
        match self {
            SelectionMode::Single => 1,
            SelectionMode::Pair => 2,
        }
    }

    /// Number of subsets (classes) for `n_tx` antennas.
    pub fn class_count(self, n_tx: usize) -> usize {
        enumerate_subsets(n_tx, self.antennas_per_subset()).len()
    }
}

/// All `k`-element subsets of `0..n`, in lexicographic order.
pub fn enumerate_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// A selected set of transmit antennas together with its class index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaSubset {
    pub index: usize,
    pub members: Vec<usize>,
}

impl AntennaSubset {
    pub fn from_index(n_tx: usize, mode: SelectionMode, index: usize) -> Result<Self> {
        let all = enumerate_subsets(n_tx, mode.antennas_per_subset());
        let members = all.get(index).cloned().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "subset index {index} out of range for {} classes",
                all.len()
            ))
        })?;
        Ok(Self { index, members })
    }

    pub fn from_members(n_tx: usize, members: &[usize]) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "subset members must be strictly increasing: {members:?}"
            )));
        }
        let all = enumerate_subsets(n_tx, members.len());
        all.iter()
            .position(|m| m.as_slice() == members)
            .map(|index| Self { index, members: members.to_vec() })
            .ok_or_else(|| Error::InvalidConfig(format!("no subset {members:?} of {n_tx} antennas")))
    }
}
