use serde::{Deserialize, Serialize};

use crate::{Cplx, Error, Result};

/// Channel estimate for one transmit antenna over one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiEstimate {
    /// LS gain at each of this antenna's pilot positions.
    pub effective_gain: Vec<Cplx>,
    /// Interpolated gain at every payload symbol.
    pub per_symbol_gain: Vec<Cplx>,
}

/// Least-squares gain of one pilot block: `sum(conj(p) r) / sum(|p|^2)`.
pub fn ls_gain(rx: &[Cplx], tx: &[Cplx]) -> Result<Cplx> {
    if rx.len() != tx.len() || rx.is_empty() {
        return Err(Error::DimensionMismatch { expected: tx.len().max(1), got: rx.len() });
    }
    let energy: f64 = tx.iter().map(|p| p.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::ZeroPilotEnergy);
    }
    let num: Cplx = tx.iter().zip(rx).map(|(p, r)| p.conj() * r).sum();
    Ok(num / energy)
}

/// LS gain at every pilot position (one-symbol blocks).
pub fn ls_estimate(rx_pilots: &[Cplx], tx_pilots: &[Cplx]) -> Result<Vec<Cplx>> {
    if rx_pilots.len() != tx_pilots.len() || rx_pilots.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: tx_pilots.len().max(1),
            got: rx_pilots.len(),
        });
    }
    rx_pilots
        .iter()
        .zip(tx_pilots)
        .map(|(r, p)| ls_gain(std::slice::from_ref(r), std::slice::from_ref(p)))
        .collect()
}

/// Piecewise-linear interpolation of pilot gains onto `0..n_symbols`,
/// holding the nearest pilot value beyond either end.
///
/// `positions` must be strictly increasing and match `gains` in length.
pub fn interpolate_csi(gains: &[Cplx], positions: &[usize], n_symbols: usize) -> Result<Vec<Cplx>> {
    if gains.is_empty() || gains.len() != positions.len() {
        return Err(Error::DimensionMismatch { expected: positions.len().max(1), got: gains.len() });
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("pilot positions must increase".into()));
    }
    let mut out = Vec::with_capacity(n_symbols);
    let mut seg = 0;
    for k in 0..n_symbols {
        while seg + 1 < positions.len() && positions[seg + 1] <= k {
            seg += 1;
        }
        let value = if k <= positions[0] {
            gains[0]
        } else if seg + 1 == positions.len() {
            gains[seg]
        } else {
            let (p0, p1) = (positions[seg] as f64, positions[seg + 1] as f64);
            let t = (k as f64 - p0) / (p1 - p0);
            gains[seg] * (1.0 - t) + gains[seg + 1] * t
        };
        out.push(value);
    }
    Ok(out)
}
