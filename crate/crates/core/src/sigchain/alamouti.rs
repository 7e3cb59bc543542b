use crate::{Cplx, Error, Result};

/// Splits `symbols` into the two Alamouti antenna streams.
///
/// For each pair `(s1, s2)` antenna a sends `(s1, -s2*)` and antenna b sends
/// `(s2, s1*)`. Power scaling is left to the caller.
pub fn alamouti_encode(symbols: &[Cplx]) -> Result<(Vec<Cplx>, Vec<Cplx>)> {
    if symbols.len() % 2 != 0 {
        return Err(Error::LayoutMismatch(format!(
            "Alamouti needs an even symbol count, got {}",
            symbols.len()
        )));
    }
    let mut a = Vec::with_capacity(symbols.len());
    let mut b = Vec::with_capacity(symbols.len());
    for pair in symbols.chunks_exact(2) {
        let (s1, s2) = (pair[0], pair[1]);
        a.push(s1);
        a.push(-s2.conj());
        b.push(s2);
        b.push(s1.conj());
    }
    Ok((a, b))
}

/// Linear Alamouti combining.
///
/// `received` holds consecutive pairs `(r1, r2)`; `h_a` and `h_b` hold one
/// gain per pair. Returns the soft symbols `(s1_hat, s2_hat)` for every pair
/// and the effective gain `|h_a|^2 + |h_b|^2` per pair.
pub fn alamouti_combine(
    received: &[Cplx],
    h_a: &[Cplx],
    h_b: &[Cplx],
) -> Result<(Vec<Cplx>, Vec<f64>)> {
    let pairs = received.len() / 2;
    if received.len() % 2 != 0 {
        return Err(Error::LayoutMismatch("odd number of received symbols".into()));
    }
    if h_a.len() != pairs || h_b.len() != pairs {
        return Err(Error::DimensionMismatch { expected: pairs, got: h_a.len().min(h_b.len()) });
    }
    let mut soft = Vec::with_capacity(received.len());
    let mut gain = Vec::with_capacity(pairs);
    for ((r, &ha), &hb) in received.chunks_exact(2).zip(h_a).zip(h_b) {
        let (r1, r2) = (r[0], r[1]);
        soft.push(ha.conj() * r1 + hb * r2.conj());
        soft.push(hb.conj() * r1 - ha * r2.conj());
        gain.push(ha.norm_sqr() + hb.norm_sqr());
    }
    Ok((soft, gain))
}
