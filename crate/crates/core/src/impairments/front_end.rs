use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::Cplx;

/// Draws one sample of `CN(0, variance)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Cplx {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cplx::new(re * s, im * s)
}

/// Adds complex white Gaussian noise with per-sample variance
/// `symbol_energy / 10^(snr_db/10)`. An infinite SNR disables the noise.
///
/// With unit-energy shaping and matched filtering this gives `Es/N0 = snr`
/// at the symbol instants.
pub fn apply_awgn<R: Rng + ?Sized>(
    signal: &[Cplx],
    snr_db: f64,
    symbol_energy: f64,
    rng: &mut R,
) -> Vec<Cplx> {
    if snr_db == f64::INFINITY {
        return signal.to_vec();
    }
    let n0 = symbol_energy / 10f64.powf(snr_db / 10.0);
    signal.iter().map(|&x| x + complex_normal(rng, n0)).collect()
}

/// Rotates sample `n` by `exp(j 2 pi cfo n / fs)`.
pub fn apply_cfo(signal: &[Cplx], cfo_hz: f64, sample_rate_hz: f64) -> Vec<Cplx> {
    if cfo_hz == 0.0 {
        return signal.to_vec();
    }
    let w = 2.0 * PI * cfo_hz / sample_rate_hz;
    signal
        .iter()
        .enumerate()
        .map(|(n, &x)| x * Cplx::from_polar(1.0, w * n as f64))
        .collect()
}

const FD_TAPS: usize = 16;
const FD_KAISER_BETA: f64 = 8.0;

/// Zeroth-order modified Bessel function (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc taps for a delay of `frac` in (0, 1), indexed by
/// `k - (FD_TAPS/2 - 1)` for `k` in `0..FD_TAPS`. Normalized to unit DC gain.
fn fractional_delay_taps(frac: f64) -> [f64; FD_TAPS] {
    let half = (FD_TAPS / 2) as f64;
    let mut taps = [0.0; FD_TAPS];
    let norm = bessel_i0(FD_KAISER_BETA);
    for (k, tap) in taps.iter_mut().enumerate() {
        let t = k as f64 - (FD_TAPS / 2 - 1) as f64 - frac;
        let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
        let r = (1.0 - (t / half).powi(2)).max(0.0);
        *tap = sinc * bessel_i0(FD_KAISER_BETA * r.sqrt()) / norm;
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Delays the signal by `offset` samples (positive = later). The integer
/// part is a shift; the fractional part uses a 16-tap Kaiser-windowed sinc.
/// Output length equals input length; vacated samples are zero.
pub fn apply_timing_offset(signal: &[Cplx], offset_samples: f64) -> Vec<Cplx> {
    let n = signal.len() as isize;
    let int = offset_samples.floor();
    let frac = offset_samples - int;
    let int = int as isize;
    let at = |i: isize| -> Cplx {
        if (0..n).contains(&i) {
            signal[i as usize]
        } else {
            Cplx::new(0.0, 0.0)
        }
    };
    if frac == 0.0 {
        return (0..n).map(|i| at(i - int)).collect();
    }
    let taps = fractional_delay_taps(frac);
    let lead = (FD_TAPS / 2 - 1) as isize;
    (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(k, &h)| at(i - int - (k as isize - lead)) * h)
                .sum()
        })
        .collect()
}

/// `(mu, nu)` of the image model `y = mu x + nu conj(x)`.
pub fn iq_imbalance_coefficients(gain: f64, phase_rad: f64) -> (Cplx, Cplx) {
    let mu = (Cplx::new(1.0, 0.0) + Cplx::from_polar(gain, -phase_rad)) / 2.0;
    let nu = (Cplx::new(1.0, 0.0) - Cplx::from_polar(gain, phase_rad)) / 2.0;
    (mu, nu)
}

pub fn apply_iq_imbalance(signal: &[Cplx], gain: f64, phase_rad: f64) -> Vec<Cplx> {
    if gain == 1.0 && phase_rad == 0.0 {
        return signal.to_vec();
    }
    let (mu, nu) = iq_imbalance_coefficients(gain, phase_rad);
    signal.iter().map(|&x| mu * x + nu * x.conj()).collect()
}

/// Wiener phase noise: `theta[0] = 0`, `theta[n] = theta[n-1] + w[n]` with
/// `w ~ N(0, sigma^2)`.
pub fn apply_phase_noise<R: Rng + ?Sized>(signal: &[Cplx], sigma: f64, rng: &mut R) -> Vec<Cplx> {
    if sigma == 0.0 {
        return signal.to_vec();
    }
    let mut theta = 0.0;
    signal
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            if n > 0 {
                let w: f64 = rng.sample(StandardNormal);
                theta += sigma * w;
            }
            x * Cplx::from_polar(1.0, theta)
        })
        .collect()
}

/// Rapp AM/AM compression; phase is preserved.
pub fn apply_pa(signal: &[Cplx], saturation: f64, smoothness: f64) -> Vec<Cplx> {
    let two_p = 2.0 * smoothness;
    signal
        .iter()
        .map(|&x| {
            let r = x.norm();
            if r == 0.0 {
                return x;
            }
            let out = r / (1.0 + (r / saturation).powf(two_p)).powf(1.0 / two_p);
            x * (out / r)
        })
        .collect()
}

fn quantize_component(x: f64, step: f64, full_scale: f64) -> f64 {
    let lo = -full_scale + step / 2.0;
    let hi = full_scale - step / 2.0;
    (((x / step).floor() + 0.5) * step).clamp(lo, hi)
}

/// Mid-rise uniform quantizer applied to I and Q independently, with
/// `2^bits` levels spanning `[-full_scale, full_scale]`.
pub fn quantize(signal: &[Cplx], bits: u32, full_scale: f64) -> Vec<Cplx> {
    let step = 2.0 * full_scale / 2f64.powi(bits as i32);
    signal
        .iter()
        .map(|x| {
            Cplx::new(
                quantize_component(x.re, step, full_scale),
                quantize_component(x.im, step, full_scale),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigchain::{rrc_taps, shape_symbols, PulseConfig};
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, seed: u64) -> Vec<Cplx> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect()
    }

    fn max_err(a: &[Cplx], b: &[Cplx]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn awgn_disabled_is_identity() {
        let x = random_signal(100, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_awgn(&x, f64::INFINITY, 1.0, &mut rng), x);
    }

    #[test]
    fn awgn_empirical_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        // unit-power constant-envelope signal
        let x: Vec<Cplx> = (0..n).map(|k| Cplx::from_polar(1.0, 0.01 * k as f64)).collect();
        let y = apply_awgn(&x, 10.0, 1.0, &mut rng);
        let noise: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n as f64;
        let snr_db = 10.0 * (1.0 / noise).log10();
        assert!((snr_db - 10.0).abs() < 0.1, "{snr_db}");
    }

    #[test]
    fn cfo_identity_and_inverse() {
        let x = random_signal(1000, 3);
        assert_eq!(apply_cfo(&x, 0.0, 125e3), x);
        let y = apply_cfo(&x, 317.0, 125e3);
        for (a, b) in x.iter().zip(&y) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        let z = apply_cfo(&y, -317.0, 125e3);
        assert!(max_err(&x, &z) < 1e-12);
    }

    #[test]
    fn timing_offset_integer_cases() {
        let x = random_signal(64, 4);
        assert_eq!(apply_timing_offset(&x, 0.0), x);
        let y = apply_timing_offset(&x, 1.0);
        assert_eq!(y[0], Cplx::new(0.0, 0.0));
        assert!(max_err(&y[1..], &x[..63]) < 1e-9);
        let z = apply_timing_offset(&x, -2.0);
        assert!(max_err(&z[..62], &x[2..]) < 1e-9);
    }

    #[test]
    fn timing_offset_round_trip_band_limited() {
        // multitone below the RRC band edge (0.1875 cycles/sample at beta 0.5, 4 sps)
        let n = 1600;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tones: Vec<(f64, f64)> = (0..7)
            .map(|k| (0.01 + k as f64 * (0.1875 - 0.01) / 6.0, rng.random_range(0.0..6.0)))
            .collect();
        let x: Vec<Cplx> = (0..n)
            .map(|i| {
                let v: f64 = tones.iter().map(|(f, p)| (2.0 * PI * f * i as f64 + p).cos()).sum();
                Cplx::new(v / 7.0, 0.0)
            })
            .collect();
        let y = apply_timing_offset(&apply_timing_offset(&x, 0.5), -0.5);
        let err = max_err(&x[100..n - 100], &y[100..n - 100]);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn timing_offset_moves_pulse_peak() {
        let taps = rrc_taps(&PulseConfig::default()).unwrap();
        let x = shape_symbols(&[Cplx::new(1.0, 0.0)], &taps, 4);
        let y = apply_timing_offset(&x, 2.5);
        // peak now halfway between samples 34 and 35
        assert!((y[34].re - y[35].re).abs() < 1e-3);
        assert!(y[34].re > y[33].re && y[35].re > y[36].re);
    }

    #[test]
    fn iq_imbalance_ideal_and_real_input() {
        let x = random_signal(100, 6);
        assert_eq!(apply_iq_imbalance(&x, 1.0, 0.0), x);
        let (mu, nu) = iq_imbalance_coefficients(1.0, 0.0);
        assert_eq!((mu, nu), (Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)));
        // real input, zero phase: mu + nu = 1 so y = x for any gain
        let real: Vec<Cplx> = x.iter().map(|z| Cplx::new(z.re, 0.0)).collect();
        let y = apply_iq_imbalance(&real, 1.3, 0.0);
        assert!(max_err(&real, &y) < 1e-12);
    }

    #[test]
    fn iq_imbalance_matches_iq_path_model() {
        // Direct I/Q path model: the Q branch has gain g and phase error phi,
        // the I branch is ideal: y = I + j g (Q cos(phi) - I sin(phi)).
        let (g, phi) = (1.05, 5f64.to_radians());
        let x = random_signal(1000, 7);
        let y = apply_iq_imbalance(&x, g, phi);
        for (a, b) in x.iter().zip(&y) {
            let direct = Cplx::new(a.re, g * (a.im * phi.cos() - a.re * phi.sin()));
            assert!((direct - b).norm() < 1e-10);
        }
        let (mu, nu) = iq_imbalance_coefficients(g, phi);
        let irr = (nu / mu).norm_sqr();
        let closed = (1.0 - 2.0 * g * phi.cos() + g * g) / (1.0 + 2.0 * g * phi.cos() + g * g);
        assert!((irr - closed).abs() < 1e-10);
    }

    #[test]
    fn phase_noise_preserves_magnitude() {
        let x = random_signal(500, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(apply_phase_noise(&x, 0.0, &mut rng), x);
        let y = apply_phase_noise(&x, 0.05, &mut rng);
        for (a, b) in x.iter().zip(&y) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_noise_variance_grows_linearly() {
        let sigma = 0.01;
        let n = 200;
        let runs = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ones = vec![Cplx::new(1.0, 0.0); n + 1];
        let mut acc = 0.0;
        for _ in 0..runs {
            let y = apply_phase_noise(&ones, sigma, &mut rng);
            acc += y[n].arg().powi(2);
        }
        let var = acc / runs as f64;
        let expected = n as f64 * sigma * sigma;
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    #[test]
    fn pa_small_signal_and_saturation() {
        let sat = 1.0;
        let x = [Cplx::new(sat / 100.0, 0.0)];
        let y = apply_pa(&x, sat, 2.0);
        assert!(((y[0] - x[0]).norm() / x[0].norm()) < 1e-3);
        let big = apply_pa(&[Cplx::from_polar(1e6, 0.3)], sat, 2.0);
        assert!((big[0].norm() - sat).abs() < 1e-6);
        assert!((big[0].arg() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn quantizer_two_bit_levels() {
        let xs: Vec<Cplx> = (-400..=400).map(|k| Cplx::new(k as f64 / 200.0, 0.0)).collect();
        let mut levels: Vec<f64> = quantize(&xs, 2, 1.0).iter().map(|z| z.re).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels, vec![-0.75, -0.25, 0.25, 0.75]);
    }

    #[test]
    fn quantizer_fine_resolution_is_near_identity() {
        let x: Vec<Cplx> = random_signal(1000, 10).iter().map(|z| z * 0.5).collect();
        let y = quantize(&x, 24, 4.0);
        assert!(max_err(&x, &y) < 1e-6);
    }

    proptest! {
        #[test]
        fn quantizer_idempotent_and_bounded(re in -3.9f64..3.9, im in -3.9f64..3.9, bits in 1u32..=16) {
            let a = 4.0;
            let step = 2.0 * a / 2f64.powi(bits as i32);
            let x = [Cplx::new(re, im)];
            let q = quantize(&x, bits, a);
            prop_assert_eq!(quantize(&q, bits, a), q.clone());
            let lim = a - step / 2.0;
            if re.abs() <= lim && im.abs() <= lim {
                prop_assert!((q[0].re - re).abs() <= step / 2.0 + 1e-12);
                prop_assert!((q[0].im - im).abs() <= step / 2.0 + 1e-12);
            }
        }

        #[test]
        fn quantizer_monotone(a in -5.0f64..5.0, b in -5.0f64..5.0, bits in 1u32..=12) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let q = quantize(&[Cplx::new(lo, hi), Cplx::new(hi, lo)], bits, 2.0);
            prop_assert!(q[0].re <= q[1].re);
            prop_assert!(q[1].im <= q[0].im);
        }

        #[test]
        fn pa_monotone(r1 in 0.0f64..10.0, r2 in 0.0f64..10.0) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let y = apply_pa(&[Cplx::new(lo, 0.0), Cplx::new(hi, 0.0)], 1.0, 2.0);
            prop_assert!(y[0].norm() <= y[1].norm() + 1e-15);
        }
    }
}
