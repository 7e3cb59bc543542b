use rand::Rng;
use serde::{Deserialize, Serialize};

use super::complex_normal;
use crate::{Cplx, Error, Result};

/// Spatial correlation between transmit antennas.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialCorrelation {
    #[default]
    Identity,
    /// `R[i][j] = c^|i-j|`.
    Exponential { coefficient: f64 },
    /// Explicit Hermitian matrix given as real and imaginary parts.
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl SpatialCorrelation {
    pub fn matrix(&self, n: usize) -> Result<Vec<Vec<Cplx>>> {
        match self {
            SpatialCorrelation::Identity => Ok((0..n)
                .map(|i| {
                    (0..n).map(|j| Cplx::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
                })
                .collect()),
            SpatialCorrelation::Exponential { coefficient } => Ok((0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| Cplx::new(coefficient.powi((i as i32 - j as i32).abs()), 0.0))
                        .collect()
                })
                .collect()),
            SpatialCorrelation::Matrix { re, im } => {
                if re.len() != n || im.len() != n || re.iter().chain(im).any(|r| r.len() != n) {
                    return Err(Error::InvalidConfig(format!(
                        "spatial correlation must be {n}x{n}"
                    )));
                }
                Ok((0..n)
                    .map(|i| (0..n).map(|j| Cplx::new(re[i][j], im[i][j])).collect())
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub n_tx: usize,
    /// Frame-to-frame correlation `rho` in `[0, 1)`.
    pub time_corr_rho: f64,
    pub spatial_corr: SpatialCorrelation,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { n_tx: 4, time_corr_rho: 0.95, spatial_corr: SpatialCorrelation::Identity }
    }
}

/// Per-frame flat-fading gains, one per transmit antenna.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Cplx>,
    pub frame_index: u64,
}

/// First-order autoregressive Rayleigh channel with spatial correlation:
/// `h[m] = rho h[m-1] + sqrt(1 - rho^2) R^{1/2} w`, `w ~ CN(0, I)`.
#[derive(Clone, Debug)]
pub struct ChannelModel {
    rho: f64,
    /// Lower-triangular factor `L` with `L L^H = R`.
    factor: Vec<Vec<Cplx>>,
    state: Option<Vec<Cplx>>,
    next_index: u64,
}

/// Cholesky factor of a Hermitian PSD matrix, tolerating zero pivots.
fn psd_factor(r: &[Vec<Cplx>]) -> Result<Vec<Vec<Cplx>>> {
    const TOL: f64 = 1e-9;
    let n = r.len();
    for i in 0..n {
        if (r[i][i] - Cplx::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::NotPsd);
        }
        for j in 0..n {
            if (r[i][j] - r[j][i].conj()).norm() > TOL {
                return Err(Error::NotPsd);
            }
        }
    }
    let mut l = vec![vec![Cplx::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let d = r[j][j].re - (0..j).map(|k| l[j][k].norm_sqr()).sum::<f64>();
        if d < -TOL {
            return Err(Error::NotPsd);
        }
        if d <= TOL {
            for i in j + 1..n {
                let rem = r[i][j] - (0..j).map(|k| l[i][k] * l[j][k].conj()).sum::<Cplx>();
                if rem.norm() > 1e-6 {
                    return Err(Error::NotPsd);
                }
            }
            continue;
        }
        let djj = d.sqrt();
        l[j][j] = Cplx::new(djj, 0.0);
        for i in j + 1..n {
            let rem = r[i][j] - (0..j).map(|k| l[i][k] * l[j][k].conj()).sum::<Cplx>();
            l[i][j] = rem / djj;
        }
    }
    Ok(l)
}

impl ChannelModel {
    pub fn new(cfg: &ChannelConfig) -> Result<Self> {
        if cfg.n_tx == 0 {
            return Err(Error::InvalidConfig("n_tx must be positive".into()));
        }
        if !(0.0..1.0).contains(&cfg.time_corr_rho) {
            return Err(Error::InvalidConfig(format!(
                "time_corr_rho {} outside [0, 1)",
                cfg.time_corr_rho
            )));
        }
        let r = cfg.spatial_corr.matrix(cfg.n_tx)?;
        Ok(Self { rho: cfg.time_corr_rho, factor: psd_factor(&r)?, state: None, next_index: 0 })
    }

    pub fn n_tx(&self) -> usize {
        self.factor.len()
    }

    fn correlated_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Cplx> {
        let n = self.n_tx();
        let w: Vec<Cplx> = (0..n).map(|_| complex_normal(rng, 1.0)).collect();
        (0..n).map(|i| (0..=i).map(|k| self.factor[i][k] * w[k]).sum()).collect()
    }

    /// Advances one frame. The first call draws from the steady state.
    pub fn evolve<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ChannelRealization {
        let innovation = self.correlated_draw(rng);
        let gains = match &self.state {
            None => innovation,
            Some(prev) => {
                let s = (1.0 - self.rho * self.rho).sqrt();
                prev.iter().zip(&innovation).map(|(&h, &w)| h * self.rho + w * s).collect()
            }
        };
        self.state = Some(gains.clone());
        let frame_index = self.next_index;
        self.next_index += 1;
        ChannelRealization { gains, frame_index }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(cfg: &ChannelConfig, frames: usize, seed: u64) -> Vec<Vec<Cplx>> {
        let mut model = ChannelModel::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..frames).map(|_| model.evolve(&mut rng).gains).collect()
    }

    fn corr(a: &[Cplx], b: &[Cplx]) -> Cplx {
        let n = a.len() as f64;
        let num: Cplx = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<Cplx>() / n;
        let pa: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
        let pb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
        num / (pa * pb).sqrt()
    }

    #[test]
    fn uncorrelated_frames_when_rho_zero() {
        let cfg = ChannelConfig { time_corr_rho: 0.0, ..Default::default() };
        let h = run(&cfg, 10_000, 1);
        let a: Vec<Cplx> = h[1..].iter().map(|g| g[0]).collect();
        let b: Vec<Cplx> = h[..h.len() - 1].iter().map(|g| g[0]).collect();
        assert!(corr(&a, &b).norm() < 0.02);
    }

    #[test]
    fn lag_one_correlation_matches_rho() {
        let cfg = ChannelConfig { time_corr_rho: 0.99, ..Default::default() };
        let h = run(&cfg, 10_000, 2);
        let a: Vec<Cplx> = h[1..].iter().map(|g| g[1]).collect();
        let b: Vec<Cplx> = h[..h.len() - 1].iter().map(|g| g[1]).collect();
        let r = corr(&a, &b);
        assert!((r.re - 0.99).abs() < 0.01, "{r}");
    }

    #[test]
    fn cross_antenna_correlation_matches_matrix() {
        let mut re = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            re[i][i] = 1.0;
        }
        re[0][1] = 0.8;
        re[1][0] = 0.8;
        let cfg = ChannelConfig {
            time_corr_rho: 0.0,
            spatial_corr: SpatialCorrelation::Matrix { re, im: vec![vec![0.0; 4]; 4] },
            ..Default::default()
        };
        let h = run(&cfg, 20_000, 3);
        let a: Vec<Cplx> = h.iter().map(|g| g[0]).collect();
        let b: Vec<Cplx> = h.iter().map(|g| g[1]).collect();
        let r = corr(&a, &b);
        assert!((r.re - 0.8).abs() < 0.02, "{r}");
    }

    #[test]
    fn unit_rayleigh_power() {
        // Independent frames so that 1e5 draws give a tight sample mean.
        let cfg = ChannelConfig { time_corr_rho: 0.0, ..Default::default() };
        let h = run(&cfg, 100_000, 4);
        for ant in 0..4 {
            let p: f64 = h.iter().map(|g| g[ant].norm_sqr()).sum::<f64>() / h.len() as f64;
            assert!((p - 1.0).abs() < 0.02, "antenna {ant}: {p}");
        }
    }

    #[test]
    fn steady_state_power_is_preserved() {
        let cfg = ChannelConfig { time_corr_rho: 0.95, ..Default::default() };
        let mut acc = 0.0;
        let runs = 2000;
        for seed in 0..runs {
            let h = run(&cfg, 30, seed);
            acc += h[29].iter().map(|g| g.norm_sqr()).sum::<f64>() / 4.0;
        }
        assert!((acc / runs as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn non_psd_rejected() {
        let re = vec![
            vec![1.0, 0.9, 0.9, -0.9],
            vec![0.9, 1.0, 0.9, 0.9],
            vec![0.9, 0.9, 1.0, 0.9],
            vec![-0.9, 0.9, 0.9, 1.0],
        ];
        let cfg = ChannelConfig {
            spatial_corr: SpatialCorrelation::Matrix { re, im: vec![vec![0.0; 4]; 4] },
            ..Default::default()
        };
        assert!(matches!(ChannelModel::new(&cfg), Err(Error::NotPsd)));
    }

    #[test]
    fn fully_correlated_matrix_accepted() {
        let cfg = ChannelConfig {
            spatial_corr: SpatialCorrelation::Exponential { coefficient: 1.0 },
            ..Default::default()
        };
        let h = run(&cfg, 10, 5);
        for g in &h {
            assert!((g[0] - g[3]).norm() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = ChannelConfig::default();
        assert_eq!(run(&cfg, 50, 9), run(&cfg, 50, 9));
        assert_ne!(run(&cfg, 50, 9), run(&cfg, 50, 10));
    }

    #[test]
    fn rho_out_of_range_rejected() {
        let cfg = ChannelConfig { time_corr_rho: 1.0, ..Default::default() };
        assert!(ChannelModel::new(&cfg).is_err());
    }
}
