use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Network, Scalar};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 1024,
            learning_rate: 0.001,
            beta1: 0.99,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 50,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("batch_size and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("learning_rate and epsilon must be positive".into()));
        }
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(Error::InvalidConfig("Adam betas must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// `-log softmax(logits)[label]` and its gradient `softmax - onehot`.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], label: usize) -> Result<(T, Vec<T>)> {
    if label >= logits.len() {
        return Err(Error::DimensionMismatch { expected: logits.len(), got: label + 1 });
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let log_sum = logits.iter().map(|&z| (z - max).exp()).sum::<T>().ln() + max;
    let mut grad = softmax(logits);
    grad[label] = grad[label] - T::one();
    Ok((log_sum - logits[label], grad))
}

/// Mean cross-entropy over a batch and its gradient with respect to the
/// logits (already divided by the batch size).
pub(crate) fn batch_cross_entropy<T: Scalar>(logits: &Array2<T>, labels: &[usize]) -> Result<(T, Array2<T>)> {
    let n = T::of(labels.len() as f64);
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut total = T::zero();
    for ((row, &y), mut g) in logits.outer_iter().zip(labels).zip(grad.outer_iter_mut()) {
        let (loss, gr) = softmax_cross_entropy(row.as_slice().expect("contiguous"), y)?;
        total += loss;
        for (dst, src) in g.iter_mut().zip(gr) {
            *dst = src / n;
        }
    }
    Ok((total / n, grad))
}

/// First and second moment estimates for one parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    /// Steps taken so far.
    pub t: i32,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize) -> Self {
        Self { m: vec![T::zero(); len], v: vec![T::zero(); len], t: 0 }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<T: Scalar>(params: &mut [T], grads: &[T], state: &mut AdamState<T>, cfg: &TrainConfig) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), got: grads.len() });
    }
    state.t += 1;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let c1 = T::one() - T::of(cfg.beta1.powi(state.t));
    let c2 = T::one() - T::of(cfg.beta2.powi(state.t));
    let (lr, eps) = (T::of(cfg.learning_rate), T::of(cfg.epsilon));
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss of each epoch.
    pub epoch_loss: Vec<f64>,
}

/// Mini-batch Adam on mean softmax cross-entropy with a reshuffle every
/// epoch. The shuffle stream is seeded from `cfg.seed`.
pub fn train_network<T: Scalar>(
    net: &mut Network<T>,
    x: &Array2<T>,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if x.nrows() != labels.len() || labels.is_empty() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), got: labels.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= net.n_classes) {
        return Err(Error::Dataset(format!("label {bad} outside 0..{}", net.n_classes)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut states: Vec<AdamState<T>> = net.params_mut().iter().map(|p| AdamState::new(p.len())).collect();
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select(Axis(0), idx);
            let yb: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = net.gradients(xb.view(), |logits| batch_cross_entropy(logits, &yb))?;
            let loss = loss.to_f64().unwrap_or(f64::NAN);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { loss, epoch, batch });
            }
            for ((p, g), s) in net.params_mut().into_iter().zip(&grads).zip(&mut states) {
                adam_step(p, g.as_slice().expect("contiguous"), s, cfg)?;
            }
            sum += loss;
            batches += 1;
        }
        epoch_loss.push(sum / batches as f64);
    }
    Ok(TrainReport { epoch_loss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};
    use rand::Rng;

    #[test]
    fn uniform_logits_give_log_classes() {
        let (loss, grad) = softmax_cross_entropy(&[0.3f64; 6], 2).unwrap();
        assert!((loss - 6f64.ln()).abs() < 1e-12);
        assert!((loss - 1.7918).abs() < 1e-4);
        assert!(grad.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let z: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            let label = rng.random_range(0..6);
            let (_, grad) = softmax_cross_entropy(&z, label).unwrap();
            for i in 0..6 {
                let h = 1e-5;
                let mut zp = z.clone();
                zp[i] += h;
                let mut zm = z.clone();
                zm[i] -= h;
                let numeric = (softmax_cross_entropy(&zp, label).unwrap().0
                    - softmax_cross_entropy(&zm, label).unwrap().0)
                    / (2.0 * h);
                // Rounding in the loss difference is about eps * loss / h.
                let err = (numeric - grad[i]).abs();
                assert!(err < 1e-8 + 1e-6 * grad[i].abs(), "{err} at {i}");
            }
        }
    }

    #[test]
    fn large_logits_stay_finite() {
        let (loss, _) = softmax_cross_entropy(&[1000.0f64, -1000.0, 0.0], 1).unwrap();
        assert!((loss - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let cfg = TrainConfig::default();
        let mut p = vec![0.5f64, -1.0, 2.0];
        let mut s = AdamState::new(3);
        adam_step(&mut p, &[0.0; 3], &mut s, &cfg).unwrap();
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = TrainConfig::default();
        for g in [1.0f64, 0.01, 250.0] {
            let mut p = vec![0.0f64];
            let mut s = AdamState::new(1);
            adam_step(&mut p, &[g], &mut s, &cfg).unwrap();
            // m_hat = g and v_hat = g^2 exactly at t = 1.
            let expect = -0.001 * g / (g + 1e-8);
            assert!((p[0] - expect).abs() < 1e-15, "{g}: {}", p[0]);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(TrainConfig { beta1: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        TrainConfig::default().validate().unwrap();
    }

    fn toy(seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((60, 2));
        let mut y = Vec::new();
        for i in 0..60 {
            let label = i % 2;
            let shift = if label == 0 { -1.0 } else { 1.0 };
            x[[i, 0]] = shift + rng.random_range(-0.5..0.5);
            x[[i, 1]] = rng.random_range(-1.0..1.0);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn separable_toy_is_learned() {
        let (x, y) = toy(3);
        let mut net = Network::<f64>::mlp(2, &[10, 10], 2, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let cfg = TrainConfig { batch_size: 16, epochs: 50, ..Default::default() };
        train_network(&mut net, &x, &y, &cfg).unwrap();
        let logits = net.forward(x.view()).unwrap();
        let correct = logits
            .outer_iter()
            .zip(&y)
            .filter(|(row, &l)| usize::from(row[1] > row[0]) == l)
            .count();
        assert!(correct as f64 / 60.0 >= 0.95, "{correct}/60");
    }

    #[test]
    fn training_is_bit_reproducible() {
        let (x, y) = toy(5);
        let run = || {
            let mut net = Network::<f32>::cnn(2, 4, 1, &[8], 2, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
            let xf = x.mapv(|v| v as f32);
            let cfg = TrainConfig { batch_size: 8, epochs: 5, seed: 11, ..Default::default() };
            train_network(&mut net, &xf, &y, &cfg).unwrap();
            net
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let (x, y) = toy(7);
        let mut net = Network::<f64>::mlp(2, &[4], 2, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let mut bad = x.clone();
        bad[[0, 0]] = f64::NAN;
        let cfg = TrainConfig { batch_size: 60, epochs: 1, ..Default::default() };
        assert!(matches!(train_network(&mut net, &bad, &y, &cfg), Err(Error::NonFiniteLoss { .. })));
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(z in proptest::collection::vec(-50.0f64..50.0, 1..10)) {
            let p = softmax(&z);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
