//! Small feed-forward networks: dense and 1-D convolution layers with ReLU,
//! trained with Adam on softmax cross-entropy.
//!
//! Everything is generic over the float type so that gradient checks can
//! run in `f64` while training runs in `f32`.

mod optim;

pub use optim::{adam_step, softmax, softmax_cross_entropy, train_network, AdamState, TrainConfig, TrainReport};

use std::fmt::{Debug, Display};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use num_traits::{Float, FromPrimitive};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub trait Scalar:
    Float
    + FromPrimitive
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + std::ops::AddAssign
    + std::iter::Sum
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Layer<T> {
    /// `y = x w + b` with `w` of shape `(inputs, outputs)`.
    Dense { w: Array2<T>, b: Array1<T> },
    /// Valid 1-D convolution, stride 1. Activations are stored
    /// position-major, channel-minor; `w` has shape
    /// `(kernel * in_channels, filters)`.
    Conv1d { w: Array2<T>, b: Array1<T>, kernel: usize, in_channels: usize, in_len: usize },
    Relu,
}

impl<T: Scalar> Layer<T> {
    fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        match self {
            Layer::Dense { w, b } => x.dot(w) + b,
            Layer::Conv1d { w, b, kernel, in_channels, in_len } => {
                let patches = im2col(x, *kernel, *in_channels, *in_len);
                let y = patches.dot(w) + b;
                let out_len = in_len - kernel + 1;
                let filters = w.ncols();
                y.into_shape_with_order((x.nrows(), out_len * filters)).expect("contiguous")
            }
            Layer::Relu => x.mapv(|v| if v > T::zero() || v.is_nan() { v } else { T::zero() }),
        }
    }

    /// Returns parameter gradients (`w` then `b`) and, if asked, the
    /// gradient with respect to the layer input.
    fn backward(&self, x: ArrayView2<T>, dy: Array2<T>, need_dx: bool) -> (Vec<Array1<T>>, Option<Array2<T>>) {
        let flat = |a: Array2<T>| Array1::from_iter(a.into_iter());
        match self {
            Layer::Dense { w, .. } => {
                let dw = x.t().dot(&dy);
                let db = dy.sum_axis(Axis(0));
                let dx = need_dx.then(|| dy.dot(&w.t()));
                (vec![flat(dw), db], dx)
            }
            Layer::Conv1d { w, kernel, in_channels, in_len, .. } => {
                let filters = w.ncols();
                let out_len = in_len - kernel + 1;
                let batch = x.nrows();
                let dy = dy.into_shape_with_order((batch * out_len, filters)).expect("contiguous");
                let patches = im2col(x, *kernel, *in_channels, *in_len);
                let dw = patches.t().dot(&dy);
                let db = dy.sum_axis(Axis(0));
                let dx = need_dx.then(|| {
                    let dp = dy.dot(&w.t());
                    let width = kernel * in_channels;
                    let mut dx = Array2::zeros((batch, in_len * in_channels));
                    for bi in 0..batch {
                        for p in 0..out_len {
                            let src = dp.row(bi * out_len + p);
                            let mut dst = dx.slice_mut(s![bi, p * in_channels..p * in_channels + width]);
                            dst += &src;
                        }
                    }
                    dx
                });
                (vec![flat(dw), db], dx)
            }
            Layer::Relu => {
                let dx = need_dx.then(|| {
                    let mut d = dy;
                    d.zip_mut_with(&x, |g, &v| {
                        if v <= T::zero() {
                            *g = T::zero();
                        }
                    });
                    d
                });
                (Vec::new(), dx)
            }
        }
    }

    fn params_mut(&mut self) -> Vec<&mut [T]> {
        match self {
            Layer::Dense { w, b } | Layer::Conv1d { w, b, .. } => vec![
                w.as_slice_mut().expect("standard layout"),
                b.as_slice_mut().expect("standard layout"),
            ],
            Layer::Relu => Vec::new(),
        }
    }

    fn output_dim(&self, input: usize) -> usize {
        match self {
            Layer::Dense { w, .. } => w.ncols(),
            Layer::Conv1d { w, kernel, in_len, .. } => (in_len - kernel + 1) * w.ncols(),
            Layer::Relu => input,
        }
    }
}

/// Rows of `(batch * out_len, kernel * in_channels)` sliding windows.
fn im2col<T: Scalar>(x: ArrayView2<T>, kernel: usize, in_channels: usize, in_len: usize) -> Array2<T> {
    let out_len = in_len - kernel + 1;
    let width = kernel * in_channels;
    let mut p = Array2::zeros((x.nrows() * out_len, width));
    for (bi, row) in x.outer_iter().enumerate() {
        for pos in 0..out_len {
            p.row_mut(bi * out_len + pos)
                .assign(&row.slice(s![pos * in_channels..pos * in_channels + width]));
        }
    }
    p
}

/// He-uniform weights `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero biases.
fn he_uniform<T: Scalar, R: Rng + ?Sized>(fan_in: usize, shape: (usize, usize), rng: &mut R) -> Array2<T> {
    let limit = (6.0 / fan_in as f64).sqrt();
    Array2::from_shape_simple_fn(shape, || T::of(rng.random_range(-limit..limit)))
}

/// Sequential network ending in raw logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Network<T> {
    pub input_dim: usize,
    pub n_classes: usize,
    pub layers: Vec<Layer<T>>,
}

impl<T: Scalar> Network<T> {
    /// Dense ReLU layers of the given widths, then a linear output layer.
    pub fn mlp<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], n_classes: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || n_classes == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig("network dimensions must be positive".into()));
        }
        let mut layers = Vec::new();
        let mut width = input_dim;
        for &h in hidden {
            layers.push(dense(width, h, rng));
            layers.push(Layer::Relu);
            width = h;
        }
        layers.push(dense(width, n_classes, rng));
        Ok(Self { input_dim, n_classes, layers })
    }

    /// One convolution (ReLU) over the input treated as a single-channel
    /// sequence, flattened into dense ReLU layers and a linear output.
    pub fn cnn<R: Rng + ?Sized>(
        input_len: usize,
        filters: usize,
        kernel: usize,
        hidden: &[usize],
        n_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if kernel == 0 || kernel > input_len || filters == 0 || n_classes == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig("invalid convolutional network shape".into()));
        }
        let mut layers = vec![
            Layer::Conv1d {
                w: he_uniform(kernel, (kernel, filters), rng),
                b: Array1::zeros(filters),
                kernel,
                in_channels: 1,
                in_len: input_len,
            },
            Layer::Relu,
        ];
        let mut width = (input_len - kernel + 1) * filters;
        for &h in hidden {
            layers.push(dense(width, h, rng));
            layers.push(Layer::Relu);
            width = h;
        }
        layers.push(dense(width, n_classes, rng));
        Ok(Self { input_dim: input_len, n_classes, layers })
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        if x.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.ncols() });
        }
        let mut a = x.to_owned();
        for layer in &self.layers {
            a = layer.forward(a.view());
        }
        Ok(a)
    }

    /// Forward pass keeping each layer's input, then backpropagation of
    /// `dlogits = d loss / d logits`. Gradients follow [`Self::params_mut`].
    pub fn gradients<F>(&self, x: ArrayView2<T>, loss_grad: F) -> Result<(T, Vec<Array1<T>>)>
    where
        F: FnOnce(&Array2<T>) -> Result<(T, Array2<T>)>,
    {
        if x.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.ncols() });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            let next = layer.forward(a.view());
            inputs.push(a);
            a = next;
        }
        let (loss, mut dy) = loss_grad(&a)?;
        let mut grads: Vec<Vec<Array1<T>>> = vec![Vec::new(); self.layers.len()];
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (g, dx) = layer.backward(inputs[i].view(), dy, i > 0);
            grads[i] = g;
            match dx {
                Some(d) => dy = d,
                None => break,
            }
        }
        Ok((loss, grads.into_iter().flatten().collect()))
    }

    /// Every trainable tensor as a flat slice, layer by layer, `w` before `b`.
    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense { w, b } | Layer::Conv1d { w, b, .. } => w.len() + b.len(),
                Layer::Relu => 0,
            })
            .sum()
    }

    /// Shapes of the hidden and output layers, for checking architectures.
    pub fn widths(&self) -> Vec<usize> {
        let mut dim = self.input_dim;
        let mut out = Vec::new();
        for l in &self.layers {
            dim = l.output_dim(dim);
            if !matches!(l, Layer::Relu) {
                out.push(dim);
            }
        }
        out
    }
}

fn dense<T: Scalar, R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Layer<T> {
    Layer::Dense { w: he_uniform(inputs, (inputs, outputs), rng), b: Array1::zeros(outputs) }
}
