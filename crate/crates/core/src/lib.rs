//! Baseband simulator for transmit antenna selection on a 4x1 link.
//!
//! The crate is split along the signal path:
//!
//! - [`sigchain`]: BPSK mapping, root-raised-cosine shaping, framing and
//!   Alamouti transmission over a selected antenna pair.
//! - [`impairments`]: seeded channel and front-end distortions (fading,
//!   noise, CFO, timing, IQ imbalance, phase noise, PA, quantization and
//!   delayed CSI feedback).
//! - [`rx`]: the classical receiver and the Euclidean subset selector.
//! - [`learners`]: decision tree, random forest, MLP and 1-D CNN selectors.
//! - [`harness`]: dataset generation, case evaluation, the benchmark grid
//!   and reporting.

pub mod error;
pub mod harness;
pub mod impairments;
pub mod learners;
pub mod rx;
pub mod sigchain;

pub use error::{Error, Result};

/// Complex baseband sample.
pub type Cplx = num_complex::Complex64;
