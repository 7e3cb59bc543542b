//! Labelled feature matrices and their binary file format.
//!
//! File layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "ANTSELDS"
//! version    u32      currently 1
//! features   u32      F
//! rows       u64      N
//! classes    u32
//! data       N*F f64  row-major
//! labels     N u32
//! meta_len   u32
//! meta       meta_len bytes of JSON
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"ANTSELDS";
const VERSION: u32 = 1;

/// How a dataset was produced, stored alongside it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    /// Free-form description of the generating configuration (JSON).
    pub source: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n_features: usize,
    n_classes: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// `features` is row-major with `n_features` columns.
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
        meta: DatasetMeta,
    ) -> Result<Self> {
        if labels.is_empty() || n_features == 0 {
            return Err(Error::Dataset("dataset needs at least one row and one feature".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::Dataset(format!(
                "{} values do not fill {} rows of {n_features}",
                features.len(),
                labels.len()
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dataset("non-finite feature".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Dataset(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(Self { n_features, n_classes, features, labels, meta })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Rows `indices` in the given order, keeping the metadata.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, labels, self.n_features, self.n_classes, self.meta.clone())
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.n_classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n_features as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.n_classes as u32).to_le_bytes())?;
        for x in &self.features {
            w.write_all(&x.to_le_bytes())?;
        }
        for &l in &self.labels {
            w.write_all(&(l as u32).to_le_bytes())?;
        }
        let meta = serde_json::to_vec(&self.meta)?;
        w.write_all(&(meta.len() as u32).to_le_bytes())?;
        w.write_all(&meta)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Dataset("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Dataset(format!("unsupported version {version}")));
        }
        let n_features = read_u32(&mut r)? as usize;
        let rows = read_u64(&mut r)? as usize;
        let n_classes = read_u32(&mut r)? as usize;
        let mut features = Vec::with_capacity(rows * n_features);
        let mut buf = [0u8; 8];
        for _ in 0..rows * n_features {
            r.read_exact(&mut buf)?;
            features.push(f64::from_le_bytes(buf));
        }
        let labels = (0..rows).map(|_| read_u32(&mut r).map(|l| l as usize)).collect::<Result<_>>()?;
        let meta_len = read_u32(&mut r)? as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        Self::new(features, labels, n_features, n_classes, serde_json::from_slice(&meta)?)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            vec![0.5, -1.25, f64::MIN_POSITIVE, 3.0e100, 0.1, 0.2],
            vec![0, 5, 2],
            2,
            6,
            DatasetMeta { seed: 7, source: serde_json::json!({"snr_db": 10}) },
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let ds = toy();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"ANTSELDS");
        assert_eq!(Dataset::read_from(&buf[..]).unwrap(), ds);
    }

    #[test]
    fn corrupt_input_rejected() {
        let mut buf = Vec::new();
        toy().write_to(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Dataset::read_from(&bad[..]).is_err());
        assert!(Dataset::read_from(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn invalid_contents_rejected() {
        let meta = DatasetMeta::default();
        assert!(Dataset::new(vec![], vec![], 2, 6, meta.clone()).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], vec![0], 2, 6, meta.clone()).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![6], 2, 6, meta.clone()).is_err());
        assert!(Dataset::new(vec![1.0], vec![0], 2, 6, meta).is_err());
    }

    #[test]
    fn subset_and_histogram() {
        let ds = toy();
        let s = ds.subset(&[2, 0]).unwrap();
        assert_eq!(s.row(0), ds.row(2));
        assert_eq!(s.labels(), &[2, 0]);
        assert_eq!(ds.class_histogram(), vec![1, 0, 1, 0, 0, 1]);
    }
}
