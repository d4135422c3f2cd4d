//! Linear measurement maps `X -> (<A_1, X>, ..., <A_m, X>)` and their adjoints.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};
use crate::tensor::{Dims, Tensor3};

/// Rows per partial sum in the adjoint. Partials are combined pairwise in a
/// fixed order, so the result does not depend on the thread count.
pub const ADJOINT_BLOCK: usize = 64;

/// A linear map from `n1 x n2 x n3` tensors to `R^m`.
pub trait SensingMap: Send + Sync + fmt::Debug {
    fn dims(&self) -> Dims;

    fn num_measurements(&self) -> usize;

    /// `y_i = <A_i, x>`.
    fn apply(&self, x: &Tensor3) -> Result<Vec<f64>>;

    /// `sum_i y_i A_i`.
    fn adjoint(&self, y: &[f64]) -> Result<Tensor3>;
}

/// Serialized identity of a Gaussian operator. The sensing tensors are never
/// written out; they are regenerated from these three fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub seed: u64,
    pub m: usize,
    pub dims: Dims,
}

/// Gaussian sensing operator with i.i.d. `N(0, 1/m)` entries.
///
/// Row `i` is drawn from ChaCha8 seeded with `seed` on stream `i`, so any row
/// can be regenerated independently and bit-identically. By default rows are
/// generated on the fly at every application; [`materialized`] caches all
/// `m * n1 * n2 * n3` entries instead.
///
/// [`materialized`]: MeasurementOperator::materialized
pub struct MeasurementOperator {
    spec: OperatorSpec,
    cache: Option<Vec<f64>>,
}

impl fmt::Debug for MeasurementOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasurementOperator")
            .field("spec", &self.spec)
            .field("materialized", &self.cache.is_some())
            .finish()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Pairwise sum of equal-length vectors in index order.
fn tree_sum(mut parts: Vec<Vec<f64>>) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

impl MeasurementOperator {
    pub fn new(seed: u64, m: usize, dims: Dims) -> Result<Self> {
        if m == 0 {
            return Err(TubalError::BadSpec("measurement count must be positive".into()));
        }
        if dims.is_empty() {
            return Err(TubalError::BadSpec(format!("empty tensor shape {dims}")));
        }
        Ok(MeasurementOperator {
            spec: OperatorSpec { seed, m, dims },
            cache: None,
        })
    }

    pub fn from_spec(spec: OperatorSpec) -> Result<Self> {
        Self::new(spec.seed, spec.m, spec.dims)
    }

    /// Generates and stores every sensing tensor.
    pub fn materialized(mut self) -> Self {
        if self.cache.is_none() {
            let n = self.spec.dims.len();
            let mut data = vec![0.0; self.spec.m * n];
            data.par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| self.fill_row(i, row));
            self.cache = Some(data);
        }
        self
    }

    pub fn is_materialized(&self) -> bool {
        self.cache.is_some()
    }

    pub fn spec(&self) -> OperatorSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    fn fill_row(&self, i: usize, row: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(i as u64);
        let scale = 1.0 / (self.spec.m as f64).sqrt();
        for v in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = scale * z;
        }
    }

    /// The `i`-th sensing tensor `A_i`.
    pub fn sensing_tensor(&self, i: usize) -> Tensor3 {
        let n = self.spec.dims.len();
        let data = match &self.cache {
            Some(c) => c[i * n..(i + 1) * n].to_vec(),
            None => {
                let mut row = vec![0.0; n];
                self.fill_row(i, &mut row);
                row
            }
        };
        Tensor3::from_raw(self.spec.dims, data)
    }

    fn check_dims(&self, d: Dims) -> Result<()> {
        if d != self.spec.dims {
            return Err(TubalError::dims("MeasurementOperator", self.spec.dims, d));
        }
        Ok(())
    }
}

impl SensingMap for MeasurementOperator {
    fn dims(&self) -> Dims {
        self.spec.dims
    }

    fn num_measurements(&self) -> usize {
        self.spec.m
    }

    fn apply(&self, x: &Tensor3) -> Result<Vec<f64>> {
        self.check_dims(x.dims())?;
        let n = self.spec.dims.len();
        let xs = x.as_slice();
        let out = match &self.cache {
            Some(c) => c.par_chunks(n).map(|row| dot(row, xs)).collect(),
            None => (0..self.spec.m)
                .into_par_iter()
                .map_init(
                    || vec![0.0; n],
                    |row, i| {
                        self.fill_row(i, row);
                        dot(row, xs)
                    },
                )
                .collect(),
        };
        Ok(out)
    }

    fn adjoint(&self, y: &[f64]) -> Result<Tensor3> {
        if y.len() != self.spec.m {
            return Err(TubalError::InvalidData(format!(
                "adjoint expects {} measurements, got {}",
                self.spec.m,
                y.len()
            )));
        }
        let n = self.spec.dims.len();
        let partials: Vec<Vec<f64>> = y
            .par_chunks(ADJOINT_BLOCK)
            .enumerate()
            .map(|(b, ys)| {
                let mut acc = vec![0.0; n];
                let mut row = match self.cache {
                    Some(_) => Vec::new(),
                    None => vec![0.0; n],
                };
                for (off, &yi) in ys.iter().enumerate() {
                    let i = b * ADJOINT_BLOCK + off;
                    let a: &[f64] = match &self.cache {
                        Some(c) => &c[i * n..(i + 1) * n],
                        None => {
                            self.fill_row(i, &mut row);
                            &row
                        }
                    };
                    acc.iter_mut().zip(a).for_each(|(s, v)| *s += yi * v);
                }
                acc
            })
            .collect();
        Ok(Tensor3::from_raw(self.spec.dims, tree_sum(partials)))
    }
}

/// Sensing with unit basis tensors: `m = n1 n2 n3` and `y` is the tensor's
/// entries in storage order. Useful as an exactly isometric reference map.
#[derive(Clone, Copy, Debug)]
pub struct IdentitySensing {
    dims: Dims,
}

impl IdentitySensing {
    pub fn new(dims: Dims) -> Self {
        IdentitySensing { dims }
    }
}

impl SensingMap for IdentitySensing {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn num_measurements(&self) -> usize {
        self.dims.len()
    }

    fn apply(&self, x: &Tensor3) -> Result<Vec<f64>> {
        if x.dims() != self.dims {
            return Err(TubalError::dims("IdentitySensing", self.dims, x.dims()));
        }
        Ok(x.as_slice().to_vec())
    }

    fn adjoint(&self, y: &[f64]) -> Result<Tensor3> {
        if y.len() != self.dims.len() {
            return Err(TubalError::InvalidData("adjoint length mismatch".into()));
        }
        Ok(Tensor3::from_raw(self.dims, y.to_vec()))
    }
}
