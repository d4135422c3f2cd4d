//! Seeded synthetic ground truths with prescribed multi-rank and condition
//! number, and the problems built on them.
//!
//! Singular values are spaced log-uniformly from 1 down to `1 / kappa` and
//! dealt round-robin over the independent frequency slices, largest first, so
//! the spectrum of the block-diagonal DFT matrix has `sigma_max = 1` and
//! `sigma_max / sigma_min = kappa` exactly. Mirrored slices repeat the values
//! of their partners.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};
use crate::factors::FactorPair;
use crate::objectives::{LossKind, LossModel, MeasurementOperator, SensingMap};
use crate::tensor::freq::{independent_slices, is_self_conjugate, C64};
use crate::tensor::{CMatrix, Dims, FreqTensor, Tensor3};

/// Operators whose dense storage stays below this many bytes are cached in
/// memory; larger ones regenerate their rows on every application.
pub const MATERIALIZE_LIMIT_BYTES: usize = 768 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthSpec {
    pub dims: Dims,
    /// Rank of every frequency slice, `n3` entries.
    pub multi_rank: Vec<usize>,
    pub kappa: f64,
    pub seed: u64,
}

impl GroundTruthSpec {
    /// Equal rank `r` on every slice.
    pub fn uniform(n1: usize, n2: usize, n3: usize, r: usize, kappa: f64, seed: u64) -> Self {
        GroundTruthSpec {
            dims: Dims::new(n1, n2, n3),
            multi_rank: vec![r; n3],
            kappa,
            seed,
        }
    }

    pub fn tubal_rank(&self) -> usize {
        self.multi_rank.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let Dims { n1, n2, n3 } = self.dims;
        let bad = |m: String| Err(TubalError::BadSpec(m));
        if self.dims.is_empty() {
            return bad(format!("empty shape {}", self.dims));
        }
        if self.multi_rank.len() != n3 {
            return bad(format!(
                "multi-rank has {} entries, expected n3 = {n3}",
                self.multi_rank.len()
            ));
        }
        let max = n1.min(n2);
        if let Some(&r) = self.multi_rank.iter().find(|&&r| r == 0 || r > max) {
            return bad(format!("slice rank {r} outside 1..={max}"));
        }
        for k in 1..n3 {
            if self.multi_rank[k] != self.multi_rank[n3 - k] {
                return bad(format!(
                    "slices {k} and {} are conjugate pairs but have ranks {} and {}",
                    n3 - k,
                    self.multi_rank[k],
                    self.multi_rank[n3 - k]
                ));
            }
        }
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return bad(format!("condition number must be finite and >= 1, got {}", self.kappa));
        }
        if self.kappa > 1.0 && self.independent_values() < 2 {
            return bad("a single singular value cannot realize kappa > 1".into());
        }
        Ok(())
    }

    fn independent_values(&self) -> usize {
        independent_slices(self.dims.n3).map(|k| self.multi_rank[k]).sum()
    }
}

/// Ground truth `X* = L* * R*^T` with balanced factors.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub x_star: Tensor3,
    pub l_star: Tensor3,
    pub r_star: Tensor3,
}

impl GroundTruth {
    pub fn factors(&self) -> FactorPair {
        FactorPair::new(self.l_star.clone(), self.r_star.clone()).expect("consistent ground-truth factors")
    }
}

/// Log-uniform values from 1 down to `1 / kappa`, non-increasing.
fn spectrum(count: usize, kappa: f64) -> Vec<f64> {
    if count == 1 {
        return vec![1.0];
    }
    (0..count)
        .map(|j| kappa.powf(-(j as f64) / (count - 1) as f64))
        .collect()
}

fn gaussian_orthonormal(rng: &mut ChaCha8Rng, n: usize, r: usize, real: bool) -> CMatrix {
    let mut draw = || -> f64 { StandardNormal.sample(&mut *rng) };
    if real {
        let g = DMatrix::<f64>::from_fn(n, r, |_, _| draw());
        g.qr().q().map(|v| C64::new(v, 0.0))
    } else {
        let g = CMatrix::from_fn(n, r, |_, _| C64::new(draw(), draw()));
        g.qr().q()
    }
}

pub fn gen_ground_truth(spec: &GroundTruthSpec) -> Result<GroundTruth> {
    spec.validate()?;
    let Dims { n1, n2, n3 } = spec.dims;
    let r_star = spec.tubal_rank();
    let half: Vec<usize> = independent_slices(n3).collect();

    let values = spectrum(spec.independent_values(), spec.kappa);
    let mut per_slice: Vec<Vec<f64>> = half.iter().map(|_| Vec::new()).collect();
    let mut next = values.into_iter();
    'deal: loop {
        let mut dealt = false;
        for (h, &k) in half.iter().enumerate() {
            if per_slice[h].len() < spec.multi_rank[k] {
                match next.next() {
                    Some(v) => {
                        per_slice[h].push(v);
                        dealt = true;
                    }
                    None => break 'deal,
                }
            }
        }
        if !dealt {
            break;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut xs = Vec::with_capacity(half.len());
    let mut ls = Vec::with_capacity(half.len());
    let mut rs = Vec::with_capacity(half.len());
    for (h, &k) in half.iter().enumerate() {
        let rk = spec.multi_rank[k];
        let real = is_self_conjugate(k, n3);
        let u = gaussian_orthonormal(&mut rng, n1, rk, real);
        let v = gaussian_orthonormal(&mut rng, n2, rk, real);
        let sigma = &per_slice[h];
        let mut l = CMatrix::zeros(n1, r_star);
        let mut r = CMatrix::zeros(n2, r_star);
        for j in 0..rk {
            let root = C64::new(sigma[j].sqrt(), 0.0);
            l.set_column(j, &(u.column(j) * root));
            r.set_column(j, &(v.column(j) * root));
        }
        xs.push(l.clone() * r.adjoint());
        ls.push(l);
        rs.push(r);
    }
    let spatial = |half: Vec<CMatrix>| FreqTensor::from_half(half, n3)?.to_spatial();
    Ok(GroundTruth {
        x_star: spatial(xs)?,
        l_star: spatial(ls)?,
        r_star: spatial(rs)?,
    })
}

/// A loss model together with the ground truth it was built from.
#[derive(Clone, Debug)]
pub struct Problem {
    pub model: LossModel,
    pub truth: GroundTruth,
    pub operator: Option<Arc<MeasurementOperator>>,
}

/// Builds the loss for `spec`. Recovery problems sense the ground truth with a
/// Gaussian operator of `m` measurements seeded by `op_seed`.
pub fn gen_problem(spec: &GroundTruthSpec, kind: LossKind, m: usize, op_seed: u64) -> Result<Problem> {
    let truth = gen_ground_truth(spec)?;
    match kind {
        LossKind::Factorization => Ok(Problem {
            model: LossModel::factorization(truth.x_star.clone()),
            truth,
            operator: None,
        }),
        LossKind::Recovery => {
            if m == 0 {
                return Err(TubalError::BadSpec("recovery needs at least one measurement".into()));
            }
            let mut op = MeasurementOperator::new(op_seed, m, spec.dims)?;
            if m.saturating_mul(spec.dims.len()).saturating_mul(8) <= MATERIALIZE_LIMIT_BYTES {
                op = op.materialized();
            }
            let op = Arc::new(op);
            let dyn_op: Arc<dyn SensingMap> = op.clone();
            Ok(Problem {
                model: LossModel::recovery(dyn_op, truth.x_star.clone())?,
                truth,
                operator: Some(op),
            })
        }
    }
}
