use crate::error::{Result, TubalError};
use crate::tensor::{from_freq, to_freq, Dims, FreqTensor, Tensor3};

/// Factor tensors `(L, R)` of a candidate `X = L * R^T`, with their frequency
/// images cached.
#[derive(Clone, Debug)]
pub struct FactorPair {
    l: Tensor3,
    r: Tensor3,
    l_freq: FreqTensor,
    r_freq: FreqTensor,
}

fn check(l: Dims, r: Dims) -> Result<()> {
    if l.n2 != r.n2 || l.n3 != r.n3 {
        return Err(TubalError::dims("FactorPair", l, r));
    }
    Ok(())
}

impl FactorPair {
    pub fn new(l: Tensor3, r: Tensor3) -> Result<Self> {
        check(l.dims(), r.dims())?;
        let l_freq = to_freq(&l);
        let r_freq = to_freq(&r);
        Ok(FactorPair { l, r, l_freq, r_freq })
    }

    pub fn from_freq(l_freq: FreqTensor, r_freq: FreqTensor) -> Result<Self> {
        check(l_freq.dims(), r_freq.dims())?;
        Ok(FactorPair {
            l: from_freq(&l_freq)?,
            r: from_freq(&r_freq)?,
            l_freq,
            r_freq,
        })
    }

    pub fn l(&self) -> &Tensor3 {
        &self.l
    }

    pub fn r(&self) -> &Tensor3 {
        &self.r
    }

    pub fn l_freq(&self) -> &FreqTensor {
        &self.l_freq
    }

    pub fn r_freq(&self) -> &FreqTensor {
        &self.r_freq
    }

    pub fn into_parts(self) -> (Tensor3, Tensor3) {
        (self.l, self.r)
    }

    /// Factor rank (number of lateral slices).
    pub fn rank(&self) -> usize {
        self.l.n2()
    }

    /// Shape of the product `L * R^T`.
    pub fn product_dims(&self) -> Dims {
        Dims::new(self.l.n1(), self.r.n1(), self.l.n3())
    }

    pub fn product_freq(&self) -> FreqTensor {
        self.l_freq
            .tprod_adjoint_right(&self.r_freq)
            .expect("factor shapes checked at construction")
    }

    pub fn product(&self) -> Result<Tensor3> {
        from_freq(&self.product_freq())
    }

    pub fn gram_l_freq(&self) -> FreqTensor {
        self.l_freq.tprod_adjoint_left(&self.l_freq).expect("square gram")
    }

    pub fn gram_r_freq(&self) -> FreqTensor {
        self.r_freq.tprod_adjoint_left(&self.r_freq).expect("square gram")
    }

    /// `||L^T * L - R^T * R||_F`.
    pub fn balance_gap(&self) -> f64 {
        let diff = self.gram_l_freq().sub(&self.gram_r_freq()).expect("equal gram shapes");
        diff.fro_norm() / (self.l.n3() as f64).sqrt()
    }

    /// `sqrt(||L||_F^2 + ||R||_F^2)`.
    pub fn factor_norm(&self) -> f64 {
        (self.l.fro_norm_sq() + self.r.fro_norm_sq()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.l.is_finite() && self.r.is_finite()
    }
}
