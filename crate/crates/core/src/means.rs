//! Two-variable geometric mean, weighted arithmetic mean and the Kantorovich
//! constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ensure_dim, re, CMat, SpdMatrix};

/// Largest tolerated deviation of a weight sum from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A strictly positive probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("weight vector is empty".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {w}, expected a finite positive number"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("weight vector is empty".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Normalizes positive raw weights onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|w| w / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// `A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
pub fn geometric_mean(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    ensure_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt()?;
    let a_neg_half = a.inv_sqrt()?;
    let inner =
        SpdMatrix::from_symmetrized(&(a_neg_half.matrix() * b.matrix() * a_neg_half.matrix()))?;
    let inner_half = inner.sqrt()?;
    SpdMatrix::from_symmetrized(&(a_half.matrix() * inner_half.matrix() * a_half.matrix()))
}

/// Σ wⱼ Mⱼ over raw matrices, summed in index order.
pub(crate) fn weighted_sum<'a>(
    weights: impl IntoIterator<Item = f64>,
    mats: impl IntoIterator<Item = &'a CMat>,
) -> Option<CMat> {
    let mut acc: Option<CMat> = None;
    for (w, m) in weights.into_iter().zip(mats) {
        let term = m * re(w);
        acc = Some(match acc {
            None => term,
            Some(s) => s + term,
        });
    }
    acc
}

/// `Σ wⱼ Aⱼ`.
pub fn arithmetic_mean(weights: &WeightVector, mats: &[SpdMatrix]) -> Result<SpdMatrix> {
    if weights.len() != mats.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} matrices",
            weights.len(),
            mats.len()
        )));
    }
    let m = mats[0].dim();
    for a in mats {
        ensure_dim(m, a.dim())?;
    }
    let sum = weighted_sum(weights.iter(), mats.iter().map(SpdMatrix::matrix))
        .expect("weight vectors are non-empty");
    SpdMatrix::from_symmetrized(&sum)
}

/// The Kantorovich constant `(p + q)² / (4pq)` for `0 < p ≤ q`.
pub fn kantorovich(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p <= q && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Kantorovich constant needs 0 < p <= q, got p = {p}, q = {q}"
        )));
    }
    let r = q / p;
    Ok((r + 1.0) * (r + 1.0) / (4.0 * r))
}
