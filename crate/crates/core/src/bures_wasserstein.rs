//! Bures–Wasserstein distance and geodesic on positive definite matrices,
//! the Gaussian 2-Wasserstein closed form, and the Hellinger distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ensure_dim, re, CMat, HermitianMatrix, SpdMatrix};

/// `tr (A^{1/2} B A^{1/2})^{1/2}`.
pub fn trace_sqrt_product(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    ensure_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt()?;
    let inner =
        HermitianMatrix::from_symmetrized(&(a_half.matrix() * b.matrix() * a_half.matrix()))?;
    Ok(inner
        .eigh()?
        .eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum())
}

/// `d(A, B) = [tr((A + B)/2) − tr(A^{1/2} B A^{1/2})^{1/2}]^{1/2}`.
pub fn bw_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    Ok(bw_distance_squared(a, b)?.sqrt())
}

/// `d(A, B)²`, evaluated as `½ ‖A^{1/2} − B^{1/2} U‖²_F` with `U` the unitary
/// that aligns the two square roots.
///
/// The trace expression cancels two numbers of size `tr A` and leaves about
/// `1e-16·tr A` of noise, i.e. `1e-8` after the square root; the aligned
/// difference cancels entrywise instead and keeps `d(A, A)` near `1e-15`.
pub fn bw_distance_squared(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    ensure_dim(a.dim(), b.dim())?;
    let s = a.sqrt()?;
    let t = b.sqrt()?;
    let m = a.dim();
    // A^{1/2} B^{1/2} = W Σ V*; U = V W* maximizes Re tr(U A^{1/2} B^{1/2}).
    let svd = (s.matrix() * t.matrix())
        .try_svd(true, true, f64::EPSILON, 1000 * m)
        .ok_or(Error::EigenNonConvergence {
            dim: m,
            norm: s.frobenius_norm() * t.frobenius_norm(),
        })?;
    let (w, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let u = v_t.adjoint() * w.adjoint();
    let diff = s.matrix() - t.matrix() * u;
    Ok(0.5 * diff.norm_squared())
}

/// Principal square root of the non-Hermitian product `AB`, computed as
/// `A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}`.
pub fn product_sqrt(a: &SpdMatrix, b: &SpdMatrix) -> Result<CMat> {
    ensure_dim(a.dim(), b.dim())?;
    let a_half = a.sqrt()?;
    let a_neg_half = a.inv_sqrt()?;
    let inner = SpdMatrix::from_symmetrized(&(a_half.matrix() * b.matrix() * a_half.matrix()))?;
    Ok(a_half.matrix() * inner.sqrt()?.matrix() * a_neg_half.matrix())
}

/// `A ◇ₜ B = (1−t)² A + t² B + t(1−t) [(AB)^{1/2} + (BA)^{1/2}]` for `t ∈ [0, 1]`.
pub fn geodesic(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "geodesic parameter t = {t} lies outside [0, 1]"
        )));
    }
    ensure_dim(a.dim(), b.dim())?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let s = 1.0 - t;
    let cross = product_sqrt(a, b)? + product_sqrt(b, a)?;
    let g = a.matrix() * re(s * s) + b.matrix() * re(t * t) + cross * re(t * s);
    SpdMatrix::from_symmetrized(&g)
}

/// Mean vector and covariance of a Gaussian measure.
#[derive(Clone, Debug)]
pub struct GaussianParams {
    mean: Vec<f64>,
    cov: SpdMatrix,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, cov: SpdMatrix) -> Result<Self> {
        ensure_dim(cov.dim(), mean.len())?;
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "mean has a non-finite entry".into(),
            ));
        }
        Ok(Self { mean, cov })
    }

    pub fn centered(cov: SpdMatrix) -> Self {
        Self {
            mean: vec![0.0; cov.dim()],
            cov,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }
}

/// `W₂(μ, ν)` for Gaussians:
/// `W₂² = |m₁ − m₂|² + tr[A + B − 2 (A^{1/2} B A^{1/2})^{1/2}]`.
pub fn gaussian_w2(mu: &GaussianParams, nu: &GaussianParams) -> Result<f64> {
    ensure_dim(mu.cov.dim(), nu.cov.dim())?;
    let shift: f64 = mu
        .mean
        .iter()
        .zip(&nu.mean)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((shift + 2.0 * bw_distance_squared(&mu.cov, &nu.cov)?).sqrt())
}

/// A probability vector: nonnegative entries summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter(
                "probability vector is empty".into(),
            ));
        }
        if let Some((i, x)) = p
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "probability {i} is {x}, expected a finite nonnegative number"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

/// `[½ Σ (√pᵢ − √qᵢ)²]^{1/2}`.
pub fn hellinger(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    ensure_dim(p.0.len(), q.0.len())?;
    let s: f64 =
        p.0.iter()
            .zip(&q.0)
            .map(|(a, b)| {
                let d = a.sqrt() - b.sqrt();
                d * d
            })
            .sum();
    Ok((0.5 * s).sqrt().min(1.0))
}
