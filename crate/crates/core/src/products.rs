//! Kronecker and Hadamard products, tensorized weights and ensembles, and
//! positive unital maps realized as isometry compressions `V* (·) V`.

use crate::barycenter::Ensemble;
use crate::error::{Error, Result};
use crate::hermitian::{
    ensure_dim, identity, random_unitary, re, seeded_rng, CMat, ComplexMatrix, HermitianMatrix,
    SpdMatrix,
};
use crate::means::WeightVector;

/// Bound on `‖V*V − I‖_F` for an isometry.
pub const ISOMETRY_TOL: f64 = 1e-12;

/// Block matrix `[aᵢⱼ B]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::new(a.matrix().kronecker(b.matrix())).expect("product of finite matrices")
}

pub fn kron_spd(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    SpdMatrix::from_symmetrized(&a.matrix().kronecker(b.matrix()))
}

/// Entrywise product `[aᵢⱼ bᵢⱼ]`.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::InvalidShape(format!(
            "Hadamard product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    ComplexMatrix::new(a.matrix().component_mul(b.matrix()))
}

pub fn hadamard_hermitian(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    ensure_dim(a.dim(), b.dim())?;
    HermitianMatrix::from_symmetrized(&a.matrix().component_mul(b.matrix()))
}

pub fn hadamard_spd(a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    ensure_dim(a.dim(), b.dim())?;
    SpdMatrix::from_symmetrized(&a.matrix().component_mul(b.matrix()))
}

/// `ω ⊗ μ = (w₁μ₁, …, w₁μₙ, …, wₙμ₁, …, wₙμₙ)`.
pub fn weight_tensor(w: &WeightVector, u: &WeightVector) -> Result<WeightVector> {
    let out = w
        .iter()
        .flat_map(|wi| u.iter().map(move |uj| wi * uj))
        .collect();
    WeightVector::new(out)
}

/// Ensemble of `Aᵢ ⊗ Bⱼ` with weights `ω ⊗ μ`, in the same lexicographic order
/// (`j` fastest).
pub fn ensemble_tensor(a: &Ensemble, b: &Ensemble) -> Result<Ensemble> {
    let weights = weight_tensor(a.weights(), b.weights())?;
    let mut mats = Vec::with_capacity(a.len() * b.len());
    for ai in a.matrices() {
        for bj in b.matrices() {
            mats.push(kron_spd(ai, bj)?);
        }
    }
    Ensemble::new(weights, mats)
}

/// Same-order pairing as [`ensemble_tensor`], with `Aᵢ ∘ Bⱼ` in place of the
/// Kronecker product.
pub fn ensemble_hadamard(a: &Ensemble, b: &Ensemble) -> Result<Ensemble> {
    let weights = weight_tensor(a.weights(), b.weights())?;
    let mut mats = Vec::with_capacity(a.len() * b.len());
    for ai in a.matrices() {
        for bj in b.matrices() {
            mats.push(hadamard_spd(ai, bj)?);
        }
    }
    Ensemble::new(weights, mats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositiveMapKind {
    IsometryCompression,
    /// Compression onto the span of `eᵢ ⊗ eᵢ`, sending `A ⊗ B` to `A ∘ B`.
    AndoDiagonal,
}

/// A unital, strictly positive map `M_s → M_k`, `Φ(A) = V* A V` with `V*V = I_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMapSpec {
    kind: PositiveMapKind,
    isometry: CMat,
}

impl PositiveMapSpec {
    pub fn isometry(v: ComplexMatrix) -> Result<Self> {
        if v.cols() > v.rows() {
            return Err(Error::InvalidShape(format!(
                "isometry must have at least as many rows as columns, got {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        let v = v.into_inner();
        let deviation = (v.adjoint() * &v - identity(v.ncols())).norm();
        if deviation > ISOMETRY_TOL {
            return Err(Error::NotIsometry { deviation });
        }
        Ok(Self {
            kind: PositiveMapKind::IsometryCompression,
            isometry: v,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            kind: PositiveMapKind::IsometryCompression,
            isometry: identity(m),
        }
    }

    pub fn kind(&self) -> PositiveMapKind {
        self.kind
    }

    pub fn isometry_matrix(&self) -> &CMat {
        &self.isometry
    }

    pub fn source_dim(&self) -> usize {
        self.isometry.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.isometry.ncols()
    }

    /// For [`PositiveMapKind::AndoDiagonal`], the base dimension `m` with `s = m²`.
    pub fn ando_dim(&self) -> Option<usize> {
        (self.kind == PositiveMapKind::AndoDiagonal).then(|| self.target_dim())
    }

    /// `‖Φ(I) − I‖_F`.
    pub fn unitality_defect(&self) -> f64 {
        (self.isometry.adjoint() * &self.isometry - identity(self.target_dim())).norm()
    }

    fn compress(&self, a: &CMat) -> CMat {
        self.isometry.adjoint() * a * &self.isometry
    }
}

/// `Φ(M) = Z* M Z` where column `i` of the `m² × m` matrix `Z` is `eᵢ ⊗ eᵢ`.
pub fn ando_map(m: usize) -> PositiveMapSpec {
    let mut z = CMat::zeros(m * m, m);
    for i in 0..m {
        z[(i * m + i, i)] = re(1.0);
    }
    PositiveMapSpec {
        kind: PositiveMapKind::AndoDiagonal,
        isometry: z,
    }
}

/// `V* A V`.
pub fn apply(phi: &PositiveMapSpec, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    ensure_dim(phi.source_dim(), a.dim())?;
    HermitianMatrix::from_symmetrized(&phi.compress(a.matrix()))
}

pub fn apply_spd(phi: &PositiveMapSpec, a: &SpdMatrix) -> Result<SpdMatrix> {
    ensure_dim(phi.source_dim(), a.dim())?;
    SpdMatrix::from_symmetrized(&phi.compress(a.matrix()))
}

/// Compression by the first `k` columns of a seeded Haar unitary of size `s`.
pub fn random_isometry_map(s: usize, k: usize, seed: u64) -> Result<PositiveMapSpec> {
    if k == 0 || k > s {
        return Err(Error::InvalidParameter(format!(
            "isometry target dimension must satisfy 1 <= k <= s, got s = {s}, k = {k}"
        )));
    }
    let u = random_unitary(s, &mut seeded_rng(seed));
    Ok(PositiveMapSpec {
        kind: PositiveMapKind::IsometryCompression,
        isometry: u.columns(0, k).into_owned(),
    })
}
