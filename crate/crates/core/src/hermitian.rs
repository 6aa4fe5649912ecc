//! Dense complex matrices, Hermitian and positive definite wrappers, spectral
//! matrix functions and tolerance-aware Loewner comparison.
//!
//! Every matrix function goes through a full Hermitian eigendecomposition.
//! Composite results are re-symmetrized as `(M + M*) / 2` before they are
//! wrapped again, so round-off never accumulates into a visible asymmetry.

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Absolute tolerance for the Hermitian symmetry check on external input.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-12;
/// Relative floor below which a spectrum is not considered positive definite.
pub const SPD_REL_FLOOR: f64 = 1e-12;
/// Condition number beyond which a congruence factor is treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// `(M + M*) / 2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

pub(crate) fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

fn check_finite(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn check_square(m: &CMat) -> Result<usize> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidShape(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidShape("matrix has no entries".into()));
        }
        check_finite(&m)?;
        Ok(Self(m))
    }

    /// Builds a matrix from real row slices.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(CMat::from_fn(r, c, |i, j| re(rows[i][j])))
    }

    pub fn identity(m: usize) -> Self {
        Self(identity(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// A complex Hermitian matrix, stored exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates symmetry to [`HERMITIAN_INPUT_TOL`] and then symmetrizes.
    pub fn new(m: CMat) -> Result<Self> {
        let n = check_square(&m)?;
        check_finite(&m)?;
        for i in 0..n {
            for j in i..n {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > HERMITIAN_INPUT_TOL {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Wraps the Hermitian part of `m` without checking how far `m` was from it.
    /// Intended for results of composite matrix functions.
    pub fn from_symmetrized(m: &CMat) -> Result<Self> {
        check_square(m)?;
        check_finite(m)?;
        Ok(Self(symmetrize(m)))
    }

    pub fn from_complex(m: &ComplexMatrix) -> Result<Self> {
        Self::new(m.0.clone())
    }

    pub fn from_real_diagonal(d: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| re(x)));
        Self::new(CMat::from_diagonal(&v))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?.0)
    }

    pub fn identity(m: usize) -> Self {
        Self(identity(m))
    }

    pub fn scaled_identity(m: usize, c: f64) -> Self {
        Self(identity(m) * re(c))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.clone())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        eigh(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.min())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(Self(symmetrize(&(&self.0 + &other.0))))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(Self(symmetrize(&(&self.0 - &other.0))))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * re(c))
    }
}

/// `A = U diag(λ) U*` with `λ` ascending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    unitary: CMat,
    eigenvalues: DVector<f64>,
}

impl EigenDecomposition {
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U diag(f(λ)) U*`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let u = &self.unitary;
        let mut scaled = u.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = re(f(l));
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        symmetrize(&(scaled * u.adjoint()))
    }

    /// Same eigenbasis, spectrum mapped through a monotone `f`; order is restored
    /// when `f` is decreasing.
    fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut order: Vec<usize> = (0..mapped.len()).collect();
        order.sort_by(|&a, &b| mapped[a].total_cmp(&mapped[b]));
        let m = self.dim();
        let unitary = CMat::from_fn(m, m, |i, j| self.unitary[(i, order[j])]);
        let eigenvalues = DVector::from_iterator(m, order.iter().map(|&k| mapped[k]));
        Self {
            unitary,
            eigenvalues,
        }
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let m = a.dim();
    let eig = nalgebra::SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, 1000 * m.max(1)).ok_or(
        Error::EigenNonConvergence {
            dim: m,
            norm: a.frobenius_norm(),
        },
    )?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let unitary = CMat::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);
    let eigenvalues = DVector::from_iterator(m, order.iter().map(|&k| eig.eigenvalues[k]));
    Ok(EigenDecomposition {
        unitary,
        eigenvalues,
    })
}

/// A Hermitian positive definite matrix together with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    herm: HermitianMatrix,
    eig: EigenDecomposition,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.herm == other.herm
    }
}

fn spd_floor(norm: f64) -> f64 {
    SPD_REL_FLOOR * norm.max(1.0)
}

impl SpdMatrix {
    /// Rejects matrices whose smallest eigenvalue is at or below
    /// `1e-12 · max(1, ‖A‖_F)`.
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let eig = eigh(&herm)?;
        let floor = spd_floor(herm.frobenius_norm());
        if !(eig.min() > floor) {
            return Err(Error::NotPositiveDefinite {
                min_eig: eig.min(),
                floor,
            });
        }
        Ok(Self { herm, eig })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Symmetrizes an internally computed matrix and validates positivity.
    pub fn from_symmetrized(m: &CMat) -> Result<Self> {
        Self::new(HermitianMatrix::from_symmetrized(m)?)
    }

    pub fn from_real_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(d)?)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows)?)
    }

    pub fn identity(m: usize) -> Self {
        Self::scaled_identity(m, 1.0)
    }

    /// `c·I` for `c > 0`.
    pub fn scaled_identity(m: usize, c: f64) -> Self {
        assert!(c > 0.0, "scaled identity needs a positive factor");
        Self {
            herm: HermitianMatrix::scaled_identity(m, c),
            eig: EigenDecomposition {
                unitary: identity(m),
                eigenvalues: DVector::from_element(m, c),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.herm.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.herm
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.herm
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn min_eig(&self) -> f64 {
        self.eig.min()
    }

    pub fn max_eig(&self) -> f64 {
        self.eig.max()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.herm.frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    /// `U diag(λᵗ) U*`.
    pub fn power(&self, t: f64) -> Result<Self> {
        if t == 1.0 {
            return Ok(self.clone());
        }
        let herm = HermitianMatrix(self.eig.map(|l| l.powf(t)));
        let eig = self.eig.map_spectrum(|l| l.powf(t));
        let floor = spd_floor(herm.frobenius_norm());
        if !(eig.min() > floor) {
            return Err(Error::NotPositiveDefinite {
                min_eig: eig.min(),
                floor,
            });
        }
        Ok(Self { herm, eig })
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.power(0.5)
    }

    pub fn inv_sqrt(&self) -> Result<Self> {
        self.power(-0.5)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.power(-1.0)
    }

    /// Sum of log-eigenvalues.
    pub fn log_det(&self) -> f64 {
        self.eig.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// `c·A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Ok(Self {
            herm: self.herm.scale(c),
            eig: self.eig.map_spectrum(|l| c * l),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(self.herm.add(&other.herm)?)
    }
}

/// Tolerances shared by the Loewner comparison and residual checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub loewner_tol: f64,
    pub residual_tol: f64,
    pub relative: bool,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            loewner_tol: 1e-9,
            residual_tol: 1e-10,
            relative: true,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.loewner_tol > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive (loewner_tol = {}, residual_tol = {})",
                self.loewner_tol, self.residual_tol
            )));
        }
        Ok(())
    }

    pub fn with_loewner_tol(mut self, tol: f64) -> Self {
        self.loewner_tol = tol;
        self
    }

    /// Scale factor applied to `loewner_tol` for a comparison of `a` and `b`.
    pub fn scale_for(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        if self.relative {
            1f64.max(a.frobenius_norm()).max(b.frobenius_norm())
        } else {
            1.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerComparison {
    pub holds: bool,
    /// `λ_min(B − A)`.
    pub margin: f64,
    /// Absolute slack allowed below zero, `loewner_tol · scale`.
    pub threshold: f64,
}

/// Tests `A ≤ B` in the Loewner order.
pub fn loewner_leq(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cfg: &ToleranceConfig,
) -> Result<LoewnerComparison> {
    ensure_dim(a.dim(), b.dim())?;
    let margin = b.sub(a)?.min_eigenvalue()?;
    let threshold = cfg.loewner_tol * cfg.scale_for(a, b);
    Ok(LoewnerComparison {
        holds: margin >= -threshold,
        margin,
        threshold,
    })
}

pub fn matrix_power(a: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    a.power(t)
}

pub fn sqrtm(a: &SpdMatrix) -> Result<SpdMatrix> {
    a.power(0.5)
}

pub fn log_det(a: &SpdMatrix) -> f64 {
    a.log_det()
}

/// `X A X*` for a nonsingular square `X`.
pub fn congruence(x: &ComplexMatrix, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    if x.rows() != x.cols() {
        return Err(Error::InvalidShape(format!(
            "congruence factor must be square, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    ensure_dim(a.dim(), x.cols())?;
    let sv = x.0.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    HermitianMatrix::from_symmetrized(&(&x.0 * &a.0 * x.0.adjoint()))
}

/// Frobenius norm of `AB − BA`.
pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).norm()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Ginibre matrix with `E|z|² = 1`.
pub fn random_ginibre<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        Complex::new(s * x, s * y)
    })
}

/// Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> CMat {
    let z = random_ginibre(m, m, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            re(1.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

pub fn random_hermitian<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix(symmetrize(&random_ginibre(m, m, rng)))
}

/// Spectrum uniform in `[eig_lo, eig_hi]`, conjugated by a Haar unitary.
pub fn random_spd_with<R: rand::Rng + ?Sized>(
    m: usize,
    eig_lo: f64,
    eig_hi: f64,
    rng: &mut R,
) -> Result<SpdMatrix> {
    let u = random_unitary(m, rng);
    random_spd_in_basis(&u, eig_lo, eig_hi, rng)
}

/// Spectrum uniform in `[eig_lo, eig_hi]`, diagonalized by the given unitary.
/// Matrices sharing `u` commute.
pub fn random_spd_in_basis<R: rand::Rng + ?Sized>(
    u: &CMat,
    eig_lo: f64,
    eig_hi: f64,
    rng: &mut R,
) -> Result<SpdMatrix> {
    if !(eig_lo > 0.0 && eig_lo <= eig_hi && eig_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue range must satisfy 0 < lo <= hi, got [{eig_lo}, {eig_hi}]"
        )));
    }
    let m = u.nrows();
    let spectrum: Vec<f64> = if eig_lo == eig_hi {
        vec![eig_lo; m]
    } else {
        let dist = Uniform::new_inclusive(eig_lo, eig_hi)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        (0..m).map(|_| dist.sample(rng)).collect()
    };
    let d = CMat::from_diagonal(&DVector::from_iterator(m, spectrum.iter().map(|&x| re(x))));
    SpdMatrix::from_symmetrized(&(u * d * u.adjoint()))
}

/// Deterministic random positive definite matrix for a seed.
pub fn random_spd(m: usize, seed: u64, eig_lo: f64, eig_hi: f64) -> Result<SpdMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    random_spd_with(m, eig_lo, eig_hi, &mut seeded_rng(seed))
}
