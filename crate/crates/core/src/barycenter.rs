//! The Wasserstein mean of a weighted ensemble of positive definite matrices.
//!
//! The mean is the unique positive definite solution `X` of
//! `I = Σ wⱼ (Aⱼ # X⁻¹)`, equivalently `X = Σ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}`.
//! The default solver iterates
//!
//! ```text
//! X ← X^{-1/2} [Σ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}]² X^{-1/2}
//! ```
//!
//! from the arithmetic mean, and stops on the residual of the geometric-mean form.

use crate::bures_wasserstein::bw_distance_squared;
use crate::error::{Error, Result};
use crate::hermitian::{
    commutator_norm, ensure_dim, identity, loewner_leq, CMat, HermitianMatrix, SpdMatrix,
    ToleranceConfig,
};
use crate::means::{arithmetic_mean, geometric_mean, weighted_sum, WeightVector};
use crate::report::{CheckReport, Criterion, Provenance};

/// Relative commutator bound below which two matrices are treated as commuting.
pub const COMMUTING_TOL: f64 = 1e-8;
/// Log-det gap at or below which the determinantal inequality is flagged as an equality.
pub const DET_EQUALITY_TOL: f64 = 1e-9;
/// Relative Frobenius distance within which ensemble members count as identical.
pub const COINCIDENCE_TOL: f64 = 1e-8;

/// Weights paired with equally sized positive definite matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    weights: WeightVector,
    matrices: Vec<SpdMatrix>,
}

impl Ensemble {
    pub fn new(weights: WeightVector, matrices: Vec<SpdMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("ensemble has no matrices".into()));
        }
        if weights.len() != matrices.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} matrices",
                weights.len(),
                matrices.len()
            )));
        }
        let m = matrices[0].dim();
        for (j, a) in matrices.iter().enumerate() {
            ensure_dim(m, a.dim()).map_err(|e| e.in_field(format!("matrices[{j}]")))?;
        }
        Ok(Self { weights, matrices })
    }

    pub fn singleton(a: SpdMatrix) -> Self {
        Self {
            weights: WeightVector::new(vec![1.0]).expect("unit weight"),
            matrices: vec![a],
        }
    }

    pub fn uniform(matrices: Vec<SpdMatrix>) -> Result<Self> {
        Self::new(WeightVector::uniform(matrices.len())?, matrices)
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SpdMatrix)> {
        self.weights.iter().zip(self.matrices.iter())
    }

    /// Same weights, each matrix replaced by `f(Aⱼ)`.
    pub fn map_matrices(&self, f: impl Fn(&SpdMatrix) -> Result<SpdMatrix>) -> Result<Self> {
        let matrices = self.matrices.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.weights.clone(), matrices)
    }

    /// `(A₁⁻¹, …, Aₙ⁻¹)`.
    pub fn inverted(&self) -> Result<Self> {
        self.map_matrices(SpdMatrix::inverse)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map_matrices(|a| a.scale(c))
    }

    /// Reorders `(wⱼ, Aⱼ)` pairs: entry `k` of the result is entry `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let weights = perm.iter().map(|&k| self.weights.as_slice()[k]).collect();
        let matrices = perm.iter().map(|&k| self.matrices[k].clone()).collect();
        Self::new(WeightVector::new(weights)?, matrices)
    }

    pub(crate) fn provenance(&self, tolerances: ToleranceConfig) -> Provenance {
        Provenance::direct(tolerances)
            .with_dims(vec![self.dim()])
            .with_weights(vec![self.weights.as_slice().to_vec()])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverInit {
    ArithmeticMean,
    Explicit(SpdMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationRule {
    /// `X ← X^{-1/2} S(X)² X^{-1/2}`.
    Damped,
    /// `X ← S(X)`, kept for experimentation.
    Naive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub init: SolverInit,
    pub rule: IterationRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            residual_tol: 1e-11,
            init: SolverInit::ArithmeticMean,
            rule: IterationRule::Damped,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub mean: SpdMatrix,
    pub iterations: usize,
    /// `‖I − Σ wⱼ (Aⱼ # X⁻¹)‖_F` at `mean`.
    pub residual: f64,
    pub objective: f64,
    pub converged: bool,
}

/// `S(X) = Σ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}`, summed in ensemble order.
fn sqrt_congruence_sum(x_half: &SpdMatrix, e: &Ensemble) -> Result<CMat> {
    let mut terms = Vec::with_capacity(e.len());
    for (_, a) in e.iter() {
        let inner = SpdMatrix::from_symmetrized(&(x_half.matrix() * a.matrix() * x_half.matrix()))?;
        terms.push(inner.sqrt()?.matrix().clone());
    }
    Ok(weighted_sum(e.weights.iter(), terms.iter()).expect("ensembles are non-empty"))
}

fn loss_of_positivity(iteration: usize, err: Error) -> Error {
    match err {
        Error::NotPositiveDefinite { min_eig, .. } => Error::NumericalBreakdown(format!(
            "iterate {iteration} lost positive definiteness (smallest eigenvalue {min_eig:e})"
        )),
        other => other,
    }
}

/// Solves for the Wasserstein mean.
///
/// Non-convergence is not an error: the report then carries the iterate with
/// the smallest residual and `converged = false`.
pub fn wasserstein_mean(e: &Ensemble, cfg: &SolverConfig) -> Result<SolverReport> {
    if !(cfg.residual_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "residual_tol must be positive, got {}",
            cfg.residual_tol
        )));
    }
    let m = e.dim();
    let mut x = match &cfg.init {
        SolverInit::ArithmeticMean => arithmetic_mean(&e.weights, &e.matrices)?,
        SolverInit::Explicit(x0) => {
            ensure_dim(m, x0.dim())?;
            x0.clone()
        }
    };
    let eye = identity(m);
    let mut best: Option<(SpdMatrix, f64, usize)> = None;

    for iteration in 0..=cfg.max_iter {
        let x_half = x.sqrt().map_err(|err| loss_of_positivity(iteration, err))?;
        let x_neg_half = x
            .inv_sqrt()
            .map_err(|err| loss_of_positivity(iteration, err))?;
        let s = sqrt_congruence_sum(&x_half, e)?;
        // Σ wⱼ (Aⱼ # X⁻¹) = X^{-1/2} S X^{-1/2}
        let quick = (&eye - x_neg_half.matrix() * &s * x_neg_half.matrix()).norm();
        if quick <= cfg.residual_tol {
            let r = residual(&x, e)?;
            if r <= cfg.residual_tol {
                return finish(x, iteration, r, true, e);
            }
        }
        if best.as_ref().is_none_or(|(_, b, _)| quick < *b) {
            best = Some((x.clone(), quick, iteration));
        }
        if iteration == cfg.max_iter {
            break;
        }
        let next = match cfg.rule {
            IterationRule::Damped => x_neg_half.matrix() * &s * &s * x_neg_half.matrix(),
            IterationRule::Naive => s,
        };
        x = SpdMatrix::from_symmetrized(&next)
            .map_err(|err| loss_of_positivity(iteration + 1, err))?;
    }

    let (x, _, iteration) = best.expect("at least one iterate is evaluated");
    let r = residual(&x, e)?;
    finish(x, iteration, r, r <= cfg.residual_tol, e)
}

fn finish(
    x: SpdMatrix,
    iterations: usize,
    r: f64,
    converged: bool,
    e: &Ensemble,
) -> Result<SolverReport> {
    let objective = objective(&x, e)?;
    Ok(SolverReport {
        mean: x,
        iterations,
        residual: r,
        objective,
        converged,
    })
}

/// `‖I − Σ wⱼ (Aⱼ # X⁻¹)‖_F`, evaluated through the explicit geometric mean.
pub fn residual(x: &SpdMatrix, e: &Ensemble) -> Result<f64> {
    ensure_dim(e.dim(), x.dim())?;
    let x_inv = x.inverse()?;
    let terms = e
        .matrices
        .iter()
        .map(|a| geometric_mean(a, &x_inv).map(|g| g.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let sum = weighted_sum(e.weights.iter(), terms.iter()).expect("ensembles are non-empty");
    Ok((identity(x.dim()) - sum).norm())
}

/// `‖X − Σ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}‖_F`, the residual of the fixed-point form.
pub fn fixed_point_residual(x: &SpdMatrix, e: &Ensemble) -> Result<f64> {
    ensure_dim(e.dim(), x.dim())?;
    let s = sqrt_congruence_sum(&x.sqrt()?, e)?;
    Ok((x.matrix() - s).norm())
}

/// `Σ wⱼ d²(X, Aⱼ)`.
pub fn objective(x: &SpdMatrix, e: &Ensemble) -> Result<f64> {
    ensure_dim(e.dim(), x.dim())?;
    let mut total = 0.0;
    for (w, a) in e.iter() {
        total += w * bw_distance_squared(x, a)?;
    }
    Ok(total)
}

/// Fails with the first pair whose commutator exceeds
/// `COMMUTING_TOL · ‖Aᵢ‖_F ‖Aⱼ‖_F`.
pub fn ensure_commuting(mats: &[&SpdMatrix]) -> Result<()> {
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let norm = commutator_norm(mats[i].matrix(), mats[j].matrix());
            if norm > COMMUTING_TOL * mats[i].frobenius_norm() * mats[j].frobenius_norm() {
                return Err(Error::NonCommuting {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
    }
    Ok(())
}

/// `[Σ wⱼ Aⱼ^{1/2}]²` for a commuting ensemble.
pub fn commuting_closed_form(e: &Ensemble) -> Result<SpdMatrix> {
    ensure_commuting(&e.matrices.iter().collect::<Vec<_>>())?;
    let roots = e
        .matrices
        .iter()
        .map(|a| a.sqrt().map(|r| r.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let s = weighted_sum(e.weights.iter(), roots.iter()).expect("ensembles are non-empty");
    SpdMatrix::from_symmetrized(&(&s * &s))
}

/// `(2I − Σ wⱼ Aⱼ⁻¹, Σ wⱼ Aⱼ)`: the two bounds on the mean.
pub(crate) fn mean_bounds(e: &Ensemble) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let inverses = e
        .matrices
        .iter()
        .map(|a| a.inverse().map(|i| i.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let harmonic_part = weighted_sum(e.weights.iter(), inverses.iter()).expect("non-empty");
    let lower = HermitianMatrix::from_symmetrized(
        &(identity(e.dim()) * crate::hermitian::re(2.0) - harmonic_part),
    )?;
    let upper = arithmetic_mean(&e.weights, &e.matrices)?.into_hermitian();
    Ok((lower, upper))
}

/// `2I − Σ wⱼ Aⱼ⁻¹ ≤ X ≤ Σ wⱼ Aⱼ`.
pub fn check_bounds(e: &Ensemble, x: &SpdMatrix, cfg: &ToleranceConfig) -> Result<CheckReport> {
    ensure_dim(e.dim(), x.dim())?;
    let (lower, upper) = mean_bounds(e)?;
    let lo = loewner_leq(&lower, x.hermitian(), cfg)?;
    let hi = loewner_leq(x.hermitian(), &upper, cfg)?;
    Ok(CheckReport::from_criteria(
        "bounds",
        e.provenance(*cfg),
        vec![
            Criterion::loewner("lower", &lo),
            Criterion::loewner("upper", &hi),
        ],
    ))
}

fn max_spread(e: &Ensemble) -> f64 {
    let first = e.matrices[0].matrix();
    e.matrices
        .iter()
        .map(|a| (a.matrix() - first).norm() / first.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// `log det X ≥ Σ wⱼ log det Aⱼ`, with equality exactly when all `Aⱼ` coincide.
///
/// The margin is the log-scale gap. `equality` is set when the gap is at most
/// [`DET_EQUALITY_TOL`]; `values["max_spread"]` records how far the members are
/// from coinciding so the equality branch can be cross-checked.
pub fn check_det_inequality(
    e: &Ensemble,
    x: &SpdMatrix,
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    ensure_dim(e.dim(), x.dim())?;
    let rhs: f64 = e.iter().map(|(w, a)| w * a.log_det()).sum();
    let gap = x.log_det() - rhs;
    let spread = max_spread(e);
    let mut report = CheckReport::from_criteria(
        "det_inequality",
        e.provenance(*cfg),
        vec![Criterion::new("log_det_gap", gap, cfg.loewner_tol)],
    )
    .with_value("max_spread", spread)
    .with_value(
        "coincident",
        if spread <= COINCIDENCE_TOL { 1.0 } else { 0.0 },
    );
    report.equality = Some(gap.abs() <= DET_EQUALITY_TOL);
    Ok(report)
}

/// `log det(Σ wⱼ Aⱼ) ≥ Σ wⱼ log det Aⱼ`, equality exactly for identical members.
pub fn check_logdet_concavity(e: &Ensemble, cfg: &ToleranceConfig) -> Result<CheckReport> {
    let lhs = arithmetic_mean(&e.weights, &e.matrices)?.log_det();
    let rhs: f64 = e.iter().map(|(w, a)| w * a.log_det()).sum();
    let gap = lhs - rhs;
    let spread = max_spread(e);
    let mut report = CheckReport::from_criteria(
        "logdet_concavity",
        e.provenance(*cfg),
        vec![Criterion::new("log_det_gap", gap, cfg.loewner_tol)],
    )
    .with_value("max_spread", spread);
    report.equality = Some(gap.abs() <= DET_EQUALITY_TOL);
    Ok(report)
}
