//! Executable checks of the Wasserstein-mean inequalities and identities.
//!
//! Each check returns a [`CheckReport`] whose margin is the smallest eigenvalue
//! of the slack `RHS − LHS` (or a log-scale gap, or minus an error for identity
//! checks). Invalid inputs are `Err`; a failed solve or an unmet hypothesis is
//! reported in-band so a suite can keep going.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{
    self, ensure_commuting, fixed_point_residual, residual, wasserstein_mean, Ensemble,
    SolverConfig, SolverReport,
};
use crate::error::{Error, Result};
use crate::hermitian::{
    congruence, identity, loewner_leq, random_ginibre, random_spd_in_basis, random_spd_with,
    random_unitary, re, seeded_rng, CMat, ComplexMatrix, HermitianMatrix, SpdMatrix,
    ToleranceConfig,
};
use crate::means::{arithmetic_mean, geometric_mean, kantorovich, weighted_sum, WeightVector};
use crate::products::{
    ando_map, apply, apply_spd, ensemble_hadamard, ensemble_tensor, hadamard_spd, kron_spd,
    random_isometry_map, PositiveMapSpec,
};
use crate::report::{CheckReport, Criterion, Provenance};

/// Largest `m·s` for which the tensor-identity check solves the product ensemble.
pub const MAX_TENSOR_DIM: usize = 16;
/// Relative error allowed between the two sides of the tensor identity.
pub const TENSOR_IDENTITY_TOL: f64 = 1e-6;
/// Solver-versus-closed-form Frobenius tolerance on commuting ensembles.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
/// Lower bound on `‖Ω(ω; 𝔸⁻¹) − Ω(ω; 𝔸)⁻¹‖_F` demonstrated by the self-duality check.
pub const SELF_DUALITY_GAP: f64 = 1e-4;
/// `‖Φ(I) − I‖_F` above which a map is rejected as not unital.
pub const UNITAL_TOL: f64 = 1e-10;
/// Relative tolerance for the geometric-mean identities.
pub const IDENTITY_REL_TOL: f64 = 1e-9;

pub const CHECK_NAMES: &[&str] = &[
    "geometric_mean_properties",
    "fixed_point",
    "commuting_closed_form",
    "det_inequality",
    "logdet_concavity",
    "bounds",
    "self_duality_gap",
    "phi_geometric_mean",
    "phi_wass",
    "tensor_identity",
    "tensor_arithmetic_bound",
    "hadamard_arithmetic_bound",
    "commuting_quadruple",
    "hadamard_inverse_bounds",
    "kantorovich_hadamard",
    "jensen_contraction",
    "sqrt_sum_lower_bound",
];

/// Settings shared by all checks of one run.
#[derive(Clone, Debug, Default)]
pub struct CheckContext {
    pub solver: SolverConfig,
    pub tol: ToleranceConfig,
    /// Test hook: evaluate every inequality in the wrong direction.
    pub reversed: bool,
}

enum Solved {
    Mean(SolverReport),
    NotConverged(String),
}

impl CheckContext {
    fn leq(&self, name: &str, lhs: &HermitianMatrix, rhs: &HermitianMatrix) -> Result<Criterion> {
        let cmp = if self.reversed {
            loewner_leq(rhs, lhs, &self.tol)?
        } else {
            loewner_leq(lhs, rhs, &self.tol)?
        };
        Ok(Criterion::loewner(name, &cmp))
    }

    /// `gap ≥ 0` for a scalar inequality.
    fn nonneg(&self, name: &str, gap: f64) -> Criterion {
        let gap = if self.reversed { -gap } else { gap };
        Criterion::new(name, gap, self.tol.loewner_tol)
    }

    fn solve(&self, e: &Ensemble, label: &str) -> Result<Solved> {
        let r = wasserstein_mean(e, &self.solver)?;
        if r.converged {
            Ok(Solved::Mean(r))
        } else {
            Ok(Solved::NotConverged(format!(
                "solve of {label} did not converge after {} iterations (residual {:e})",
                r.iterations, r.residual
            )))
        }
    }

    fn provenance(&self, ensembles: &[&Ensemble]) -> Provenance {
        Provenance::direct(self.tol)
            .with_dims(ensembles.iter().map(|e| e.dim()).collect())
            .with_weights(
                ensembles
                    .iter()
                    .map(|e| e.weights().as_slice().to_vec())
                    .collect(),
            )
    }

    fn provenance_dims(&self, dims: Vec<usize>) -> Provenance {
        Provenance::direct(self.tol).with_dims(dims)
    }
}

macro_rules! solve_or_report {
    ($ctx:expr, $e:expr, $label:expr, $name:expr, $prov:expr) => {
        match $ctx.solve($e, $label)? {
            Solved::Mean(r) => r,
            Solved::NotConverged(msg) => return Ok(CheckReport::failed($name, $prov, msg)),
        }
    };
}

fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn herm(m: &CMat) -> Result<HermitianMatrix> {
    HermitianMatrix::from_symmetrized(m)
}

/// Inputs for the two-variable geometric-mean properties.
#[derive(Clone, Debug)]
pub struct GeometricMeanInputs {
    pub a: SpdMatrix,
    pub b: SpdMatrix,
    /// Positive semidefinite increments for monotonicity.
    pub p: HermitianMatrix,
    pub q: HermitianMatrix,
    /// Nonsingular congruence factor.
    pub x: ComplexMatrix,
    pub scalars: (f64, f64),
}

/// Joint homogeneity, symmetry, monotonicity, congruence invariance,
/// self-duality, the determinant identity and the harmonic–geometric–arithmetic
/// sandwich of `A # B`.
pub fn check_geometric_mean_properties(
    inp: &GeometricMeanInputs,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let (a, b) = (&inp.a, &inp.b);
    let g = geometric_mean(a, b)?;
    let mut details = Vec::new();

    let (s, t) = inp.scalars;
    let lhs = geometric_mean(&a.scale(s)?, &b.scale(t)?)?;
    let rhs = g.matrix() * re((s * t).sqrt());
    details.push(Criterion::upper_bound(
        "g1_homogeneity",
        rel_err(lhs.matrix(), &rhs),
        IDENTITY_REL_TOL,
    ));

    let swapped = geometric_mean(b, a)?;
    details.push(Criterion::upper_bound(
        "g2_symmetry",
        rel_err(swapped.matrix(), g.matrix()),
        IDENTITY_REL_TOL,
    ));

    let c = SpdMatrix::new(a.hermitian().add(&inp.p)?)?;
    let d = SpdMatrix::new(b.hermitian().add(&inp.q)?)?;
    details.push(ctx.leq(
        "g3_monotonicity",
        g.hermitian(),
        geometric_mean(&c, &d)?.hermitian(),
    )?);

    let xa = SpdMatrix::new(congruence(&inp.x, a.hermitian())?)?;
    let xb = SpdMatrix::new(congruence(&inp.x, b.hermitian())?)?;
    let lhs = congruence(&inp.x, g.hermitian())?;
    let rhs = geometric_mean(&xa, &xb)?;
    details.push(Criterion::upper_bound(
        "g4_congruence",
        rel_err(lhs.matrix(), rhs.matrix()),
        IDENTITY_REL_TOL,
    ));

    let a_inv = a.inverse()?;
    let b_inv = b.inverse()?;
    let lhs = g.inverse()?;
    let rhs = geometric_mean(&a_inv, &b_inv)?;
    details.push(Criterion::upper_bound(
        "g5_self_duality",
        rel_err(lhs.matrix(), rhs.matrix()),
        IDENTITY_REL_TOL,
    ));

    let det_err = (g.log_det() - 0.5 * (a.log_det() + b.log_det())).abs();
    details.push(Criterion::upper_bound(
        "g6_determinant",
        det_err,
        IDENTITY_REL_TOL,
    ));

    let half = WeightVector::uniform(2)?;
    let harmonic = arithmetic_mean(&half, &[a_inv, b_inv])?.inverse()?;
    let arith = arithmetic_mean(&half, &[a.clone(), b.clone()])?;
    details.push(ctx.leq("g7_harmonic_geometric", harmonic.hermitian(), g.hermitian())?);
    details.push(ctx.leq("g7_geometric_arithmetic", g.hermitian(), arith.hermitian())?);

    Ok(CheckReport::from_criteria(
        "geometric_mean_properties",
        ctx.provenance_dims(vec![a.dim()]),
        details,
    ))
}

/// Both residual forms at the solver output.
pub fn check_fixed_point(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    const NAME: &str = "fixed_point";
    let prov = ctx.provenance(&[e]);
    let r = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let first = residual(&r.mean, e)?;
    let second = fixed_point_residual(&r.mean, e)? / r.mean.frobenius_norm();
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![
            Criterion::upper_bound("identity_form", first, ctx.tol.residual_tol),
            Criterion::upper_bound("fixed_point_form", second, IDENTITY_REL_TOL),
        ],
    )
    .with_value("iterations", r.iterations as f64))
}

/// Solver output against `[Σ wⱼ Aⱼ^{1/2}]²` on a commuting ensemble.
pub fn check_commuting_closed_form(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    const NAME: &str = "commuting_closed_form";
    let closed = barycenter::commuting_closed_form(e)?;
    let prov = ctx.provenance(&[e]);
    let r = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let err = (r.mean.matrix() - closed.matrix()).norm();
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![Criterion::upper_bound(
            "solver_vs_closed_form",
            err,
            CLOSED_FORM_TOL,
        )],
    ))
}

pub fn check_det_inequality(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    const NAME: &str = "det_inequality";
    let prov = ctx.provenance(&[e]);
    let r = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let mut report = barycenter::check_det_inequality(e, &r.mean, &ctx.tol)?;
    if ctx.reversed {
        let gap = report.margin.unwrap_or(f64::NAN);
        let keep = (report.equality, report.values.clone());
        report =
            CheckReport::from_criteria(NAME, prov.clone(), vec![ctx.nonneg("log_det_gap", gap)]);
        report.equality = keep.0;
        report.values = keep.1;
    }
    report.inputs = prov;
    Ok(report)
}

pub fn check_logdet_concavity(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    let mut report = barycenter::check_logdet_concavity(e, &ctx.tol)?;
    if ctx.reversed {
        let gap = report.margin.unwrap_or(f64::NAN);
        let mut flipped = CheckReport::from_criteria(
            &report.check_name,
            report.inputs.clone(),
            vec![ctx.nonneg("log_det_gap", gap)],
        );
        flipped.equality = report.equality;
        flipped.values = report.values;
        report = flipped;
    }
    report.inputs = ctx.provenance(&[e]);
    Ok(report)
}

/// `2I − Σ wⱼ Aⱼ⁻¹ ≤ Ω ≤ Σ wⱼ Aⱼ`.
pub fn check_bounds(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    const NAME: &str = "bounds";
    let prov = ctx.provenance(&[e]);
    let r = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let (lower, upper) = barycenter::mean_bounds(e)?;
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![
            ctx.leq("lower", &lower, r.mean.hermitian())?,
            ctx.leq("upper", r.mean.hermitian(), &upper)?,
        ],
    ))
}

/// `‖Ω(ω; 𝔸⁻¹) − Ω(ω; 𝔸)⁻¹‖_F > 1e-4`: the mean is not self-dual.
pub fn check_self_duality_gap(e: &Ensemble, ctx: &CheckContext) -> Result<CheckReport> {
    const NAME: &str = "self_duality_gap";
    let prov = ctx.provenance(&[e]);
    let direct = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let inv = e.inverted()?;
    let of_inverses = solve_or_report!(ctx, &inv, "inverted ensemble", NAME, prov);
    let gap = (of_inverses.mean.matrix() - direct.mean.inverse()?.matrix()).norm();
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![Criterion::new(
            "gap_above_floor",
            gap - SELF_DUALITY_GAP,
            0.0,
        )],
    )
    .with_value("gap", gap))
}

/// `Φ(A # B) ≤ Φ(A) # Φ(B)`.
pub fn check_phi_geometric_mean(
    a: &SpdMatrix,
    b: &SpdMatrix,
    phi: &PositiveMapSpec,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let lhs = apply(phi, geometric_mean(a, b)?.hermitian())?;
    let rhs = geometric_mean(&apply_spd(phi, a)?, &apply_spd(phi, b)?)?;
    Ok(CheckReport::from_criteria(
        "phi_geometric_mean",
        ctx.provenance_dims(vec![phi.source_dim(), phi.target_dim()]),
        vec![ctx.leq("phi_of_mean", &lhs, rhs.hermitian())?],
    ))
}

fn ensure_unital(phi: &PositiveMapSpec) -> Result<()> {
    let deviation = phi.unitality_defect();
    if deviation > UNITAL_TOL {
        return Err(Error::NotUnital { deviation });
    }
    Ok(())
}

/// `Φ(Ω) ≥ 2I − Σ wⱼ Φ(Aⱼ⁻¹)` and `Φ(Ω⁻¹) ≥ 2I − Σ wⱼ Φ(Aⱼ)`.
///
/// Also records, without asserting anything, the extreme eigenvalues of
/// `Ω(ω; Φ(𝔸)) − Φ(Ω(ω; 𝔸))`, whose sign is not determined in general.
pub fn check_phi_wass(
    e: &Ensemble,
    phi: &PositiveMapSpec,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "phi_wass";
    ensure_unital(phi)?;
    if phi.source_dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: phi.source_dim(),
        });
    }
    let prov = ctx
        .provenance(&[e])
        .with_dims(vec![phi.source_dim(), phi.target_dim()]);
    let r = solve_or_report!(ctx, e, "ensemble", NAME, prov);
    let x = &r.mean;
    let k = phi.target_dim();
    let two = identity(k) * re(2.0);

    let mapped_inv = e
        .matrices()
        .iter()
        .map(|a| apply(phi, a.inverse()?.hermitian()).map(HermitianMatrix::into_inner))
        .collect::<Result<Vec<_>>>()?;
    let mapped = e
        .matrices()
        .iter()
        .map(|a| apply_spd(phi, a))
        .collect::<Result<Vec<_>>>()?;
    let mapped_raw: Vec<CMat> = mapped.iter().map(|m| m.matrix().clone()).collect();

    let lower1 =
        herm(&(&two - weighted_sum(e.weights().iter(), mapped_inv.iter()).expect("non-empty")))?;
    let lower2 =
        herm(&(&two - weighted_sum(e.weights().iter(), mapped_raw.iter()).expect("non-empty")))?;
    let phi_x = apply(phi, x.hermitian())?;
    let phi_x_inv = apply(phi, x.inverse()?.hermitian())?;
    let mut report = CheckReport::from_criteria(
        NAME,
        prov,
        vec![
            ctx.leq("phi_mean", &lower1, &phi_x)?,
            ctx.leq("phi_mean_inverse", &lower2, &phi_x_inv)?,
        ],
    );

    let mapped_ensemble = Ensemble::new(e.weights().clone(), mapped)?;
    if let Solved::Mean(mean_of_mapped) = ctx.solve(&mapped_ensemble, "mapped ensemble")? {
        let diff = mean_of_mapped.mean.hermitian().sub(&phi_x)?.eigh()?;
        report = report
            .with_value(
                "explore_min_eig_mean_of_mapped_minus_mapped_mean",
                diff.min(),
            )
            .with_value(
                "explore_max_eig_mean_of_mapped_minus_mapped_mean",
                diff.max(),
            );
    }
    Ok(report)
}

fn ensure_tensor_size(a: &Ensemble, b: &Ensemble) -> Result<()> {
    let size = a.dim() * b.dim();
    if size > MAX_TENSOR_DIM {
        return Err(Error::Precondition(format!(
            "tensor dimension {size} exceeds the cap of {MAX_TENSOR_DIM}"
        )));
    }
    Ok(())
}

/// `Ω(ω; 𝔸) ⊗ Ω(μ; 𝔹) = Ω(ω ⊗ μ; Aᵢ ⊗ Bⱼ)`.
pub fn check_tensor_identity(
    a: &Ensemble,
    b: &Ensemble,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "tensor_identity";
    ensure_tensor_size(a, b)?;
    let prov = ctx.provenance(&[a, b]);
    let x = solve_or_report!(ctx, a, "first ensemble", NAME, prov);
    let y = solve_or_report!(ctx, b, "second ensemble", NAME, prov);
    let t = ensemble_tensor(a, b)?;
    let z = solve_or_report!(ctx, &t, "tensor ensemble", NAME, prov);
    let kxy = kron_spd(&x.mean, &y.mean)?;
    let err = (kxy.matrix() - z.mean.matrix()).norm() / z.mean.frobenius_norm();
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![Criterion::upper_bound(
            "relative_error",
            err,
            TENSOR_IDENTITY_TOL,
        )],
    ))
}

/// `Ω(ω; 𝔸) ⊗ Ω(μ; 𝔹) ≤ Σ wᵢ μⱼ Aᵢ ⊗ Bⱼ`.
pub fn check_tensor_arithmetic_bound(
    a: &Ensemble,
    b: &Ensemble,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "tensor_arithmetic_bound";
    let prov = ctx.provenance(&[a, b]);
    let x = solve_or_report!(ctx, a, "first ensemble", NAME, prov);
    let y = solve_or_report!(ctx, b, "second ensemble", NAME, prov);
    let t = ensemble_tensor(a, b)?;
    let rhs = arithmetic_mean(t.weights(), t.matrices())?;
    let lhs = kron_spd(&x.mean, &y.mean)?;
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![ctx.leq("tensor_vs_arithmetic", lhs.hermitian(), rhs.hermitian())?],
    ))
}

/// `Ω(ω; 𝔸) ∘ Ω(μ; 𝔹) ≤ Σ wᵢ μⱼ Aᵢ ∘ Bⱼ`.
pub fn check_hadamard_arithmetic_bound(
    a: &Ensemble,
    b: &Ensemble,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "hadamard_arithmetic_bound";
    let prov = ctx.provenance(&[a, b]);
    let x = solve_or_report!(ctx, a, "first ensemble", NAME, prov);
    let y = solve_or_report!(ctx, b, "second ensemble", NAME, prov);
    let h = ensemble_hadamard(a, b)?;
    let rhs = arithmetic_mean(h.weights(), h.matrices())?;
    let lhs = hadamard_spd(&x.mean, &y.mean)?;
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![ctx.leq("hadamard_vs_arithmetic", lhs.hermitian(), rhs.hermitian())?],
    ))
}

/// For `AB = BA` and `CD = DC`:
/// `(AB + BA) ∘ (CD + DC) − (A² + B²) ∘ (C² + D²) ≤ ½ (A − B)² ∘ (C − D)²`.
pub fn check_commuting_quadruple(
    a: &SpdMatrix,
    b: &SpdMatrix,
    c: &SpdMatrix,
    d: &SpdMatrix,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    ensure_commuting(&[a, b])?;
    ensure_commuting(&[c, d]).map_err(|e| match e {
        Error::NonCommuting { norm, .. } => Error::NonCommuting {
            first: 2,
            second: 3,
            norm,
        },
        other => other,
    })?;
    let (a, b, c, d) = (a.matrix(), b.matrix(), c.matrix(), d.matrix());
    let ab = a * b + b * a;
    let cd = c * d + d * c;
    let sq_ab = a * a + b * b;
    let sq_cd = c * c + d * d;
    let lhs = ab.component_mul(&cd) - sq_ab.component_mul(&sq_cd);
    let amb = a - b;
    let cmd = c - d;
    let rhs = (&amb * &amb).component_mul(&(&cmd * &cmd)) * re(0.5);
    Ok(CheckReport::from_criteria(
        "commuting_quadruple",
        ctx.provenance_dims(vec![a.nrows()]),
        vec![ctx.leq("quadruple", &herm(&lhs)?, &herm(&rhs)?)?],
    ))
}

/// `(A ∘ B)⁻¹ ≤ A⁻¹ ∘ B⁻¹ ≤ K(λ_min, λ_max) (A ∘ B)⁻¹`, with the extreme
/// eigenvalues of `A ⊗ B`.
pub fn check_hadamard_inverse_bounds(
    a: &SpdMatrix,
    b: &SpdMatrix,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    let k = kantorovich(a.min_eig() * b.min_eig(), a.max_eig() * b.max_eig())?;
    let h_inv = hadamard_spd(a, b)?.inverse()?;
    let inv_h = hadamard_spd(&a.inverse()?, &b.inverse()?)?;
    Ok(CheckReport::from_criteria(
        "hadamard_inverse_bounds",
        ctx.provenance_dims(vec![a.dim()]),
        vec![
            ctx.leq("lower", h_inv.hermitian(), inv_h.hermitian())?,
            ctx.leq("upper", inv_h.hermitian(), &h_inv.hermitian().scale(k))?,
        ],
    )
    .with_value("kantorovich", k))
}

/// `(α, β)`: smallest and largest eigenvalue over all ensemble members.
fn spectral_bounds(e: &Ensemble) -> (f64, f64) {
    e.matrices()
        .iter()
        .fold((f64::INFINITY, 0.0), |(lo, hi), a| {
            (lo.min(a.min_eig()), hi.max(a.max_eig()))
        })
}

/// `(αγ + βδ) / (2√(αβγδ))`.
fn hadamard_constant(a: &Ensemble, b: &Ensemble) -> Result<f64> {
    let (alpha, beta) = spectral_bounds(a);
    let (gamma, delta) = spectral_bounds(b);
    Ok(kantorovich(alpha * gamma, beta * delta)?.sqrt())
}

/// `X ∘ Y ≤ c Σ wᵢ μⱼ [(X ∘ Y)^{1/2} (Aᵢ ∘ Bⱼ) (X ∘ Y)^{1/2}]^{1/2}` with
/// `c = (αγ + βδ) / (2√(αβγδ))`.
pub fn check_kantorovich_hadamard(
    a: &Ensemble,
    b: &Ensemble,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "kantorovich_hadamard";
    let prov = ctx.provenance(&[a, b]);
    let c = hadamard_constant(a, b)?;
    let x = solve_or_report!(ctx, a, "first ensemble", NAME, prov);
    let y = solve_or_report!(ctx, b, "second ensemble", NAME, prov);
    let p = hadamard_spd(&x.mean, &y.mean)?;
    let p_half = p.sqrt()?;
    let h = ensemble_hadamard(a, b)?;
    let terms = h
        .matrices()
        .iter()
        .map(|m| {
            SpdMatrix::from_symmetrized(&(p_half.matrix() * m.matrix() * p_half.matrix()))?
                .sqrt()
                .map(|s| s.matrix().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs = weighted_sum(h.weights().iter(), terms.iter()).expect("non-empty") * re(c);
    Ok(CheckReport::from_criteria(
        NAME,
        prov,
        vec![ctx.leq("kantorovich_bound", p.hermitian(), &herm(&rhs)?)?],
    )
    .with_value("constant", c))
}

/// `(X* A X)ᵖ ≤ X* Aᵖ X` for `0 ≤ p ≤ 1` when `X⁻¹` is a contraction.
pub fn check_jensen_contraction(
    a: &SpdMatrix,
    x: &ComplexMatrix,
    p: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!(
            "exponent p = {p} lies outside [0, 1]"
        )));
    }
    if x.rows() != x.cols() || x.rows() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: x.rows(),
        });
    }
    let sv = x.matrix().clone().singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let inv_norm = 1.0 / smin;
    if !(inv_norm <= 1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "X^-1 is not a contraction: operator norm {inv_norm}"
        )));
    }
    let adj = x.adjoint();
    let inner = SpdMatrix::new(congruence(&adj, a.hermitian())?)?;
    let lhs = inner.power(p)?;
    let rhs = congruence(&adj, a.power(p)?.hermitian())?;
    Ok(CheckReport::from_criteria(
        "jensen_contraction",
        ctx.provenance_dims(vec![a.dim()]),
        vec![ctx.leq("jensen", lhs.hermitian(), &rhs)?],
    )
    .with_value("p", p)
    .with_value("inverse_operator_norm", inv_norm))
}

/// `Σ wᵢ μⱼ (Aᵢ ∘ Bⱼ)^{1/2} ≥ [2√(αβγδ) / (αγ + βδ)] I`, provided both means
/// dominate the identity. Skipped otherwise.
pub fn check_sqrt_sum_lower_bound(
    a: &Ensemble,
    b: &Ensemble,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    const NAME: &str = "sqrt_sum_lower_bound";
    let prov = ctx.provenance(&[a, b]);
    let x = solve_or_report!(ctx, a, "first ensemble", NAME, prov);
    let y = solve_or_report!(ctx, b, "second ensemble", NAME, prov);
    for (label, m) in [("first", &x.mean), ("second", &y.mean)] {
        let floor = 1.0 - ctx.tol.loewner_tol * m.frobenius_norm().max(1.0);
        if m.min_eig() < floor {
            return Ok(CheckReport::skipped(
                NAME,
                prov,
                format!(
                    "inverse of the {label} mean is not a contraction (smallest eigenvalue {})",
                    m.min_eig()
                ),
            ));
        }
    }
    let c = hadamard_constant(a, b)?;
    let h = ensemble_hadamard(a, b)?;
    let roots = h
        .matrices()
        .iter()
        .map(|m| m.sqrt().map(|s| s.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let lhs = herm(&weighted_sum(h.weights().iter(), roots.iter()).expect("non-empty"))?;
    let bound = HermitianMatrix::scaled_identity(lhs.dim(), 1.0 / c);
    Ok(
        CheckReport::from_criteria(NAME, prov, vec![ctx.leq("sqrt_sum", &bound, &lhs)?])
            .with_value("constant", 1.0 / c),
    )
}

// ---------------------------------------------------------------------------
// Suite

/// `{"checks": [...], "seeds": [lo, hi], "dims": [...], "tol": ...}`.
///
/// Seeds run over the half-open range `lo..hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitePlan {
    pub checks: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: [u64; 2],
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    /// Loewner tolerance; the default applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Test hook: evaluate every inequality in the wrong direction.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reverse_inequalities: bool,
}

fn default_seeds() -> [u64; 2] {
    [0, 50]
}

fn default_dims() -> Vec<usize> {
    vec![2, 3]
}

impl Default for SuitePlan {
    fn default() -> Self {
        Self {
            checks: CHECK_NAMES.iter().map(|s| s.to_string()).collect(),
            seeds: default_seeds(),
            dims: default_dims(),
            tol: None,
            max_iter: None,
            reverse_inequalities: false,
        }
    }
}

impl SuitePlan {
    pub fn empty() -> Self {
        Self {
            checks: Vec::new(),
            ..Self::default()
        }
    }

    /// Expands `all`, rejects unknown names and empty dimension lists.
    pub fn resolved_checks(&self) -> Result<Vec<&'static str>> {
        let mut out = Vec::new();
        for name in &self.checks {
            if name == "all" {
                out.extend_from_slice(CHECK_NAMES);
                continue;
            }
            match CHECK_NAMES.iter().find(|c| *c == name) {
                Some(c) => out.push(*c),
                None => {
                    return Err(Error::InvalidParameter(format!("unknown check `{name}`"))
                        .in_field("checks"))
                }
            }
        }
        if !out.is_empty() && (self.dims.is_empty() || self.dims.contains(&0)) {
            return Err(
                Error::InvalidParameter("dims must be non-empty and positive".into())
                    .in_field("dims"),
            );
        }
        if self.seeds[0] > self.seeds[1] {
            return Err(Error::InvalidParameter(format!(
                "seed range [{}, {}] is reversed",
                self.seeds[0], self.seeds[1]
            ))
            .in_field("seeds"));
        }
        Ok(out)
    }

    pub fn context(&self) -> Result<CheckContext> {
        let mut ctx = CheckContext::default();
        if let Some(t) = self.tol {
            ctx.tol.loewner_tol = t;
        }
        ctx.tol.validate().map_err(|e| e.in_field("tol"))?;
        if let Some(n) = self.max_iter {
            ctx.solver.max_iter = n;
        }
        ctx.reversed = self.reverse_inequalities;
        Ok(ctx)
    }
}

#[derive(Clone, Debug)]
enum Instance {
    Fixed(&'static str),
    Seeded { seed: u64, dim: usize },
}

/// Runs every planned check on its fixed cases, then on each `(seed, dim)`.
///
/// Reports come back in plan order; a check that errors yields an error report
/// rather than aborting the run.
pub fn run_suite(plan: &SuitePlan) -> Result<Vec<CheckReport>> {
    let checks = plan.resolved_checks()?;
    let ctx = plan.context()?;
    let base_dim = plan.dims.first().copied().unwrap_or(2);
    let mut jobs = Vec::new();
    for &check in &checks {
        for label in fixed_cases(check) {
            jobs.push((check, Instance::Fixed(label)));
        }
        for seed in plan.seeds[0]..plan.seeds[1] {
            for &dim in &plan.dims {
                jobs.push((check, Instance::Seeded { seed, dim }));
            }
        }
    }
    Ok(jobs
        .par_iter()
        .map(|(check, inst)| run_instance(check, inst, base_dim, &ctx))
        .collect())
}

/// Whether every non-skipped report holds.
pub fn suite_passes(reports: &[CheckReport]) -> bool {
    reports.iter().filter(|r| !r.is_skipped()).all(|r| r.holds)
}

fn run_instance(check: &str, inst: &Instance, base_dim: usize, ctx: &CheckContext) -> CheckReport {
    let (result, prov_patch): (Result<CheckReport>, Box<dyn Fn(Provenance) -> Provenance>) =
        match inst {
            Instance::Fixed(label) => {
                let label = *label;
                (
                    fixed_instance(check, label, base_dim, ctx),
                    Box::new(move |p: Provenance| p.fixed(label)),
                )
            }
            Instance::Seeded { seed, dim } => {
                let seed = *seed;
                (
                    seeded_instance(check, seed, *dim, ctx),
                    Box::new(move |p: Provenance| p.seeded(seed)),
                )
            }
        };
    match result {
        Ok(mut r) => {
            r.inputs = prov_patch(r.inputs);
            r
        }
        Err(err) => {
            let dims = match inst {
                Instance::Seeded { dim, .. } => vec![*dim],
                Instance::Fixed(_) => vec![base_dim],
            };
            CheckReport::error(
                check,
                prov_patch(Provenance::direct(ctx.tol).with_dims(dims)),
                &err,
            )
        }
    }
}

/// Fixed inputs per check; labels starting with `equality:` sit on the
/// equality case of the statement.
pub fn fixed_cases(check: &str) -> &'static [&'static str] {
    match check {
        "geometric_mean_properties" => &["equality:identical_pair"],
        "fixed_point" => &["two_point_commuting"],
        "commuting_closed_form" => &["two_point_commuting"],
        "det_inequality" => &["equality:identical_members", "two_point_commuting"],
        "logdet_concavity" => &["equality:identical_members"],
        "bounds" => &["equality:identity_members", "two_point_commuting"],
        "self_duality_gap" => &["noncommuting_counterexample"],
        "phi_geometric_mean" => &["equality:identical_pair"],
        "phi_wass" => &["equality:identity_members", "two_point_unitary"],
        "tensor_identity" => &["equality:singletons"],
        "tensor_arithmetic_bound" => &["equality:singletons", "two_point_squared"],
        "hadamard_arithmetic_bound" => &["equality:singletons"],
        "commuting_quadruple" => &["equality:coincident_pairs", "scalar"],
        "hadamard_inverse_bounds" => &["equality:identities"],
        "kantorovich_hadamard" => &["equality:identity_singletons"],
        "jensen_contraction" => &["equality:p0_unitary", "equality:p1"],
        "sqrt_sum_lower_bound" => &["equality:identity_members", "scaled_identity_members"],
        _ => &[],
    }
}

fn two_point_commuting() -> Ensemble {
    Ensemble::uniform(vec![
        SpdMatrix::identity(2),
        SpdMatrix::scaled_identity(2, 4.0),
    ])
    .expect("valid ensemble")
}

fn fixed_instance(check: &str, label: &str, m: usize, ctx: &CheckContext) -> Result<CheckReport> {
    let mut rng = seeded_rng(0x5eed_0000 ^ fnv1a(check));
    let a = random_spd_with(m, 0.5, 4.0, &mut rng)?;
    let b = random_spd_with(m, 0.5, 4.0, &mut rng)?;
    let identities = |k: usize| Ensemble::uniform(vec![SpdMatrix::identity(m); k]);
    match (check, label) {
        ("geometric_mean_properties", _) => {
            let inputs = GeometricMeanInputs {
                a: a.clone(),
                b: a,
                p: HermitianMatrix::scaled_identity(m, 0.0),
                q: HermitianMatrix::scaled_identity(m, 0.0),
                x: ComplexMatrix::identity(m),
                scalars: (2.0, 2.0),
            };
            check_geometric_mean_properties(&inputs, ctx)
        }
        ("fixed_point", _) => check_fixed_point(&two_point_commuting(), ctx),
        ("commuting_closed_form", _) => check_commuting_closed_form(&two_point_commuting(), ctx),
        ("det_inequality", "two_point_commuting") => {
            check_det_inequality(&two_point_commuting(), ctx)
        }
        ("det_inequality", _) => {
            check_det_inequality(&Ensemble::uniform(vec![a.clone(), a.clone(), a])?, ctx)
        }
        ("logdet_concavity", _) => {
            check_logdet_concavity(&Ensemble::uniform(vec![a.clone(), a])?, ctx)
        }
        ("bounds", "two_point_commuting") => check_bounds(&two_point_commuting(), ctx),
        ("bounds", _) => check_bounds(&identities(3)?, ctx),
        ("self_duality_gap", _) => check_self_duality_gap(&Ensemble::uniform(vec![a, b])?, ctx),
        ("phi_geometric_mean", _) => {
            let phi = random_isometry_map(m, m.div_ceil(2), 1)?;
            check_phi_geometric_mean(&a, &a, &phi, ctx)
        }
        ("phi_wass", "two_point_unitary") => {
            let phi = random_isometry_map(2, 2, 1)?;
            check_phi_wass(&two_point_commuting(), &phi, ctx)
        }
        ("phi_wass", _) => check_phi_wass(&identities(2)?, &PositiveMapSpec::identity(m), ctx),
        ("tensor_identity", _) => {
            check_tensor_identity(&Ensemble::singleton(a), &Ensemble::singleton(b), ctx)
        }
        ("tensor_arithmetic_bound", "two_point_squared") => {
            check_tensor_arithmetic_bound(&two_point_commuting(), &two_point_commuting(), ctx)
        }
        ("tensor_arithmetic_bound", _) => {
            check_tensor_arithmetic_bound(&Ensemble::singleton(a), &Ensemble::singleton(b), ctx)
        }
        ("hadamard_arithmetic_bound", _) => {
            check_hadamard_arithmetic_bound(&Ensemble::singleton(a), &Ensemble::singleton(b), ctx)
        }
        ("commuting_quadruple", "scalar") => {
            let s = |x: f64| SpdMatrix::from_real_diagonal(&[x]);
            check_commuting_quadruple(&s(1.0)?, &s(2.0)?, &s(1.0)?, &s(3.0)?, ctx)
        }
        ("commuting_quadruple", _) => check_commuting_quadruple(&a, &a, &b, &b, ctx),
        ("hadamard_inverse_bounds", _) => {
            check_hadamard_inverse_bounds(&SpdMatrix::identity(m), &SpdMatrix::identity(m), ctx)
        }
        ("kantorovich_hadamard", _) => check_kantorovich_hadamard(
            &Ensemble::singleton(SpdMatrix::identity(m)),
            &Ensemble::singleton(SpdMatrix::identity(m)),
            ctx,
        ),
        ("jensen_contraction", "equality:p0_unitary") => {
            let u = ComplexMatrix::new(random_unitary(m, &mut rng))?;
            check_jensen_contraction(&a, &u, 0.0, ctx)
        }
        ("jensen_contraction", _) => {
            let x = ComplexMatrix::new(random_unitary(m, &mut rng) * re(1.5))?;
            check_jensen_contraction(&a, &x, 1.0, ctx)
        }
        ("sqrt_sum_lower_bound", "scaled_identity_members") => {
            let e = Ensemble::uniform(vec![SpdMatrix::scaled_identity(m, 4.0); 2])?;
            check_sqrt_sum_lower_bound(&e, &e, ctx)
        }
        ("sqrt_sum_lower_bound", _) => {
            check_sqrt_sum_lower_bound(&identities(2)?, &identities(2)?, ctx)
        }
        _ => Err(Error::InvalidParameter(format!(
            "no fixed case `{label}` for `{check}`"
        ))),
    }
}

/// FNV-1a, used to give each check its own random stream.
fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

fn instance_rng(check: &str, seed: u64, dim: usize) -> rand_chacha::ChaCha8Rng {
    seeded_rng(fnv1a(check) ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((dim as u64) << 48))
}

/// Random ensemble with `n` members, spectra in `[lo, hi]` and weights drawn
/// uniformly from `[0.2, 1]` before normalization.
pub fn random_ensemble<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<Ensemble> {
    let mats = (0..n)
        .map(|_| random_spd_with(m, lo, hi, rng))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(random_weights(rng, n)?, mats)
}

/// Like [`random_ensemble`], with all members diagonal in one shared unitary basis.
pub fn random_commuting_ensemble<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<Ensemble> {
    let u = random_unitary(m, rng);
    let mats = (0..n)
        .map(|_| random_spd_in_basis(&u, lo, hi, rng))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(random_weights(rng, n)?, mats)
}

pub fn random_weights<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Result<WeightVector> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..=1.0)).collect();
    WeightVector::normalized(&raw)
}

/// Positive semidefinite `VV*` scaled so that `‖VV*‖_F ≤ bound`.
fn random_psd_increment<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    bound: f64,
) -> Result<HermitianMatrix> {
    let v = random_ginibre(m, m, rng);
    let p = &v * v.adjoint();
    let scale = rng.random_range(0.1..=1.0) * bound / p.norm();
    HermitianMatrix::from_symmetrized(&(p * re(scale)))
}

/// Nonsingular `U diag(s) W` with singular values in `[lo, hi]`.
fn random_nonsingular<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    lo: f64,
    hi: f64,
) -> Result<ComplexMatrix> {
    let u = random_unitary(m, rng);
    let w = random_unitary(m, rng);
    let s = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| {
        re(rng.random_range(lo..=hi))
    }));
    ComplexMatrix::new(u * s * w)
}

pub fn random_geometric_inputs<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: usize,
) -> Result<GeometricMeanInputs> {
    let a = random_spd_with(m, 0.2, 5.0, rng)?;
    let b = random_spd_with(m, 0.2, 5.0, rng)?;
    let p = random_psd_increment(rng, m, a.frobenius_norm())?;
    let q = random_psd_increment(rng, m, b.frobenius_norm())?;
    let x = random_nonsingular(rng, m, 0.5, 2.0)?;
    const SCALARS: [f64; 3] = [0.5, 2.0, 3.0];
    let scalars = (
        SCALARS[rng.random_range(0..3)],
        SCALARS[rng.random_range(0..3)],
    );
    Ok(GeometricMeanInputs {
        a,
        b,
        p,
        q,
        x,
        scalars,
    })
}

fn seeded_instance(check: &str, seed: u64, m: usize, ctx: &CheckContext) -> Result<CheckReport> {
    let mut rng = instance_rng(check, seed, m);
    let rng = &mut rng;
    let n = rng.random_range(2..=3usize);
    match check {
        "geometric_mean_properties" => {
            check_geometric_mean_properties(&random_geometric_inputs(rng, m)?, ctx)
        }
        "fixed_point" => check_fixed_point(&random_ensemble(rng, m, n, 0.2, 5.0)?, ctx),
        "commuting_closed_form" => {
            check_commuting_closed_form(&random_commuting_ensemble(rng, m, n, 0.2, 5.0)?, ctx)
        }
        "det_inequality" => check_det_inequality(&random_ensemble(rng, m, n, 0.2, 5.0)?, ctx),
        "logdet_concavity" => check_logdet_concavity(&random_ensemble(rng, m, n, 0.2, 5.0)?, ctx),
        "bounds" => check_bounds(&random_ensemble(rng, m, n, 0.2, 5.0)?, ctx),
        "self_duality_gap" => check_self_duality_gap(&random_ensemble(rng, m, n, 0.2, 5.0)?, ctx),
        "phi_geometric_mean" => {
            let a = random_spd_with(m, 0.2, 5.0, rng)?;
            let b = random_spd_with(m, 0.2, 5.0, rng)?;
            let phi = random_isometry_map(m, rng.random_range(1..=m), rng.random())?;
            check_phi_geometric_mean(&a, &b, &phi, ctx)
        }
        "phi_wass" => {
            if seed % 3 == 2 && m * m <= MAX_TENSOR_DIM {
                let e = random_ensemble(rng, m * m, n, 0.2, 5.0)?;
                check_phi_wass(&e, &ando_map(m), ctx)
            } else {
                let e = random_ensemble(rng, m, n, 0.2, 5.0)?;
                let phi = random_isometry_map(m, m.div_ceil(2), rng.random())?;
                check_phi_wass(&e, &phi, ctx)
            }
        }
        "tensor_identity" => {
            let a = random_ensemble(rng, m, n, 0.5, 4.0)?;
            let n_b = rng.random_range(2..=3usize);
            let b = random_ensemble(rng, m, n_b, 0.5, 4.0)?;
            check_tensor_identity(&a, &b, ctx)
        }
        "tensor_arithmetic_bound" => {
            let a = random_ensemble(rng, m, n, 0.2, 5.0)?;
            let b = random_ensemble(rng, m, n, 0.2, 5.0)?;
            check_tensor_arithmetic_bound(&a, &b, ctx)
        }
        "hadamard_arithmetic_bound" => {
            let a = random_ensemble(rng, m, n, 0.2, 5.0)?;
            let b = random_ensemble(rng, m, n, 0.2, 5.0)?;
            check_hadamard_arithmetic_bound(&a, &b, ctx)
        }
        "commuting_quadruple" => {
            let e1 = random_commuting_ensemble(rng, m, 2, 0.5, 4.0)?;
            let e2 = random_commuting_ensemble(rng, m, 2, 0.5, 4.0)?;
            let (p, q) = (e1.matrices(), e2.matrices());
            check_commuting_quadruple(&p[0], &p[1], &q[0], &q[1], ctx)
        }
        "hadamard_inverse_bounds" => {
            let a = random_spd_with(m, 0.2, 5.0, rng)?;
            let b = random_spd_with(m, 0.2, 5.0, rng)?;
            check_hadamard_inverse_bounds(&a, &b, ctx)
        }
        "kantorovich_hadamard" => {
            let a = random_ensemble(rng, m, n, 0.5, 2.0)?;
            let b = random_ensemble(rng, m, n, 0.5, 2.0)?;
            check_kantorovich_hadamard(&a, &b, ctx)
        }
        "jensen_contraction" => {
            let a = random_spd_with(m, 0.2, 5.0, rng)?;
            let x = random_nonsingular(rng, m, 1.0, 2.0)?;
            let p = rng.random_range(0.0..=1.0);
            check_jensen_contraction(&a, &x, p, ctx)
        }
        "sqrt_sum_lower_bound" => {
            let a = random_ensemble(rng, m, n, 1.0, 3.0)?;
            let b = random_ensemble(rng, m, n, 1.0, 3.0)?;
            check_sqrt_sum_lower_bound(&a, &b, ctx)
        }
        other => Err(Error::InvalidParameter(format!("unknown check `{other}`"))),
    }
}
