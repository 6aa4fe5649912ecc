//! Acceptance criteria, one pass/fail line each. Exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Complex;
use wassmean::barycenter::{check_det_inequality, wasserstein_mean, Ensemble, SolverConfig};
use wassmean::bures_wasserstein::{bw_distance, geodesic};
use wassmean::hermitian::{random_spd, seeded_rng, SpdMatrix, ToleranceConfig};
use wassmean::io::parse_ensemble;
use wassmean::means::{geometric_mean, WeightVector};
use wassmean::products::{ensemble_tensor, kron_spd};
use wassmean::report::CheckStatus;
use wassmean::verify::{
    self, check_geometric_mean_properties, check_tensor_identity, random_commuting_ensemble,
    random_ensemble, random_geometric_inputs, run_suite, CheckContext, SuitePlan, CHECK_NAMES,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn raw(e: &Ensemble) -> (Vec<f64>, Vec<common::CMat>) {
    (
        e.weights().as_slice().to_vec(),
        e.matrices().iter().map(|a| a.matrix().clone()).collect(),
    )
}

const DIMS: [usize; 3] = [2, 3, 5];
const SIZES: [usize; 3] = [2, 3, 5];

fn fixed_point_certificate() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let (mut worst, mut worst_oracle, mut max_iter) = (0.0f64, 0.0f64, 0);
    for k in 0..200u64 {
        let m = DIMS[(k % 3) as usize];
        let n = SIZES[((k / 3) % 3) as usize];
        let e = random_ensemble(&mut seeded_rng(10_000 + k), m, n, 0.2, 5.0).unwrap();
        let r = wasserstein_mean(&e, &cfg).unwrap();
        ensure(r.converged && r.iterations <= 200, || {
            format!(
                "ensemble {k} (m={m}, n={n}) did not converge: residual {:e}",
                r.residual
            )
        })?;
        let (w, mats) = raw(&e);
        let oracle = common::wass_residual(r.mean.matrix(), &w, &mats);
        ensure(r.residual <= 1e-10 && oracle <= 1e-10, || {
            format!(
                "ensemble {k}: residual {:e}, oracle residual {oracle:e}",
                r.residual
            )
        })?;
        worst = worst.max(r.residual);
        worst_oracle = worst_oracle.max(oracle);
        max_iter = max_iter.max(r.iterations);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "200 ensembles, max residual {worst:.1e} (oracle {worst_oracle:.1e}), max {max_iter} iterations, {elapsed:.1?}"
    ))
}

fn commuting_closed_form() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let m = DIMS[(k % 3) as usize];
        let n = SIZES[((k / 3) % 3) as usize];
        let e = random_commuting_ensemble(&mut seeded_rng(20_000 + k), m, n, 0.2, 5.0).unwrap();
        let r = wasserstein_mean(&e, &cfg).unwrap();
        let (w, mats) = raw(&e);
        let s = w
            .iter()
            .zip(&mats)
            .fold(common::CMat::zeros(m, m), |acc, (w, a)| {
                acc + common::db_sqrt(a) * Complex::new(*w, 0.0)
            });
        let err = (r.mean.matrix() - &s * &s).norm();
        ensure(r.converged && err <= 1e-8, || {
            format!("ensemble {k}: error {err:e}")
        })?;
        worst = worst.max(err);
    }
    let two_point = Ensemble::uniform(vec![
        SpdMatrix::identity(2),
        SpdMatrix::scaled_identity(2, 4.0),
    ])
    .unwrap();
    let r = wasserstein_mean(&two_point, &cfg).unwrap();
    let exact = common::eye(2) * Complex::new(2.25, 0.0);
    let err = (r.mean.matrix() - exact).norm();
    ensure(err <= 1e-12, || {
        format!("two-point mean off (9/4)I by {err:e}")
    })?;
    Ok(format!(
        "100 commuting ensembles, max error {worst:.1e}; (I, 4I) gives (9/4)I within {err:.1e}"
    ))
}

fn geometric_mean_properties() -> Outcome {
    let ctx = CheckContext::default();
    let mut passes = [0usize; 8];
    let mut count = 0;
    let half = WeightVector::uniform(2).unwrap();
    for m in DIMS {
        for seed in 0..100u64 {
            let inp = random_geometric_inputs(&mut seeded_rng(30_000 + seed + 1000 * m as u64), m)
                .unwrap();
            let r = check_geometric_mean_properties(&inp, &ctx).unwrap();
            for (slot, c) in passes.iter_mut().zip(&r.details) {
                *slot += usize::from(c.holds);
            }
            count += 1;
            // Oracles: Riccati characterization and Cholesky-decided sandwich.
            let g = geometric_mean(&inp.a, &inp.b).unwrap();
            let d = common::riccati_defect(g.matrix(), inp.a.matrix(), inp.b.matrix());
            ensure(d <= 1e-9, || {
                format!("m={m} seed={seed}: Riccati defect {d:e}")
            })?;
            let harmonic = common::inv(
                &((common::inv(inp.a.matrix()) + common::inv(inp.b.matrix()))
                    * Complex::new(0.5, 0.0)),
            );
            let arith =
                wassmean::means::arithmetic_mean(&half, &[inp.a.clone(), inp.b.clone()]).unwrap();
            ensure(
                common::loewner_oracle(&harmonic, g.matrix(), 1e-9)
                    && common::loewner_oracle(g.matrix(), arith.matrix(), 1e-9),
                || format!("m={m} seed={seed}: sandwich fails the Cholesky oracle"),
            )?;
        }
    }
    ensure(passes.iter().all(|&p| p == count), || {
        format!("per-property passes {passes:?} of {count}")
    })?;
    Ok(format!(
        "all seven properties hold on {count} instances (m in 2, 3, 5)"
    ))
}

fn determinantal_inequality() -> Outcome {
    let tol = ToleranceConfig::default();
    let cfg = SolverConfig::default();
    let mut min_gap = f64::INFINITY;
    for k in 0..200u64 {
        let m = DIMS[(k % 3) as usize];
        let n = SIZES[((k / 3) % 3) as usize];
        let e = random_ensemble(&mut seeded_rng(40_000 + k), m, n, 0.2, 5.0).unwrap();
        let x = wasserstein_mean(&e, &cfg).unwrap().mean;
        let r = check_det_inequality(&e, &x, &tol).unwrap();
        let gap = r.margin.unwrap();
        let (w, mats) = raw(&e);
        let oracle = common::log_det(x.matrix())
            - w.iter()
                .zip(&mats)
                .map(|(w, a)| w * common::log_det(a))
                .sum::<f64>();
        ensure(
            gap > 0.0 && oracle > 0.0 && r.equality == Some(false),
            || format!("ensemble {k}: gap {gap:e}, oracle gap {oracle:e}"),
        )?;
        min_gap = min_gap.min(gap);
    }
    let mut worst_eq = 0.0f64;
    for k in 0..30u64 {
        let m = DIMS[(k % 3) as usize];
        let a = random_spd(m, 41_000 + k, 0.2, 5.0).unwrap();
        let n = 2 + (k % 3) as usize;
        let raw_w: Vec<f64> = (1..=n).map(|j| j as f64).collect();
        let e = Ensemble::new(WeightVector::normalized(&raw_w).unwrap(), vec![a; n]).unwrap();
        let x = wasserstein_mean(&e, &cfg).unwrap().mean;
        let r = check_det_inequality(&e, &x, &tol).unwrap();
        let gap = r.margin.unwrap();
        ensure(gap.abs() <= 1e-9 && r.equality == Some(true), || {
            format!(
                "identical ensemble {k}: gap {gap:e}, equality {:?}",
                r.equality
            )
        })?;
        worst_eq = worst_eq.max(gap.abs());
    }
    Ok(format!(
        "200 distinct ensembles with min gap {min_gap:.2e}; 30 identical ensembles flagged equal, |gap| <= {worst_eq:.1e}"
    ))
}

fn bounds() -> Outcome {
    let ctx = CheckContext::default();
    let mut worst = f64::INFINITY;
    for k in 0..200u64 {
        let m = DIMS[(k % 3) as usize];
        let n = SIZES[((k / 3) % 3) as usize];
        let e = random_ensemble(&mut seeded_rng(50_000 + k), m, n, 0.2, 5.0).unwrap();
        let r = verify::check_bounds(&e, &ctx).unwrap();
        let margin = r.margin.unwrap_or(f64::NEG_INFINITY);
        ensure(r.holds && margin >= -1e-8, || {
            format!("ensemble {k}: margin {margin:e}")
        })?;
        // Same verdicts from the Cholesky oracle on the raw matrices.
        let x = wasserstein_mean(&e, &SolverConfig::default()).unwrap().mean;
        let (w, mats) = raw(&e);
        let mut sum = common::CMat::zeros(m, m);
        let mut sum_inv = common::CMat::zeros(m, m);
        for (w, a) in w.iter().zip(&mats) {
            sum += a * Complex::new(*w, 0.0);
            sum_inv += common::inv(a) * Complex::new(*w, 0.0);
        }
        let lower = common::eye(m) * Complex::new(2.0, 0.0) - sum_inv;
        ensure(
            common::loewner_oracle(&lower, x.matrix(), 1e-8)
                && common::loewner_oracle(x.matrix(), &sum, 1e-8),
            || format!("ensemble {k}: Cholesky oracle rejects a bound"),
        )?;
        worst = worst.min(margin);
    }
    Ok(format!("200 ensembles, smallest margin {worst:.2e}"))
}

fn tensor_identity() -> Outcome {
    let start = Instant::now();
    let ctx = CheckContext::default();
    let mut worst = 0.0f64;
    for k in 0..25u64 {
        let mut rng = seeded_rng(60_000 + k);
        let n_a = 1 + (k % 3) as usize;
        let n_b = 1 + ((k / 3) % 3) as usize;
        let a = random_ensemble(&mut rng, 2, n_a, 0.3, 4.0).unwrap();
        let b = random_ensemble(&mut rng, 2, n_b, 0.3, 4.0).unwrap();
        let r = check_tensor_identity(&a, &b, &ctx).unwrap();
        let err = -r.margin.unwrap_or(f64::NEG_INFINITY);
        ensure(r.holds && err <= 1e-6, || {
            format!("instance {k}: relative error {err:e}")
        })?;
        // Certificate: X ⊗ Y solves the mean equation of the tensor ensemble.
        let cfg = SolverConfig::default();
        let x = wasserstein_mean(&a, &cfg).unwrap().mean;
        let y = wasserstein_mean(&b, &cfg).unwrap().mean;
        let xy = kron_spd(&x, &y).unwrap();
        let (w, mats) = raw(&ensemble_tensor(&a, &b).unwrap());
        let oracle = common::wass_residual(xy.matrix(), &w, &mats);
        ensure(oracle <= 1e-9, || {
            format!("instance {k}: X⊗Y oracle residual {oracle:e}")
        })?;
        worst = worst.max(err);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "25 instances (m = s = 2, n <= 3), max relative error {worst:.1e}, {elapsed:.1?}"
    ))
}

fn verification_suite() -> Outcome {
    let reports = run_suite(&SuitePlan::default()).map_err(|e| e.to_string())?;
    let mut equality_cases = 0;
    for r in &reports {
        if r.status == CheckStatus::Skipped {
            continue;
        }
        let margin = r.margin.unwrap_or(f64::NEG_INFINITY);
        ensure(r.holds && margin >= -1e-8, || {
            format!(
                "{} ({:?}, seed {:?}) failed: margin {margin:e}, {:?}",
                r.check_name, r.inputs.label, r.inputs.seed, r.message
            )
        })?;
        if r.inputs
            .label
            .as_deref()
            .is_some_and(|l| l.starts_with("equality:"))
        {
            ensure(margin.abs() <= 1e-9, || {
                format!("{} equality case has margin {margin:e}", r.check_name)
            })?;
            equality_cases += 1;
        }
    }
    for name in CHECK_NAMES {
        ensure(
            reports.iter().any(|r| r.check_name == *name && r.holds),
            || format!("no passing instance of {name}"),
        )?;
    }
    let gaps: Vec<f64> = reports
        .iter()
        .filter(|r| r.check_name == "self_duality_gap")
        .map(|r| r.values["gap"])
        .collect();
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(!gaps.is_empty() && min_gap > 1e-4, || {
        format!("self-duality gap {min_gap:e}")
    })?;
    Ok(format!(
        "{} reports over {} checks pass, {equality_cases} equality cases within 1e-9, self-duality gap >= {min_gap:.2e}",
        reports.len(),
        CHECK_NAMES.len()
    ))
}

fn metric_sanity() -> Outcome {
    let (mut worst_sym, mut worst_tri) = (0.0f64, f64::INFINITY);
    for k in 0..200u64 {
        let m = 2 + (k % 3) as usize;
        let a = random_spd(m, 70_000 + 3 * k, 0.1, 8.0).unwrap();
        let b = random_spd(m, 70_001 + 3 * k, 0.1, 8.0).unwrap();
        let c = random_spd(m, 70_002 + 3 * k, 0.1, 8.0).unwrap();
        let ab = bw_distance(&a, &b).unwrap();
        let ba = bw_distance(&b, &a).unwrap();
        let bc = bw_distance(&b, &c).unwrap();
        let ac = bw_distance(&a, &c).unwrap();
        let oracle = common::bw_distance(a.matrix(), b.matrix());
        ensure(
            (ab - ba).abs() <= 1e-10 && (ab - oracle).abs() <= 1e-9,
            || format!("triple {k}: d(A,B) {ab}, d(B,A) {ba}, oracle {oracle}"),
        )?;
        let slack = ab + bc - ac;
        ensure(slack >= -1e-8, || {
            format!("triple {k}: triangle slack {slack:e}")
        })?;
        worst_sym = worst_sym.max((ab - ba).abs());
        worst_tri = worst_tri.min(slack);
    }
    let mut worst_speed = 0.0f64;
    for k in 0..50u64 {
        let a = random_spd(3, 71_000 + k, 0.1, 8.0).unwrap();
        let b = random_spd(3, 72_000 + k, 0.1, 8.0).unwrap();
        ensure(
            geodesic(&a, &b, 0.0).unwrap().matrix() == a.matrix()
                && geodesic(&a, &b, 1.0).unwrap().matrix() == b.matrix(),
            || format!("pair {k}: geodesic endpoints are not exact"),
        )?;
        let d = bw_distance(&a, &b).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let err = (bw_distance(&a, &geodesic(&a, &b, t).unwrap()).unwrap() - t * d).abs();
            ensure(err <= 1e-7, || {
                format!("pair {k}, t = {t}: speed error {err:e}")
            })?;
            worst_speed = worst_speed.max(err);
        }
    }
    Ok(format!(
        "200 triples: asymmetry <= {worst_sym:.1e}, triangle slack >= {worst_tri:.2e}; 50 geodesics: speed error <= {worst_speed:.1e}"
    ))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wassmean"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn cli_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let plan = fixture("plan_small.json");
    let mut rounds = Vec::new();
    for round in 0..2 {
        let p = |name: &str| {
            dir.path()
                .join(format!("{name}{round}.json"))
                .to_string_lossy()
                .into_owned()
        };
        let (ens, mean, report) = (p("ensemble"), p("mean"), p("verify"));
        for args in [
            vec![
                "generate", "--m", "3", "--n", "4", "--seed", "5", "--out", &ens,
            ],
            vec!["mean", &ens, "--out", &mean],
            vec!["verify", "--plan", plan.to_str().unwrap(), "--out", &report],
        ] {
            let o = cli(&args);
            ensure(o.status.code() == Some(0), || {
                format!(
                    "{args:?} exited {:?}: {}",
                    o.status.code(),
                    String::from_utf8_lossy(&o.stderr)
                )
            })?;
        }
        parse_ensemble(&std::fs::read_to_string(&ens).unwrap()).map_err(|e| e.to_string())?;
        rounds.push([ens, mean, report].map(|p| std::fs::read(p).unwrap()));
    }
    ensure(rounds[0] == rounds[1], || {
        "pipeline outputs differ between runs".into()
    })?;

    let cases = [
        (
            "bad_weights.json",
            "weights: invalid weights: weights sum to 0.98",
        ),
        (
            "bad_non_hermitian.json",
            "matrices[1]: matrix is not Hermitian",
        ),
        (
            "bad_not_positive.json",
            "matrices[0]: matrix is not positive definite",
        ),
        ("bad_shape.json", "matrices[0]: re[1]"),
        ("bad_malformed.json", "line 5 column"),
    ];
    for (file, needle) in cases {
        let o = cli(&["mean", fixture(file).to_str().unwrap()]);
        let err = String::from_utf8_lossy(&o.stderr);
        ensure(o.status.code() == Some(1) && err.contains(needle), || {
            format!("{file}: exit {:?}, stderr {err:?}", o.status.code())
        })?;
    }
    Ok(format!("generate -> mean -> verify byte-identical across runs; {} corrupted inputs exit 1 naming the field", cases.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("fixed-point certificate", fixed_point_certificate),
        ("commuting closed form", commuting_closed_form),
        ("geometric-mean properties", geometric_mean_properties),
        ("determinantal inequality", determinantal_inequality),
        ("mean bounds", bounds),
        ("tensor identity", tensor_identity),
        ("verification suite", verification_suite),
        ("metric sanity", metric_sanity),
        ("CLI round trip", cli_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
