//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 solver non-convergence (the report
//! is still written), 3 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::barycenter::{wasserstein_mean, IterationRule, SolverConfig, SolverInit};
use crate::bures_wasserstein::{bw_distance, geodesic};
use crate::error::{Error, Result};
use crate::hermitian::seeded_rng;
use crate::io::{self, to_pretty, MatrixJson, SolverReportJson};
use crate::report::{CheckReport, CheckStatus};
use crate::verify::{
    random_commuting_ensemble, random_ensemble, run_suite, suite_passes, SuitePlan,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wassmean",
    version,
    about = "Bures–Wasserstein means, distances and matrix-inequality checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wasserstein mean of an ensemble file.
    Mean {
        /// Ensemble JSON file.
        ensemble: PathBuf,
        /// Residual tolerance of the fixed-point solver.
        #[arg(long, default_value_t = SolverConfig::default().residual_tol, allow_negative_numbers = true)]
        tol: f64,
        /// Iteration cap; exit code 2 if reached without converging.
        #[arg(long, default_value_t = SolverConfig::default().max_iter)]
        max_iter: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bures–Wasserstein distance between two matrix files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Point at parameter t on the geodesic from A to B.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        /// Parameter in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded random ensemble.
    Generate {
        /// Matrix dimension.
        #[arg(long)]
        m: usize,
        /// Number of matrices.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smallest eigenvalue bound of each member.
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        eig_lo: f64,
        /// Largest eigenvalue bound of each member.
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        eig_hi: f64,
        /// Draw all members in one shared unitary basis so they commute.
        #[arg(long)]
        commuting: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the inequality and identity checks.
    Verify {
        /// JSON plan file; flags given alongside override its fields.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Comma-separated check names, `all` or `none`.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Half-open seed range `lo,hi`.
        #[arg(long, value_parser = parse_seed_range)]
        seeds: Option<[u64; 2]>,
        /// Comma-separated matrix dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Loewner-order tolerance.
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
        /// Iteration cap of the mean solver.
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_INPUT
        }
    }
}

fn parse_seed_range(s: &str) -> std::result::Result<[u64; 2], String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("`{x}`: {e}"));
    Ok([parse(lo)?, parse(hi)?])
}

fn emit(output: &OutputArgs, body: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::from(e).in_field(path.display().to_string())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::from(e).in_field(path.display().to_string()))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_field(path.display().to_string()))
}

#[derive(Serialize)]
struct SolverConfigJson {
    max_iter: usize,
    residual_tol: f64,
    init: &'static str,
    rule: &'static str,
}

#[derive(Serialize)]
struct MeanOutput {
    #[serde(flatten)]
    report: SolverReportJson,
    config: SolverConfigJson,
}

#[derive(Serialize)]
struct DistanceOutput {
    distance: f64,
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Mean {
            ensemble,
            tol,
            max_iter,
            output,
        } => {
            let e = with_path(&ensemble, io::parse_ensemble(&read(&ensemble)?))?;
            let cfg = SolverConfig {
                max_iter,
                residual_tol: tol,
                ..SolverConfig::default()
            };
            let r = wasserstein_mean(&e, &cfg).map_err(|e| e.in_field("solver"))?;
            let report = SolverReportJson::from(&r);
            let body = match output.format {
                Format::Json => to_pretty(&MeanOutput {
                    report,
                    config: SolverConfigJson {
                        max_iter,
                        residual_tol: tol,
                        init: match cfg.init {
                            SolverInit::ArithmeticMean => "arithmetic_mean",
                            SolverInit::Explicit(_) => "explicit",
                        },
                        rule: match cfg.rule {
                            IterationRule::Damped => "damped",
                            IterationRule::Naive => "naive",
                        },
                    },
                }),
                Format::Text => format!(
                    "converged: {}\niterations: {}\nresidual: {:e}\nobjective: {}\nmean:\n{}",
                    report.converged,
                    report.iterations,
                    report.residual,
                    report.objective,
                    matrix_text(&report.mean)
                ),
            };
            emit(&output, &body)?;
            Ok(if r.converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Distance { a, b, output } => {
            let ma = with_path(&a, io::parse_spd(&read(&a)?))?;
            let mb = with_path(&b, io::parse_spd(&read(&b)?))?;
            let distance = bw_distance(&ma, &mb)?;
            let body = match output.format {
                Format::Json => to_pretty(&DistanceOutput { distance }),
                Format::Text => format!("{distance}\n"),
            };
            emit(&output, &body)?;
            Ok(EXIT_OK)
        }
        Command::Geodesic { a, b, t, output } => {
            let ma = with_path(&a, io::parse_spd(&read(&a)?))?;
            let mb = with_path(&b, io::parse_spd(&read(&b)?))?;
            let g = geodesic(&ma, &mb, t).map_err(|e| e.in_field("t"))?;
            let json = MatrixJson::from_matrix(g.matrix());
            let body = match output.format {
                Format::Json => to_pretty(&json),
                Format::Text => matrix_text(&json),
            };
            emit(&output, &body)?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            m,
            n,
            seed,
            eig_lo,
            eig_hi,
            commuting,
            output,
        } => {
            if m == 0 {
                return Err(Error::InvalidParameter("must be positive".into()).in_field("m"));
            }
            if n == 0 {
                return Err(Error::InvalidParameter("must be positive".into()).in_field("n"));
            }
            if !(eig_lo > 0.0 && eig_lo <= eig_hi && eig_hi.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "need 0 < eig-lo <= eig-hi, got [{eig_lo}, {eig_hi}]"
                ))
                .in_field("eig-lo"));
            }
            let mut rng = seeded_rng(seed);
            let e = if commuting {
                random_commuting_ensemble(&mut rng, m, n, eig_lo, eig_hi)?
            } else {
                random_ensemble(&mut rng, m, n, eig_lo, eig_hi)?
            };
            emit(&output, &io::ensemble_to_json(&e))?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            plan,
            checks,
            seeds,
            dims,
            tol,
            max_iter,
            output,
        } => {
            let mut p = match &plan {
                Some(path) => with_path(
                    path,
                    serde_json::from_str::<SuitePlan>(&read(path)?).map_err(Error::from),
                )?,
                None => SuitePlan::default(),
            };
            if let Some(c) = checks {
                p.checks = if c.len() == 1 && c[0] == "none" {
                    Vec::new()
                } else {
                    c
                };
            }
            if let Some(s) = seeds {
                p.seeds = s;
            }
            if let Some(d) = dims {
                p.dims = d;
            }
            if tol.is_some() {
                p.tol = tol;
            }
            if max_iter.is_some() {
                p.max_iter = max_iter;
            }
            let reports = run_suite(&p)?;
            let body = match output.format {
                Format::Json => to_pretty(&reports),
                Format::Text => suite_text(&reports),
            };
            emit(&output, &body)?;
            Ok(if suite_passes(&reports) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn matrix_text(m: &MatrixJson) -> String {
    let mut s = String::new();
    for (i, row) in m.re.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, re)| {
                let im = m.im.as_ref().map_or(0.0, |im| im[i][j]);
                if im == 0.0 {
                    format!("{re:>12.6}")
                } else {
                    format!("{re:>12.6}{im:+.6}i")
                }
            })
            .collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

fn suite_text(reports: &[CheckReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let status = match r.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
            CheckStatus::Error => "ERROR",
        };
        let origin = match (&r.inputs.label, r.inputs.seed) {
            (Some(l), _) => l.clone(),
            (None, Some(seed)) => format!("seed {seed}"),
            _ => r.inputs.source.clone(),
        };
        let _ = write!(
            s,
            "{status:<5} {:<26} {origin:<28} dims {:?}",
            r.check_name, r.inputs.dims
        );
        if let Some(m) = r.margin {
            let _ = write!(s, " margin {m:.3e}");
        }
        if let Some(msg) = &r.message {
            let _ = write!(s, " ({msg})");
        }
        s.push('\n');
    }
    let failed = reports
        .iter()
        .filter(|r| !r.is_skipped() && !r.holds)
        .count();
    let skipped = reports.iter().filter(|r| r.is_skipped()).count();
    let _ = writeln!(
        s,
        "{} checks, {failed} failed, {skipped} skipped",
        reports.len()
    );
    s
}
