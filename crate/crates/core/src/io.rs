//! JSON interchange formats.
//!
//! Matrix: `{"dim": m, "re": [[...]], "im": [[...]]}` with `im` optional,
//! row-major. Ensemble: `{"weights": [...], "matrices": [<matrix>, ...]}`.
//! Positive map: `{"kind": "isometry", "v_re": [[...]], "v_im": [[...]]}` or
//! `{"kind": "ando", "m": m}`.

use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::barycenter::{Ensemble, SolverReport};
use crate::error::{Error, Result};
use crate::hermitian::{CMat, ComplexMatrix, HermitianMatrix, SpdMatrix};
use crate::means::WeightVector;
use crate::products::{ando_map, PositiveMapKind, PositiveMapSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

fn check_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, field: &str) -> Result<()> {
    if rows.len() != nrows {
        return Err(
            Error::InvalidShape(format!("expected {nrows} rows, found {}", rows.len()))
                .in_field(field),
        );
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::InvalidShape(format!(
                "expected {ncols} entries, found {}",
                row.len()
            ))
            .in_field(format!("{field}[{i}]")));
        }
    }
    Ok(())
}

fn assemble(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>, nrows: usize, ncols: usize) -> CMat {
    CMat::from_fn(nrows, ncols, |i, j| {
        Complex::new(re[i][j], im.map_or(0.0, |m| m[i][j]))
    })
}

fn split(m: &CMat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let im = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
        .collect();
    (re, im)
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let (re, im) = split(m);
        Self {
            dim: m.nrows(),
            re,
            im: Some(im),
        }
    }

    fn to_matrix(&self) -> Result<CMat> {
        if self.dim == 0 {
            return Err(Error::InvalidShape("dim must be positive".into()).in_field("dim"));
        }
        check_rows(&self.re, self.dim, self.dim, "re")?;
        if let Some(im) = &self.im {
            check_rows(im, self.dim, self.dim, "im")?;
        }
        Ok(assemble(&self.re, self.im.as_ref(), self.dim, self.dim))
    }

    /// Validates Hermitian symmetry to 1e-12 and symmetrizes.
    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }

    pub fn to_spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.to_hermitian()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub weights: Vec<f64>,
    pub matrices: Vec<MatrixJson>,
}

impl EnsembleJson {
    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            weights: e.weights().as_slice().to_vec(),
            matrices: e
                .matrices()
                .iter()
                .map(|a| MatrixJson::from_matrix(a.matrix()))
                .collect(),
        }
    }

    /// Validates every field, naming the offending one on failure.
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let weights = WeightVector::new(self.weights.clone()).map_err(|e| e.in_field("weights"))?;
        let matrices = self
            .matrices
            .iter()
            .enumerate()
            .map(|(j, m)| m.to_spd().map_err(|e| e.in_field(format!("matrices[{j}]"))))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(weights, matrices)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReportJson {
    pub iterations: usize,
    pub residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub mean: MatrixJson,
}

impl From<&SolverReport> for SolverReportJson {
    fn from(r: &SolverReport) -> Self {
        Self {
            iterations: r.iterations,
            residual: r.residual,
            objective: r.objective,
            converged: r.converged,
            mean: MatrixJson::from_matrix(r.mean.matrix()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PositiveMapJson {
    Isometry {
        v_re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_im: Option<Vec<Vec<f64>>>,
    },
    Ando {
        m: usize,
    },
}

impl PositiveMapJson {
    pub fn from_spec(phi: &PositiveMapSpec) -> Self {
        match phi.kind() {
            PositiveMapKind::AndoDiagonal => Self::Ando {
                m: phi.target_dim(),
            },
            PositiveMapKind::IsometryCompression => {
                let (v_re, v_im) = split(phi.isometry_matrix());
                Self::Isometry {
                    v_re,
                    v_im: Some(v_im),
                }
            }
        }
    }

    pub fn to_spec(&self) -> Result<PositiveMapSpec> {
        match self {
            Self::Ando { m } => {
                if *m == 0 {
                    return Err(Error::InvalidParameter("m must be positive".into()).in_field("m"));
                }
                Ok(ando_map(*m))
            }
            Self::Isometry { v_re, v_im } => {
                let rows = v_re.len();
                let cols = v_re.first().map_or(0, Vec::len);
                if rows == 0 || cols == 0 {
                    return Err(Error::InvalidShape("isometry is empty".into()).in_field("v_re"));
                }
                check_rows(v_re, rows, cols, "v_re")?;
                if let Some(im) = v_im {
                    check_rows(im, rows, cols, "v_im")?;
                }
                PositiveMapSpec::isometry(ComplexMatrix::new(assemble(
                    v_re,
                    v_im.as_ref(),
                    rows,
                    cols,
                ))?)
            }
        }
    }
}

pub fn parse_spd(text: &str) -> Result<SpdMatrix> {
    serde_json::from_str::<MatrixJson>(text)?.to_spd()
}

pub fn parse_hermitian(text: &str) -> Result<HermitianMatrix> {
    serde_json::from_str::<MatrixJson>(text)?.to_hermitian()
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    serde_json::from_str::<EnsembleJson>(text)?.to_ensemble()
}

pub fn parse_positive_map(text: &str) -> Result<PositiveMapSpec> {
    serde_json::from_str::<PositiveMapJson>(text)?.to_spec()
}

pub fn read_spd(path: &Path) -> Result<SpdMatrix> {
    parse_spd(&std::fs::read_to_string(path)?)
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    parse_ensemble(&std::fs::read_to_string(path)?)
}

pub fn matrix_to_json(m: &CMat) -> String {
    to_pretty(&MatrixJson::from_matrix(m))
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    to_pretty(&EnsembleJson::from_ensemble(e))
}

pub fn positive_map_to_json(phi: &PositiveMapSpec) -> String {
    to_pretty(&PositiveMapJson::from_spec(phi))
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
