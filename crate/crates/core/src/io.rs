//! JSON file formats.
//!
//! Matrices: `{"dimA", "dimB", "rows", "cols", "data": [[re, im], ...]}` in
//! row-major order with every number printed with 17 significant digits, plus
//! an optional `metadata` object. Pure states use the same layout without
//! `rows`/`cols`. Certificates:
//! `{route, copies, value, psi, schmidt_rank, seed, restarts}`.

use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{
    matrix_from_rows, BipartiteDims, BipartiteState, CMatrix, CVector, PureState, C64,
};
use crate::witness::{Route, WitnessCertificate};

/// An f64 rendered with 17 significant digits (`{:.16e}`), enough to round-trip.
#[derive(Debug, Clone, Copy)]
pub struct Digits17(pub f64);

impl Serialize for Digits17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(
                "non-finite number in matrix data",
            ));
        }
        RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

fn complex_data<'a>(it: impl Iterator<Item = &'a C64>) -> Vec<[Digits17; 2]> {
    it.map(|z| [Digits17(z.re), Digits17(z.im)]).collect()
}

#[derive(Serialize)]
struct MatrixOut<'a> {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    rows: usize,
    cols: usize,
    data: Vec<[Digits17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<&'a Value>,
}

#[derive(Deserialize)]
struct MatrixIn {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
    #[serde(default)]
    metadata: Option<Value>,
}

#[derive(Serialize, Deserialize)]
struct VectorIo<D> {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    data: Vec<D>,
}

/// A matrix as read from disk.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub matrix: CMatrix,
    pub dims: BipartiteDims,
    pub metadata: Option<Value>,
}

impl MatrixFile {
    pub fn into_state(self, cfg: &ToleranceConfig) -> Result<BipartiteState> {
        BipartiteState::new(self.matrix, self.dims, cfg)
    }
}

pub fn matrix_to_json(
    m: &CMatrix,
    dims: BipartiteDims,
    metadata: Option<&Value>,
) -> Result<String> {
    dims.check_square(m)?;
    let row_major: Vec<C64> = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)])
        .collect();
    let out = MatrixOut {
        dim_a: dims.dim_a,
        dim_b: dims.dim_b,
        rows: m.nrows(),
        cols: m.ncols(),
        data: complex_data(row_major.iter()),
        metadata,
    };
    Ok(serde_json::to_string(&out)?)
}

pub fn state_to_json(rho: &BipartiteState, metadata: Option<&Value>) -> Result<String> {
    matrix_to_json(rho.matrix(), rho.dims(), metadata)
}

pub fn matrix_from_json(s: &str) -> Result<MatrixFile> {
    let m: MatrixIn = serde_json::from_str(s)?;
    let dims = BipartiteDims::new(m.dim_a, m.dim_b)?;
    if m.rows != dims.total() || m.cols != dims.total() {
        return Err(DistillError::DimensionMismatch(format!(
            "rows/cols ({}, {}) do not match dimA*dimB = {}",
            m.rows,
            m.cols,
            dims.total()
        )));
    }
    let data: Vec<C64> = m.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
    Ok(MatrixFile {
        matrix: matrix_from_rows(m.rows, m.cols, &data)?,
        dims,
        metadata: m.metadata,
    })
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixFile> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_state_file(path: &Path, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    read_matrix_file(path)?.into_state(cfg)
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorIo {
            dim_a: self.dims().dim_a,
            dim_b: self.dims().dim_b,
            data: complex_data(self.vector().iter()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = VectorIo::<[f64; 2]>::deserialize(d)?;
        let dims = BipartiteDims::new(v.dim_a, v.dim_b).map_err(D::Error::custom)?;
        let vec = CVector::from_iterator(
            v.data.len(),
            v.data.iter().map(|&[re, im]| C64::new(re, im)),
        );
        PureState::new(vec, dims).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateIo {
    route: Route,
    copies: usize,
    value: f64,
    psi: PureState,
    schmidt_rank: usize,
    seed: Option<u64>,
    restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perturbation: Option<f64>,
}

impl Serialize for WitnessCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateIo {
            route: self.route,
            copies: self.copies,
            value: self.value,
            psi: self.psi.clone(),
            schmidt_rank: self.schmidt_rank,
            seed: self.seed,
            restarts: self.restarts,
            perturbation: self.perturbation,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WitnessCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = CertificateIo::deserialize(d)?;
        Ok(WitnessCertificate {
            psi: c.psi,
            value: c.value,
            copies: c.copies,
            route: c.route,
            schmidt_rank: c.schmidt_rank,
            seed: c.seed,
            restarts: c.restarts,
            perturbation: c.perturbation,
        })
    }
}
