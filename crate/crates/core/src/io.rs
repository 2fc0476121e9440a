//! JSON interchange: `{"n", "dim", "A": [[…]], "T": [matrix, …]}` where a
//! matrix is a list of rows and each entry is a `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tuples::OperatorTuple;
use crate::words::TransitionMatrix;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::input("ragged matrix rows"));
    }
    Ok(CMat::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Optional settings carried inside an input file; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawBundle {
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(rename = "A")]
    a: Vec<Vec<u8>>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    t: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<BundleOptions>,
}

/// A validated input: transition matrix, optional tuple, optional settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub a: TransitionMatrix,
    pub tuple: Option<OperatorTuple>,
    pub options: BundleOptions,
}

impl Bundle {
    pub fn new(a: TransitionMatrix, tuple: Option<OperatorTuple>) -> Self {
        Bundle { a, tuple, options: BundleOptions::default() }
    }

    pub fn require_tuple(&self) -> Result<&OperatorTuple> {
        self.tuple.as_ref().ok_or_else(|| Error::input("input has no tuple `T`"))
    }

    fn from_raw(raw: RawBundle) -> Result<Self> {
        let a = TransitionMatrix::new(raw.a)?;
        if let Some(n) = raw.n {
            if n != a.n() {
                return Err(Error::input(format!("`n` is {n} but `A` is {}×{}", a.n(), a.n())));
            }
        }
        let tuple = match raw.t {
            None => None,
            Some(mats) => {
                if mats.len() != a.n() {
                    return Err(Error::input(format!("`T` has {} matrices, expected {}", mats.len(), a.n())));
                }
                let mats = mats.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                let t = OperatorTuple::new(mats)?;
                if let Some(d) = raw.dim {
                    if d != t.dim() {
                        return Err(Error::input(format!("`dim` is {d} but matrices are {}×{}", t.dim(), t.dim())));
                    }
                }
                Some(t)
            }
        };
        Ok(Bundle { a, tuple, options: raw.options.unwrap_or_default() })
    }

    /// Parses a bundle, or the `artifacts.dilation` bundle of an emitted report.
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let inner = match value.get("artifacts").and_then(|a| a.get("dilation")) {
            Some(d) => d.clone(),
            None => value,
        };
        Self::from_raw(serde_json::from_value(inner)?)
    }

    pub fn to_value(&self) -> Value {
        let raw = RawBundle {
            n: Some(self.a.n()),
            dim: self.tuple.as_ref().map(OperatorTuple::dim),
            a: self.a.rows(),
            t: self.tuple.as_ref().map(|t| t.mats().iter().map(matrix_to_json).collect()),
            options: None,
        };
        serde_json::to_value(raw).expect("bundle serializes")
    }
}
