//! JSON interchange formats.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same `f64`, so write → read → write reproduces identical bytes. Every
//! reader validates shape and rejects missing, duplicate or out-of-range
//! entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::disk::BoundarySamples;
use crate::error::{Error, Result};
use crate::forward::{fourier_indices, DataMatrix, DiagonalData};
use crate::inversion::{Method, RegularizedSolution};
use crate::zernike::{angular_range, ZernikeCoefficients, ZernikeIndex};

/// Types with a fixed JSON file format.
pub trait JsonFormat: Sized {
    fn to_json(&self) -> Result<String>;

    fn from_json(text: &str) -> Result<Self>;

    fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn encode<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    Ok(text)
}

fn decode<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Format(format!("non-finite value in {what}")))
    }
}

fn pair(z: Complex64, what: &str) -> Result<[f64; 2]> {
    Ok([finite(z.re, what)?, finite(z.im, what)?])
}

fn pairs(values: &[Complex64], what: &str) -> Result<Vec<[f64; 2]>> {
    values.iter().map(|&z| pair(z, what)).collect()
}

fn complexes(values: &[[f64; 2]]) -> Vec<Complex64> {
    values.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn check_order(order: usize) -> Result<usize> {
    if order == 0 {
        Err(Error::ZeroOrder)
    } else {
        Ok(order)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffEntry {
    j: i32,
    k: u32,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffFile {
    #[serde(rename = "M")]
    order: usize,
    coeffs: Vec<CoeffEntry>,
}

fn coeff_file(coeffs: &ZernikeCoefficients) -> Result<CoeffFile> {
    let entries = coeffs
        .iter()
        .map(|(idx, c)| {
            let [re, im] = pair(c, "coefficients")?;
            Ok(CoeffEntry {
                j: idx.j,
                k: idx.k,
                re,
                im,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CoeffFile {
        order: coeffs.order(),
        coeffs: entries,
    })
}

fn coeffs_from_file(file: CoeffFile) -> Result<ZernikeCoefficients> {
    let order = check_order(file.order)?;
    if file.coeffs.len() != order * order {
        return Err(Error::Format(format!(
            "expected {} coefficients for M = {order}, found {}",
            order * order,
            file.coeffs.len()
        )));
    }
    let mut out = ZernikeCoefficients::zeros(order)?;
    let mut seen = vec![false; order * order];
    // offset of block j in a flat M^2 layout
    let offsets: BTreeMap<i32, usize> = angular_range(order)
        .scan(0usize, |acc, j| {
            let start = *acc;
            *acc += order - j.unsigned_abs() as usize;
            Some((j, start))
        })
        .collect();
    for e in file.coeffs {
        let idx = ZernikeIndex::new(e.j, e.k);
        if !out.contains(idx) {
            return Err(Error::Format(format!(
                "coefficient (j = {}, k = {}) outside the M = {order} index set",
                e.j, e.k
            )));
        }
        let flat = offsets[&e.j] + e.k as usize;
        if std::mem::replace(&mut seen[flat], true) {
            return Err(Error::Format(format!("duplicate coefficient (j = {}, k = {})", e.j, e.k)));
        }
        out.set(idx, Complex64::new(e.re, e.im))?;
    }
    Ok(out)
}

impl JsonFormat for ZernikeCoefficients {
    fn to_json(&self) -> Result<String> {
        encode(&coeff_file(self)?)
    }

    fn from_json(text: &str) -> Result<Self> {
        coeffs_from_file(decode(text)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    #[serde(rename = "M")]
    order: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

impl JsonFormat for DataMatrix {
    fn to_json(&self) -> Result<String> {
        let rows = self
            .rows()
            .map(|row| pairs(row, "data matrix"))
            .collect::<Result<_>>()?;
        encode(&MatrixFile {
            order: self.order(),
            rows,
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = decode(text)?;
        let order = check_order(file.order)?;
        let rows = file.rows.iter().map(|r| complexes(r)).collect();
        DataMatrix::from_rows(order, rows)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalFile {
    #[serde(rename = "M")]
    order: usize,
    diagonals: BTreeMap<i32, Vec<[f64; 2]>>,
}

impl JsonFormat for DiagonalData {
    fn to_json(&self) -> Result<String> {
        let diagonals = self
            .iter()
            .map(|(j, v)| Ok((j, pairs(v, "diagonal data")?)))
            .collect::<Result<_>>()?;
        encode(&DiagonalFile {
            order: self.order(),
            diagonals,
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let mut file: DiagonalFile = decode(text)?;
        let order = check_order(file.order)?;
        let vectors = angular_range(order)
            .map(|j| {
                file.diagonals
                    .remove(&j)
                    .map(|v| complexes(&v))
                    .ok_or_else(|| Error::Format(format!("diagonal j = {j} missing")))
            })
            .collect::<Result<_>>()?;
        if let Some(j) = file.diagonals.keys().next() {
            return Err(Error::Format(format!("diagonal j = {j} outside the M = {order} range")));
        }
        DiagonalData::from_vectors(order, vectors)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplesFile {
    #[serde(rename = "M")]
    order: usize,
    #[serde(rename = "N")]
    half_nodes: usize,
    samples: BTreeMap<i32, Vec<[f64; 2]>>,
}

impl JsonFormat for BoundarySamples {
    fn to_json(&self) -> Result<String> {
        let samples = self
            .iter()
            .map(|(m, g)| Ok((m, pairs(g, "boundary samples")?)))
            .collect::<Result<_>>()?;
        encode(&SamplesFile {
            order: self.order(),
            half_nodes: self.half_nodes(),
            samples,
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let mut file: SamplesFile = decode(text)?;
        let order = check_order(file.order)?;
        let samples = fourier_indices(order)
            .into_iter()
            .map(|m| {
                file.samples
                    .remove(&m)
                    .map(|v| complexes(&v))
                    .ok_or_else(|| Error::Format(format!("samples for m = {m} missing")))
            })
            .collect::<Result<_>>()?;
        if let Some(m) = file.samples.keys().next() {
            return Err(Error::Format(format!("samples for m = {m} outside the M = {order} range")));
        }
        BoundarySamples::new(order, file.half_nodes, samples)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    #[serde(rename = "M")]
    order: usize,
    coeffs: Vec<CoeffEntry>,
    p: usize,
    residual: f64,
    method: Method,
    attained: bool,
}

impl JsonFormat for RegularizedSolution {
    fn to_json(&self) -> Result<String> {
        let CoeffFile { order, coeffs } = coeff_file(&self.coeffs)?;
        encode(&SolutionFile {
            order,
            coeffs,
            p: self.p,
            residual: finite(self.residual, "residual")?,
            method: self.method,
            attained: self.attained,
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let file: SolutionFile = decode(text)?;
        let coeffs = coeffs_from_file(CoeffFile {
            order: file.order,
            coeffs: file.coeffs,
        })?;
        Ok(RegularizedSolution {
            coeffs,
            p: file.p,
            residual: file.residual,
            method: file.method,
            attained: file.attained,
        })
    }
}

/// Noise level, seed and the resulting `delta`, stored next to noisy data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRecord {
    pub sigma: f64,
    pub seed: u64,
    pub delta: f64,
}

impl JsonFormat for NoiseRecord {
    fn to_json(&self) -> Result<String> {
        finite(self.sigma, "noise record")?;
        finite(self.delta, "noise record")?;
        encode(self)
    }

    fn from_json(text: &str) -> Result<Self> {
        let rec: NoiseRecord = decode(text)?;
        if !(rec.delta >= 0.0 && rec.sigma >= 0.0) {
            return Err(Error::Format("noise record has negative entries".into()));
        }
        Ok(rec)
    }
}

/// Loads either a full data matrix or a diagonal-data file.
///
/// A full matrix is returned as-is so the caller decides about averaging.
pub enum DataFile {
    Matrix(DataMatrix),
    Diagonals(DiagonalData),
}

impl DataFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("rows").is_some() {
            Ok(Self::Matrix(DataMatrix::from_json(text)?))
        } else if value.get("diagonals").is_some() {
            Ok(Self::Diagonals(DiagonalData::from_json(text)?))
        } else {
            Err(Error::Format("expected a data matrix or diagonal data file".into()))
        }
    }
}
