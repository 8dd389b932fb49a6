//! Square rasters of a Zernike expansion over `[-1, 1]^2`.
//!
//! Grid point `(row, col)` sits at `x = -1 + 2 col / (n - 1)`,
//! `y = 1 - 2 row / (n - 1)`, so the first row is the top edge. Points with
//! `x^2 + y^2 > 1` are absent: `nan` in CSV and gray level 0 in PGM, where
//! present values use levels `1..=255`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zernike::{eval_expansion, ZernikeCoefficients};

/// Which real quantity of the complex expansion to plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Real,
    Imag,
    Abs,
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Self::Real),
            "imag" => Ok(Self::Imag),
            "abs" => Ok(Self::Abs),
            other => Err(Error::InvalidParameter(format!(
                "unknown part '{other}' (expected real, imag or abs)"
            ))),
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Real => "real",
            Self::Imag => "imag",
            Self::Abs => "abs",
        })
    }
}

/// Linear gray-level scaling written next to a PGM image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    resolution: usize,
    // row-major, None outside the disk
    values: Vec<Option<f64>>,
}

fn coordinate(i: usize, n: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (n - 1) as f64
}

impl RasterGrid {
    /// Evaluates `part` of the expansion on an `n x n` grid.
    pub fn evaluate(coeffs: &ZernikeCoefficients, resolution: usize, part: Part) -> Result<Self> {
        let n = check_resolution(resolution)?;
        let mut slots = Vec::with_capacity(n * n);
        let mut points = Vec::new();
        for row in 0..n {
            let y = -coordinate(row, n);
            for col in 0..n {
                let x = coordinate(col, n);
                if x * x + y * y <= 1.0 {
                    slots.push(Some(points.len()));
                    points.push((x.hypot(y).min(1.0), y.atan2(x)));
                } else {
                    slots.push(None);
                }
            }
        }
        let values = eval_expansion(coeffs, &points)?;
        let values = slots
            .into_iter()
            .map(|slot| {
                slot.map(|i| {
                    let z = values[i];
                    match part {
                        Part::Real => z.re,
                        Part::Imag => z.im,
                        Part::Abs => z.norm(),
                    }
                })
            })
            .collect();
        Ok(Self {
            resolution: n,
            values,
        })
    }

    pub fn from_values(resolution: usize, values: Vec<Option<f64>>) -> Result<Self> {
        let n = check_resolution(resolution)?;
        if values.len() != n * n {
            return Err(Error::Format(format!(
                "expected {} raster values, found {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            resolution: n,
            values,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Value at `(row, col)`; `None` outside the disk.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.resolution + col]
    }

    /// Cartesian position of `(row, col)`.
    pub fn point(&self, row: usize, col: usize) -> (f64, f64) {
        let n = self.resolution;
        (coordinate(col, n), -coordinate(row, n))
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Smallest and largest present value, `None` if no point is present.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.resolution) {
            let line: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Some(x) => x.to_string(),
                    None => "nan".to_string(),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for line in rows {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n {
                return Err(Error::Format(format!("CSV row has {} cells, expected {n}", cells.len())));
            }
            for cell in cells {
                let cell = cell.trim();
                values.push(if cell == "nan" {
                    None
                } else {
                    Some(
                        cell.parse::<f64>()
                            .map_err(|e| Error::Format(format!("bad CSV value '{cell}': {e}")))?,
                    )
                });
            }
        }
        Self::from_values(n, values)
    }

    /// Binary 8-bit PGM and the scale used to produce it.
    pub fn to_pgm(&self) -> (Vec<u8>, PgmScale) {
        let n = self.resolution;
        let (min, max) = self.range().unwrap_or((0.0, 0.0));
        let span = max - min;
        let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
        out.extend(self.values.iter().map(|v| match v {
            None => 0,
            Some(x) => {
                let t = if span > 0.0 { (x - min) / span } else { 0.0 };
                1 + (254.0 * t).round() as u8
            }
        }));
        (out, PgmScale { min, max })
    }

    /// Writes `<stem>.csv`, `<stem>.pgm` and `<stem>.pgm.json` into `dir`.
    pub fn write_files(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        let (pgm, scale) = self.to_pgm();
        fs::write(dir.join(format!("{stem}.pgm")), pgm)?;
        let mut sidecar = serde_json::to_string(&scale)?;
        sidecar.push('\n');
        fs::write(dir.join(format!("{stem}.pgm.json")), sidecar)?;
        Ok(())
    }
}

fn check_resolution(n: usize) -> Result<usize> {
    if n < 2 {
        Err(Error::InvalidParameter(format!("raster resolution {n} must be at least 2")))
    } else {
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zernike::ZernikeIndex;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn resolution_checked() {
        let c = ZernikeCoefficients::zeros(2).unwrap();
        assert!(RasterGrid::evaluate(&c, 1, Part::Real).is_err());
        assert!(RasterGrid::evaluate(&c, 2, Part::Real).is_ok());
    }

    #[test]
    fn zero_and_constant() {
        let mut c = ZernikeCoefficients::zeros(3).unwrap();
        let g = RasterGrid::evaluate(&c, 9, Part::Real).unwrap();
        assert!(g.values().iter().flatten().all(|&v| v == 0.0));
        c.set(ZernikeIndex::new(0, 0), Complex64::new(PI.sqrt(), 0.0)).unwrap();
        let g = RasterGrid::evaluate(&c, 9, Part::Real).unwrap();
        assert!(g.values().iter().flatten().all(|&v| (v - 1.0).abs() < 1e-14));
        assert_eq!(g.get(0, 0), None);
        assert_eq!(g.get(0, 4), Some(g.get(4, 4).unwrap()));
    }

    #[test]
    fn linear_mode() {
        let mut c = ZernikeCoefficients::zeros(2).unwrap();
        c.set(ZernikeIndex::new(1, 0), Complex64::new(1.0, 0.0)).unwrap();
        c.set(ZernikeIndex::new(-1, 0), Complex64::new(1.0, 0.0)).unwrap();
        let g = RasterGrid::evaluate(&c, 17, Part::Real).unwrap();
        for row in 0..17 {
            for col in 0..17 {
                if let Some(v) = g.get(row, col) {
                    let (x, _) = g.point(row, col);
                    assert!((v - 2.0 * (2.0 / PI).sqrt() * x).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn csv_and_pgm() {
        let g = RasterGrid::from_values(2, vec![None, Some(1.5), Some(-0.5), None]).unwrap();
        let csv = g.to_csv();
        assert_eq!(csv, "nan,1.5\n-0.5,nan\n");
        assert_eq!(RasterGrid::from_csv(&csv).unwrap(), g);
        let (pgm, scale) = g.to_pgm();
        assert_eq!(scale, PgmScale { min: -0.5, max: 1.5 });
        assert_eq!(&pgm[pgm.len() - 4..], &[0, 255, 1, 0]);
        assert!(pgm.starts_with(b"P5\n2 2\n255\n"));
    }
}
