//! Linearized forward map in the Zernike/Fourier bases.
//!
//! The Fréchet derivative of the Neumann-to-Dirichlet map at unit conductivity
//! sends `psi_{j,k}` to a matrix supported on the `j`th diagonal `n = m + j` of
//! the Fourier data matrix. Collecting the data along each diagonal yields one
//! real lower-triangular system per `|j|`.
//!
//! Blocks are kept in two precisions: plain `f64` entries for inspection and
//! SVD, and double-double entries used when applying the operator, so that the
//! data handed to the badly conditioned inverse carries only its final rounding.

use nalgebra::DMatrix;
use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::zernike::{angular_range, ZernikeCoefficients};

/// Matrix element `a^{j,k}_{m,n} = <(F psi_{j,k}) f_m, f_n>`.
///
/// Nonzero only if `n = m + j`, `mn > 0` and `k < min(|m|, |n|)`.
pub fn coefficient(j: i32, k: u32, m: i32, n: i32) -> f64 {
    match support(j, k, m, n) {
        Some(mn) => {
            let ja = j.unsigned_abs() as f64;
            let kf = k as f64;
            let mnf = mn as f64;
            let mut value =
                -(0.5 * std::f64::consts::FRAC_2_SQRT_PI) * (ja + 2.0 * kf + 1.0).sqrt() / (mnf + ja + kf);
            for i in 1..=k {
                let i = i as f64;
                value *= (mnf - i) / (ja + mnf + kf - i);
            }
            value
        }
        None => 0.0,
    }
}

/// Same as [`coefficient`] in double-double arithmetic.
pub(crate) fn coefficient_dd(j: i32, k: u32, m: i32, n: i32) -> TwoFloat {
    match support(j, k, m, n) {
        Some(mn) => {
            let ja = j.unsigned_abs() as f64;
            let kf = k as f64;
            let mnf = mn as f64;
            let inv_sqrt_pi = twofloat::consts::FRAC_2_SQRT_PI / 2.0;
            let mut value = -inv_sqrt_pi * TwoFloat::from(ja + 2.0 * kf + 1.0).sqrt()
                / TwoFloat::from(mnf + ja + kf);
            for i in 1..=k {
                let i = i as f64;
                value = value * TwoFloat::from(mnf - i) / TwoFloat::from(ja + mnf + kf - i);
            }
            value
        }
        None => TwoFloat::from(0.0),
    }
}

fn support(j: i32, k: u32, m: i32, n: i32) -> Option<u32> {
    if m == 0 || n == 0 || n as i64 != m as i64 + j as i64 || (m as i64) * (n as i64) <= 0 {
        return None;
    }
    let mn = m.unsigned_abs().min(n.unsigned_abs());
    (k < mn).then_some(mn)
}

/// Lower-triangular block `F^{|j|,M}` of size `(M - |j|) x (M - |j|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularBlock {
    j_abs: usize,
    order: usize,
    entries: Vec<f64>,
    exact: Vec<TwoFloat>,
}

impl TriangularBlock {
    pub fn new(j_abs: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if j_abs >= order {
            return Err(Error::BlockOutOfRange { j_abs, order });
        }
        let dim = order - j_abs;
        let mut entries = vec![0.0; dim * dim];
        let mut exact = vec![TwoFloat::from(0.0); dim * dim];
        let j = j_abs as i32;
        for row in 1..=dim {
            let m = row as i32;
            for col in 1..=row {
                let k = (col - 1) as u32;
                let at = (row - 1) * dim + (col - 1);
                entries[at] = coefficient(j, k, m, m + j);
                exact[at] = coefficient_dd(j, k, m, m + j);
            }
        }
        Ok(Self {
            j_abs,
            order,
            entries,
            exact,
        })
    }

    pub fn j_abs(&self) -> usize {
        self.j_abs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order - self.j_abs
    }

    /// Entry at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.entries)
    }

    /// Double-double entry at zero-based `(row, col)`.
    pub(crate) fn exact(&self, row: usize, col: usize) -> TwoFloat {
        self.exact[row * self.dim() + col]
    }

    /// `F x` accumulated in double-double and rounded once.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length does not match block size");
        (0..n)
            .map(|row| {
                let mut re = TwoFloat::from(0.0);
                let mut im = TwoFloat::from(0.0);
                for (col, xc) in x.iter().enumerate().take(row + 1) {
                    let f = self.exact(row, col);
                    re += f * xc.re;
                    im += f * xc.im;
                }
                Complex64::new(re.hi(), im.hi())
            })
            .collect()
    }
}

/// `F^M = diag(F^{M-1,M}, ..., F^{0,M}, ..., F^{M-1,M})`, stored once per `|j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalOperator {
    order: usize,
    blocks: Vec<TriangularBlock>,
}

impl BlockDiagonalOperator {
    pub fn assemble(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let blocks = (0..order)
            .map(|l| TriangularBlock::new(l, order))
            .collect::<Result<_>>()?;
        Ok(Self { order, blocks })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Block `F^{l,M}` for `l = |j|`.
    pub fn block(&self, l: usize) -> &TriangularBlock {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[TriangularBlock] {
        &self.blocks
    }

    /// Number of diagonal blocks, `2M - 1`.
    pub fn block_count(&self) -> usize {
        2 * self.order - 1
    }

    /// Block sizes in diagonal order `j = -(M-1), ..., M-1`.
    pub fn block_sizes(&self) -> Vec<usize> {
        angular_range(self.order)
            .map(|j| self.blocks[j.unsigned_abs() as usize].dim())
            .collect()
    }

    /// Total dimension `M^2`.
    pub fn dimension(&self) -> usize {
        self.order * self.order
    }

    pub fn apply(&self, coeffs: &ZernikeCoefficients) -> Result<DiagonalData> {
        if coeffs.order() != self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                found: coeffs.order(),
            });
        }
        let vectors = angular_range(self.order)
            .map(|j| self.blocks[j.unsigned_abs() as usize].apply(coeffs.block(j)))
            .collect();
        DiagonalData::from_vectors(self.order, vectors)
    }

    /// Dense `M^2 x M^2` matrix, for inspection and testing only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dimension();
        let mut out = DMatrix::zeros(dim, dim);
        let mut offset = 0;
        for j in angular_range(self.order) {
            let b = &self.blocks[j.unsigned_abs() as usize];
            let n = b.dim();
            for r in 0..n {
                for c in 0..=r {
                    out[(offset + r, offset + c)] = b.get(r, c);
                }
            }
            offset += n;
        }
        out
    }
}

/// Applies the linearized forward map: `a^{j,M} = F^{|j|,M} c^{j,M}` for every `j`.
pub fn apply_forward(coeffs: &ZernikeCoefficients) -> Result<DiagonalData> {
    BlockDiagonalOperator::assemble(coeffs.order())?.apply(coeffs)
}

/// `(2M) x (2M)` Fourier data matrix indexed by `m, n in {-M..-1, 1..M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    order: usize,
    entries: Vec<Complex64>,
}

impl DataMatrix {
    pub fn zeros(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let side = 2 * order;
        Ok(Self {
            order,
            entries: vec![Complex64::new(0.0, 0.0); side * side],
        })
    }

    /// Builds from row-major entries in the fixed index order.
    pub fn from_rows(order: usize, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let side = 2 * order;
        if rows.len() != side || rows.iter().any(|r| r.len() != side) {
            return Err(Error::Format(format!(
                "data matrix for M = {order} must be {side}x{side}"
            )));
        }
        Ok(Self {
            order,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn side(&self) -> usize {
        2 * self.order
    }

    /// Fourier indices in storage order, `-M..=-1` then `1..=M`.
    pub fn indices(&self) -> Vec<i32> {
        fourier_indices(self.order)
    }

    fn position(&self, m: i32) -> usize {
        fourier_position(self.order, m)
    }

    /// Entry `a_{m,n}`; panics unless `0 < |m|, |n| <= M`.
    pub fn get(&self, m: i32, n: i32) -> Complex64 {
        self.entries[self.position(m) * self.side() + self.position(n)]
    }

    pub fn set(&mut self, m: i32, n: i32, value: Complex64) {
        let at = self.position(m) * self.side() + self.position(n);
        self.entries[at] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.side())
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Fourier indices `Z'_M` in storage order.
pub fn fourier_indices(order: usize) -> Vec<i32> {
    let m = order as i32;
    (-m..=-1).chain(1..=m).collect()
}

pub(crate) fn fourier_position(order: usize, m: i32) -> usize {
    let big = order as i32;
    assert!(m != 0 && m.abs() <= big, "Fourier index {m} outside Z'_{big}");
    if m < 0 {
        (m + big) as usize
    } else {
        (m + big - 1) as usize
    }
}

/// Per-diagonal data vectors `a^{j,M}` of length `M - |j|`, `j = -(M-1)..=M-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalData {
    order: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl DiagonalData {
    pub fn zeros(order: usize) -> Result<Self> {
        let vectors = angular_range(order)
            .map(|j| vec![Complex64::new(0.0, 0.0); order - j.unsigned_abs() as usize])
            .collect();
        Self::from_vectors(order, vectors)
    }

    pub fn from_vectors(order: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if vectors.len() != 2 * order - 1 {
            return Err(Error::Format(format!(
                "expected {} diagonals, found {}",
                2 * order - 1,
                vectors.len()
            )));
        }
        for (j, v) in angular_range(order).zip(&vectors) {
            let want = order - j.unsigned_abs() as usize;
            if v.len() != want {
                return Err(Error::Format(format!(
                    "diagonal j = {j} has {} entries, expected {want}",
                    v.len()
                )));
            }
        }
        Ok(Self { order, vectors })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, j: i32) -> &[Complex64] {
        let m = self.order as i32;
        if j.abs() >= m {
            return &[];
        }
        &self.vectors[(j + m - 1) as usize]
    }

    pub fn get_mut(&mut self, j: i32) -> &mut [Complex64] {
        let m = self.order as i32;
        if j.abs() >= m {
            return &mut [];
        }
        &mut self.vectors[(j + m - 1) as usize]
    }

    /// `(j, a^{j,M})` pairs in increasing `j`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &[Complex64])> {
        angular_range(self.order).zip(self.vectors.iter().map(Vec::as_slice))
    }

    pub fn len(&self) -> usize {
        self.order * self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Euclidean norm of the concatenated vector `a^M`.
    pub fn norm(&self) -> f64 {
        self.vectors
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Places each `a^{j,M}` on its diagonal together with the mirrored copy about
/// the diagonal midpoint; entries with `mn < 0` stay zero.
pub fn diagonal_data_to_matrix(diag: &DiagonalData) -> DataMatrix {
    let order = diag.order();
    let mut out = DataMatrix::zeros(order).expect("order is positive");
    for (j, v) in diag.iter() {
        for (i, &value) in v.iter().enumerate() {
            let m = i as i32 + 1;
            let (primary, mirror) = diagonal_positions(j, m);
            out.set(primary.0, primary.1, value);
            out.set(mirror.0, mirror.1, value);
        }
    }
    out
}

/// Reads the data vectors off the diagonals. With `averaging` the primary
/// readout is averaged with the mirrored one.
pub fn extract_diagonals(data: &DataMatrix, averaging: bool) -> DiagonalData {
    let order = data.order();
    let vectors = angular_range(order)
        .map(|j| {
            (1..=(order - j.unsigned_abs() as usize) as i32)
                .map(|m| {
                    let (p, q) = diagonal_positions(j, m);
                    let primary = data.get(p.0, p.1);
                    if averaging {
                        (primary + data.get(q.0, q.1)) * 0.5
                    } else {
                        primary
                    }
                })
                .collect()
        })
        .collect();
    DiagonalData::from_vectors(order, vectors).expect("shape follows from order")
}

/// Primary and mirrored `(m, n)` positions of component `m` (1-based) of `a^j`.
fn diagonal_positions(j: i32, m: i32) -> ((i32, i32), (i32, i32)) {
    if j >= 0 {
        ((m, m + j), (-m - j, -m))
    } else {
        ((-m, -m + j), (m - j, m))
    }
}
