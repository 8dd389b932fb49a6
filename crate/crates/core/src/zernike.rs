//! Orthonormal Zernike basis on the unit disk.
//!
//! The basis functions are
//!
//! ```text
//! psi_{j,k}(r, theta) = sqrt((|j| + 2k + 1) / pi) * R^{|j|}_{|j|+2k}(r) * exp(i j theta)
//! ```
//!
//! with `j` any integer and `k >= 0`. Radial values are produced by the
//! three-term Jacobi recurrence `R^{|j|}_{|j|+2k}(r) = r^{|j|} P_k^{(0,|j|)}(2r^2 - 1)`,
//! which stays accurate at the degrees needed for `M = 32` and beyond. The
//! explicit alternating binomial sum is kept as [`radial_poly_sum`]; it is exact
//! in its integer part but loses roughly `log10(max term)` digits to
//! cancellation, which makes it unusable beyond degree ~40.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Angular index `j` and radial index `k` of a Zernike polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZernikeIndex {
    pub j: i32,
    pub k: u32,
}

impl ZernikeIndex {
    pub fn new(j: i32, k: u32) -> Self {
        Self { j, k }
    }

    /// Polynomial degree `|j| + 2k`.
    pub fn degree(&self) -> u32 {
        self.j.unsigned_abs() + 2 * self.k
    }

    /// `sqrt((|j| + 2k + 1) / pi)`.
    pub fn normalization(&self) -> f64 {
        ((self.degree() + 1) as f64 / PI).sqrt()
    }
}

/// Exact binomial coefficient, reporting overflow instead of saturating.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let (acc_r, den_r) = (acc / g, den / g);
        let num_r = num / den_r;
        acc = acc_r
            .checked_mul(num_r)
            .ok_or(Error::BinomialOverflow { n, k })?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn check_radius(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::RadiusOutOfRange(r))
    }
}

/// Zernike radial polynomial `R^{j_abs}_{j_abs+2k}(r)`.
pub fn radial_poly(j_abs: u32, k: u32, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(radial_values(j_abs, k as usize + 1, r)[k as usize])
}

/// Explicit alternating-sum form of the radial polynomial with exact integer
/// binomials. Accurate only for moderate degrees.
pub fn radial_poly_sum(j_abs: u32, k: u32, r: f64) -> Result<f64> {
    check_radius(r)?;
    let n = j_abs + 2 * k;
    let mut sum = 0.0;
    for i in 0..=k {
        let b1 = binomial(n - i, i)?;
        let b2 = binomial(n - 2 * i, k - i)?;
        let coef = b1.checked_mul(b2).ok_or(Error::BinomialOverflow { n, k })? as f64;
        let term = coef * r.powi((n - 2 * i) as i32);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// Radial values `R^{j_abs}_{j_abs+2k}(r)` for `k = 0..count`.
pub(crate) fn radial_values(j_abs: u32, count: usize, r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let x = 2.0 * r * r - 1.0;
    let scale = r.powi(j_abs as i32);
    let b = j_abs as f64;
    // Jacobi P_n^{(0, b)}(x)
    let mut prev = 1.0;
    out.push(scale * prev);
    if count == 1 {
        return out;
    }
    let mut cur = 1.0 + 0.5 * (b + 2.0) * (x - 1.0);
    out.push(scale * cur);
    for n in 2..count {
        let n = n as f64;
        let s = 2.0 * n + b;
        let lhs = 2.0 * n * (n + b) * (s - 2.0);
        let a1 = (s - 1.0) * (s * (s - 2.0) * x - b * b);
        let a2 = 2.0 * (n - 1.0) * (n + b - 1.0) * s;
        let next = (a1 * cur - a2 * prev) / lhs;
        prev = cur;
        cur = next;
        out.push(scale * cur);
    }
    out
}

/// Orthonormal Zernike polynomial `psi_{j,k}(r, theta)`.
pub fn zernike_eval(idx: ZernikeIndex, r: f64, theta: f64) -> Result<Complex64> {
    let radial = radial_poly(idx.j.unsigned_abs(), idx.k, r)?;
    let phase = Complex64::from_polar(1.0, idx.j as f64 * theta);
    Ok(phase * (idx.normalization() * radial))
}

/// Zernike coefficients `c_{j,k}` truncated at order `M`: `|j| <= M - 1` and
/// `k <= M - |j| - 1`, `M^2` values in total.
#[derive(Debug, Clone, PartialEq)]
pub struct ZernikeCoefficients {
    order: usize,
    // blocks[j + M - 1] holds c_{j,0..M-|j|}
    blocks: Vec<Vec<Complex64>>,
}

impl ZernikeCoefficients {
    pub fn zeros(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let blocks = angular_range(order)
            .map(|j| vec![Complex64::new(0.0, 0.0); order - j.unsigned_abs() as usize])
            .collect();
        Ok(Self { order, blocks })
    }

    /// Builds from per-`j` vectors, ordered `j = -(M-1), ..., M-1`.
    pub fn from_blocks(order: usize, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if blocks.len() != 2 * order - 1 {
            return Err(Error::Format(format!(
                "expected {} angular blocks, found {}",
                2 * order - 1,
                blocks.len()
            )));
        }
        for (j, b) in angular_range(order).zip(&blocks) {
            let want = order - j.unsigned_abs() as usize;
            if b.len() != want {
                return Err(Error::Format(format!(
                    "block j = {j} has {} entries, expected {want}",
                    b.len()
                )));
            }
        }
        Ok(Self { order, blocks })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order * self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn slot(&self, j: i32) -> Option<usize> {
        let m = self.order as i32;
        (j.abs() < m).then(|| (j + m - 1) as usize)
    }

    pub fn contains(&self, idx: ZernikeIndex) -> bool {
        self.slot(idx.j)
            .is_some_and(|s| (idx.k as usize) < self.blocks[s].len())
    }

    pub fn get(&self, idx: ZernikeIndex) -> Option<Complex64> {
        let s = self.slot(idx.j)?;
        self.blocks[s].get(idx.k as usize).copied()
    }

    pub fn set(&mut self, idx: ZernikeIndex, value: Complex64) -> Result<()> {
        let order = self.order;
        let s = self.slot(idx.j).ok_or(Error::BlockOutOfRange {
            j_abs: idx.j.unsigned_abs() as usize,
            order,
        })?;
        let slot = self.blocks[s]
            .get_mut(idx.k as usize)
            .ok_or_else(|| Error::InvalidParameter(format!("k = {} out of range", idx.k)))?;
        *slot = value;
        Ok(())
    }

    /// Coefficient vector for angular index `j` (component `k` holds `c_{j,k}`).
    pub fn block(&self, j: i32) -> &[Complex64] {
        match self.slot(j) {
            Some(s) => &self.blocks[s],
            None => &[],
        }
    }

    pub fn block_mut(&mut self, j: i32) -> &mut [Complex64] {
        match self.slot(j) {
            Some(s) => &mut self.blocks[s],
            None => &mut [],
        }
    }

    /// All stored `(index, value)` pairs ordered by `j`, then `k`.
    pub fn iter(&self) -> impl Iterator<Item = (ZernikeIndex, Complex64)> + '_ {
        angular_range(self.order)
            .zip(&self.blocks)
            .flat_map(|(j, b)| {
                b.iter()
                    .enumerate()
                    .map(move |(k, &c)| (ZernikeIndex::new(j, k as u32), c))
            })
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest violation of `c_{-j,k} = conj(c_{j,k})`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 1..self.order as i32 {
            for (a, b) in self.block(j).iter().zip(self.block(-j)) {
                worst = worst.max((a - b.conj()).norm());
            }
        }
        for c in self.block(0) {
            worst = worst.max(c.im.abs());
        }
        worst
    }

    /// Projects onto the coefficient sets of real-valued functions by
    /// averaging `c_{j,k}` with `conj(c_{-j,k})`.
    pub fn symmetrize_real(&mut self) {
        for j in 1..self.order as i32 {
            let plus = self.block(j).to_vec();
            let minus = self.block(-j).to_vec();
            for (k, (p, m)) in plus.iter().zip(&minus).enumerate() {
                let avg = (p + m.conj()) * 0.5;
                self.block_mut(j)[k] = avg;
                self.block_mut(-j)[k] = avg.conj();
            }
        }
        for c in self.block_mut(0) {
            c.im = 0.0;
        }
    }
}

/// Angular indices `-(M-1)..=M-1`.
pub fn angular_range(order: usize) -> impl Iterator<Item = i32> + Clone {
    let m = order as i32;
    -(m - 1)..m
}

/// Evaluates the truncated expansion `sum c_{j,k} psi_{j,k}` at polar points.
///
/// Radial values are shared across all `j` with the same `|j|`, so each point
/// costs one recurrence per `|j|`.
pub fn eval_expansion(coeffs: &ZernikeCoefficients, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let order = coeffs.order();
    let norms: Vec<Vec<f64>> = (0..order)
        .map(|l| {
            (0..order - l)
                .map(|k| ZernikeIndex::new(l as i32, k as u32).normalization())
                .collect()
        })
        .collect();
    points
        .iter()
        .map(|&(r, theta)| {
            check_radius(r)?;
            let mut total = Complex64::new(0.0, 0.0);
            let step = Complex64::from_polar(1.0, theta);
            let mut phase = Complex64::new(1.0, 0.0);
            for (l, block_norms) in norms.iter().enumerate() {
                let radial = radial_values(l as u32, order - l, r);
                let weight = |b: &[Complex64]| -> Complex64 {
                    b.iter()
                        .zip(&radial)
                        .zip(block_norms)
                        .map(|((c, rv), n)| c * (rv * n))
                        .sum()
                };
                let plus = weight(coeffs.block(l as i32));
                if l == 0 {
                    total += plus;
                } else {
                    let minus = weight(coeffs.block(-(l as i32)));
                    total += plus * phase + minus * phase.conj();
                }
                phase *= step;
            }
            Ok(total)
        })
        .collect()
}
