//! Regularized inversion of the block-triangular system `F^M c^M = a^M`.
//!
//! Two truncation schemes share one interface. Both are driven by an
//! [`OrderingMap`] that says, for a global truncation index `p`, how many
//! entries of each block `F^{l,M}` are retained:
//!
//! * truncated SVD ranks per-block singular values and applies the rank-limited
//!   pseudoinverse block by block;
//! * triangular truncation ranks the magnitudes of the diagonal entries and runs
//!   the explicit forward-substitution recursion on a leading sub-block.
//!
//! Blocks for `+j` and `-j` are the same matrix, so both always receive the same
//! truncation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::forward::{BlockDiagonalOperator, DiagonalData, TriangularBlock};
use crate::zernike::{angular_range, binomial, ZernikeCoefficients};

/// Floor applied to singular values before division. Not reached for `M <= 64`.
pub const MIN_SINGULAR_VALUE: f64 = 1e-300;

/// Runs the forward-substitution recursion for angular index `j` on the first
/// `q` entries of `a`, returning `c^j_1, ..., c^j_q`.
///
/// Arithmetic is carried in double-double: the blocks have condition numbers
/// near `1e11` at `M = 16`, and plain `f64` accumulation would dominate the
/// error budget.
pub fn forward_substitution(j: i32, a: &[Complex64], q: usize) -> Result<Vec<Complex64>> {
    if q > a.len() {
        return Err(Error::PrefixTooLong { q, len: a.len() });
    }
    let ja = j.unsigned_abs();
    let pi = twofloat::consts::PI;
    let mut re: Vec<TwoFloat> = Vec::with_capacity(q);
    let mut im: Vec<TwoFloat> = Vec::with_capacity(q);
    for k in 0..q as u32 {
        let top = ja + 2 * k;
        let lead = -(pi * TwoFloat::from(top + 1)).sqrt() * exact_binomial(top, k)?;
        let ak = a[k as usize];
        let mut next_re = lead * ak.re;
        let mut next_im = lead * ak.im;
        for i in 1..=k {
            let w = (TwoFloat::from(top + 1) * TwoFloat::from(ja + 2 * i - 1)).sqrt()
                / TwoFloat::from(ja + k + i)
                * exact_binomial(top, k - i + 1)?;
            next_re -= re[(i - 1) as usize] * w;
            next_im -= im[(i - 1) as usize] * w;
        }
        re.push(next_re);
        im.push(next_im);
    }
    Ok(re
        .into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r.hi(), i.hi()))
        .collect())
}

fn exact_binomial(n: u32, k: u32) -> Result<TwoFloat> {
    Ok(TwoFloat::from(binomial(n, k)?))
}

/// Singular value decomposition `F^{l,M} = U diag(s) V^T` of one block.
///
/// Computed by one-sided Jacobi in double-double arithmetic on the
/// double-double block entries. The smallest singular values at `M = 32` are
/// near `1e-24`, far below what an `f64` bidiagonalization resolves; the
/// Jacobi iteration keeps them to high relative accuracy. The `f64` fields
/// are the rounded factors; pseudoinverse applications use the exact ones.
#[derive(Debug, Clone)]
pub struct SvdFactor {
    pub u: DMatrix<f64>,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
    // column-major double-double factors
    u_dd: Vec<Vec<TwoFloat>>,
    s_dd: Vec<TwoFloat>,
    v_dd: Vec<Vec<TwoFloat>>,
}

const JACOBI_TOL: f64 = 1e-30;
const JACOBI_MAX_SWEEPS: usize = 80;

fn dot(x: &[TwoFloat], y: &[TwoFloat]) -> TwoFloat {
    x.iter().zip(y).fold(TwoFloat::from(0.0), |acc, (&a, &b)| acc + a * b)
}

fn rotate(x: &mut [TwoFloat], y: &mut [TwoFloat], c: TwoFloat, s: TwoFloat) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

/// Splits a column list so two distinct columns can be borrowed mutably.
fn pair_mut(cols: &mut [Vec<TwoFloat>], i: usize, k: usize) -> (&mut [TwoFloat], &mut [TwoFloat]) {
    let (head, tail) = cols.split_at_mut(k);
    (&mut head[i], &mut tail[0])
}

impl SvdFactor {
    fn new(block: &TriangularBlock) -> Self {
        let n = block.dim();
        let zero = TwoFloat::from(0.0);
        let one = TwoFloat::from(1.0);
        let mut a: Vec<Vec<TwoFloat>> = (0..n)
            .map(|col| (0..n).map(|row| block.exact(row, col)).collect())
            .collect();
        let mut v: Vec<Vec<TwoFloat>> = (0..n)
            .map(|col| (0..n).map(|row| if row == col { one } else { zero }).collect())
            .collect();
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for k in i + 1..n {
                    let alpha = dot(&a[i], &a[i]);
                    let beta = dot(&a[k], &a[k]);
                    let gamma = dot(&a[i], &a[k]);
                    if gamma.abs().hi() <= JACOBI_TOL * (alpha.hi() * beta.hi()).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (gamma * 2.0);
                    let mut t = (zeta.abs() + (one + zeta * zeta).sqrt()).recip();
                    if zeta.hi() < 0.0 {
                        t = -t;
                    }
                    let c = (one + t * t).sqrt().recip();
                    let s = c * t;
                    let (x, y) = pair_mut(&mut a, i, k);
                    rotate(x, y, c, s);
                    let (x, y) = pair_mut(&mut v, i, k);
                    rotate(x, y, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma: Vec<TwoFloat> = a.iter().map(|col| dot(col, col).sqrt()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            sigma[y]
                .partial_cmp(&sigma[x])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(x.cmp(&y))
        });
        let s_dd: Vec<TwoFloat> = order.iter().map(|&i| sigma[i]).collect();
        let u_dd: Vec<Vec<TwoFloat>> = order
            .iter()
            .map(|&i| {
                let inv = sigma[i].recip();
                a[i].iter().map(|&x| x * inv).collect()
            })
            .collect();
        let v_dd: Vec<Vec<TwoFloat>> = order.iter().map(|&i| v[i].clone()).collect();
        let to_f64 = |cols: &[Vec<TwoFloat>]| {
            DMatrix::from_fn(n, n, |row, col| cols[col][row].hi())
        };
        Self {
            u: to_f64(&u_dd),
            singular_values: s_dd.iter().map(|s| s.hi()).collect(),
            v: to_f64(&v_dd),
            u_dd,
            s_dd,
            v_dd,
        }
    }

    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(s) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&DVector::from_column_slice(&self.singular_values))
            * self.v.transpose()
    }

    /// Rank-`q` pseudoinverse applied to `a`.
    fn pseudo_solve(&self, a: &[Complex64], q: usize) -> Vec<Complex64> {
        let n = self.dim();
        let zero = TwoFloat::from(0.0);
        let mut re = vec![zero; n];
        let mut im = vec![zero; n];
        for i in 0..q {
            let u = &self.u_dd[i];
            let mut pr = zero;
            let mut pi = zero;
            for (x, &w) in a.iter().zip(u) {
                pr += w * x.re;
                pi += w * x.im;
            }
            let inv = self.s_dd[i].max(TwoFloat::from(MIN_SINGULAR_VALUE)).recip();
            let (pr, pi) = (pr * inv, pi * inv);
            for (r, &w) in self.v_dd[i].iter().enumerate() {
                re[r] += pr * w;
                im[r] += pi * w;
            }
        }
        re.iter()
            .zip(&im)
            .map(|(r, i)| Complex64::new(r.hi(), i.hi()))
            .collect()
    }
}

/// SVDs of the `M` distinct blocks `F^{l,M}`, `l = 0..M-1`.
#[derive(Debug, Clone)]
pub struct BlockSvd {
    factors: Vec<SvdFactor>,
}

impl BlockSvd {
    pub fn new(operator: &BlockDiagonalOperator) -> Self {
        Self {
            factors: operator.blocks().iter().map(SvdFactor::new).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, l: usize) -> &SvdFactor {
        &self.factors[l]
    }

    /// Singular values of `F^M` with multiplicity (blocks `l >= 1` twice), nonincreasing.
    pub fn full_spectrum(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .factors
            .iter()
            .enumerate()
            .flat_map(|(l, f)| {
                let reps = if l == 0 { 1 } else { 2 };
                f.singular_values
                    .iter()
                    .flat_map(move |&s| std::iter::repeat_n(s, reps))
            })
            .collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingKind {
    /// Rank by block singular values.
    Singular,
    /// Rank by magnitudes of block diagonal entries.
    Diagonal,
}

/// One ranked value: `value` is entry `position` (0-based) of block `block`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedValue {
    pub value: f64,
    pub block: usize,
    pub position: usize,
}

/// For each truncation index `p in 1..=M(M+1)/2`, how many of the `p` largest
/// values belong to each block `l = 0..M-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingMap {
    order: usize,
    kind: OrderingKind,
    ranked: Vec<RankedValue>,
    table: Vec<Vec<usize>>,
}

impl OrderingMap {
    /// Ranks `per_block[l]` (each nonincreasing) jointly. Ties go to the lower
    /// block, then the lower position.
    pub fn from_block_values(kind: OrderingKind, per_block: &[Vec<f64>]) -> Result<Self> {
        let order = per_block.len();
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut ranked: Vec<RankedValue> = per_block
            .iter()
            .enumerate()
            .flat_map(|(block, vals)| {
                vals.iter().enumerate().map(move |(position, &value)| RankedValue {
                    value,
                    block,
                    position,
                })
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.value
                .total_cmp(&a.value)
                .then(a.block.cmp(&b.block))
                .then(a.position.cmp(&b.position))
        });
        let mut counts = vec![0usize; order];
        let table = ranked
            .iter()
            .map(|r| {
                counts[r.block] += 1;
                counts.clone()
            })
            .collect();
        Ok(Self {
            order,
            kind,
            ranked,
            table,
        })
    }

    pub fn singular(svd: &BlockSvd) -> Result<Self> {
        let values: Vec<Vec<f64>> = svd
            .factors
            .iter()
            .map(|f| f.singular_values.clone())
            .collect();
        Self::from_block_values(OrderingKind::Singular, &values)
    }

    pub fn diagonal(operator: &BlockDiagonalOperator) -> Result<Self> {
        let values: Vec<Vec<f64>> = operator
            .blocks()
            .iter()
            .map(|b| b.diagonal().iter().map(|d| d.abs()).collect())
            .collect();
        Self::from_block_values(OrderingKind::Diagonal, &values)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> OrderingKind {
        self.kind
    }

    /// `M(M+1)/2`.
    pub fn max_index(&self) -> usize {
        self.table.len()
    }

    /// Per-block counts at truncation index `p`.
    pub fn counts(&self, p: usize) -> Result<&[usize]> {
        if p == 0 || p > self.max_index() {
            return Err(Error::TruncationOutOfRange {
                p,
                max: self.max_index(),
            });
        }
        Ok(&self.table[p - 1])
    }

    /// Values in rank order.
    pub fn ranked(&self) -> &[RankedValue] {
        &self.ranked
    }
}

/// Builds the singular-value or diagonal-magnitude ordering for order `M`.
pub fn build_ordering(order: usize, kind: OrderingKind) -> Result<OrderingMap> {
    let op = BlockDiagonalOperator::assemble(order)?;
    match kind {
        OrderingKind::Singular => OrderingMap::singular(&BlockSvd::new(&op)),
        OrderingKind::Diagonal => OrderingMap::diagonal(&op),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svd,
    Triangular,
}

impl Method {
    pub fn ordering_kind(self) -> OrderingKind {
        match self {
            Method::Svd => OrderingKind::Singular,
            Method::Triangular => OrderingKind::Diagonal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Svd => "svd",
            Method::Triangular => "triangular",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Method::Svd),
            "triangular" => Ok(Method::Triangular),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Regularized coefficients together with the truncation that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution {
    pub coeffs: ZernikeCoefficients,
    pub p: usize,
    /// `||F^M c - a||_2`.
    pub residual: f64,
    pub method: Method,
    /// `false` only when a discrepancy target was requested and not reached.
    pub attained: bool,
}

/// Precomputed operator, block SVDs and both orderings for one order `M`.
#[derive(Debug, Clone)]
pub struct Solver {
    operator: BlockDiagonalOperator,
    svd: BlockSvd,
    singular: OrderingMap,
    diagonal: OrderingMap,
}

impl Solver {
    pub fn new(order: usize) -> Result<Self> {
        let operator = BlockDiagonalOperator::assemble(order)?;
        let svd = BlockSvd::new(&operator);
        let singular = OrderingMap::singular(&svd)?;
        let diagonal = OrderingMap::diagonal(&operator)?;
        Ok(Self {
            operator,
            svd,
            singular,
            diagonal,
        })
    }

    pub fn order(&self) -> usize {
        self.operator.order()
    }

    pub fn operator(&self) -> &BlockDiagonalOperator {
        &self.operator
    }

    pub fn block_svd(&self) -> &BlockSvd {
        &self.svd
    }

    pub fn ordering(&self, method: Method) -> &OrderingMap {
        match method {
            Method::Svd => &self.singular,
            Method::Triangular => &self.diagonal,
        }
    }

    /// `M(M+1)/2`.
    pub fn max_index(&self) -> usize {
        self.singular.max_index()
    }

    fn check_order(&self, diag: &DiagonalData) -> Result<()> {
        if diag.order() != self.order() {
            return Err(Error::OrderMismatch {
                expected: self.order(),
                found: diag.order(),
            });
        }
        Ok(())
    }

    /// Rank-`q` pseudoinverse of block `|j|` applied to `a`. Full rank uses the
    /// exact triangular inverse, which the pseudoinverse equals in that case.
    fn svd_block(&self, j: i32, a: &[Complex64], q: usize) -> Result<Vec<Complex64>> {
        let f = self.svd.factor(j.unsigned_abs() as usize);
        if q == f.dim() {
            forward_substitution(j, a, q)
        } else {
            Ok(f.pseudo_solve(a, q))
        }
    }

    fn triangular_block(j: i32, a: &[Complex64], q: usize) -> Result<Vec<Complex64>> {
        let mut c = forward_substitution(j, a, q)?;
        c.resize(a.len(), Complex64::new(0.0, 0.0));
        Ok(c)
    }

    fn block_residual_sq(&self, j: i32, c: &[Complex64], a: &[Complex64]) -> f64 {
        let block = self.operator.block(j.unsigned_abs() as usize);
        let n = block.dim();
        (0..n)
            .map(|row| {
                let mut re = TwoFloat::from(-a[row].re);
                let mut im = TwoFloat::from(-a[row].im);
                for (col, cc) in c.iter().enumerate().take(row + 1) {
                    let f = block.exact(row, col);
                    re += f * cc.re;
                    im += f * cc.im;
                }
                re.hi() * re.hi() + im.hi() * im.hi()
            })
            .sum()
    }

    /// `||F^M c - a||_2`, accumulated blockwise in double-double.
    pub fn residual(&self, coeffs: &ZernikeCoefficients, diag: &DiagonalData) -> Result<f64> {
        self.check_order(diag)?;
        if coeffs.order() != self.order() {
            return Err(Error::OrderMismatch {
                expected: self.order(),
                found: coeffs.order(),
            });
        }
        Ok(angular_range(self.order())
            .map(|j| self.block_residual_sq(j, coeffs.block(j), diag.get(j)))
            .sum::<f64>()
            .sqrt())
    }

    /// Truncated-SVD solution `c^{M,p}`.
    pub fn truncated_svd(&self, diag: &DiagonalData, p: usize) -> Result<RegularizedSolution> {
        self.check_order(diag)?;
        let counts = self.singular.counts(p)?;
        let mut blocks = Vec::with_capacity(2 * self.order() - 1);
        let mut res_sq = 0.0;
        for (j, a) in diag.iter() {
            let c = self.svd_block(j, a, counts[j.unsigned_abs() as usize])?;
            res_sq += self.block_residual_sq(j, &c, a);
            blocks.push(c);
        }
        Ok(RegularizedSolution {
            coeffs: ZernikeCoefficients::from_blocks(self.order(), blocks)?,
            p,
            residual: res_sq.sqrt(),
            method: Method::Svd,
            attained: true,
        })
    }

    /// Truncated triangular solution: forward substitution on the leading
    /// `upsilon_{|j|}(p)` entries of each block, zero-padded.
    pub fn truncated_triangular(&self, diag: &DiagonalData, p: usize) -> Result<RegularizedSolution> {
        self.check_order(diag)?;
        let counts = self.diagonal.counts(p)?;
        let blocks = diag
            .iter()
            .map(|(j, a)| Self::triangular_block(j, a, counts[j.unsigned_abs() as usize]))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegularizedSolution {
            coeffs: ZernikeCoefficients::from_blocks(self.order(), blocks)?,
            p,
            residual: tail_norm(diag, counts),
            method: Method::Triangular,
            attained: true,
        })
    }

    pub fn solve(&self, diag: &DiagonalData, p: usize, method: Method) -> Result<RegularizedSolution> {
        match method {
            Method::Svd => self.truncated_svd(diag, p),
            Method::Triangular => self.truncated_triangular(diag, p),
        }
    }

    /// Smallest `p` with `||F^M c^{M,p} - a|| <= omega * delta`. When no index
    /// qualifies the full-rank solution is returned with `attained = false`.
    pub fn morozov(
        &self,
        diag: &DiagonalData,
        delta: f64,
        omega: f64,
        method: Method,
    ) -> Result<RegularizedSolution> {
        self.check_order(diag)?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level {delta} must be >= 0")));
        }
        if !(omega >= 1.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("fudge factor {omega} must be >= 1")));
        }
        let target = omega * delta;
        let ordering = self.ordering(method);
        let order = self.order();
        let slot = |j: i32| (j + order as i32 - 1) as usize;

        // Per-j squared residuals at the current truncation, starting from q = 0.
        let mut block_res: Vec<f64> = diag
            .iter()
            .map(|(_, a)| a.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let mut counts = vec![0usize; order];
        let mut chosen = None;
        for (idx, ranked) in ordering.ranked().iter().enumerate() {
            let l = ranked.block;
            counts[l] += 1;
            let signs: &[i32] = if l == 0 { &[0] } else { &[1, -1] };
            for &s in signs {
                let j = s * l as i32;
                let a = diag.get(j);
                block_res[slot(j)] = match method {
                    Method::Svd => {
                        let c = self.svd_block(j, a, counts[l])?;
                        self.block_residual_sq(j, &c, a)
                    }
                    Method::Triangular => tail_sq(a, counts[l]),
                };
            }
            if block_res.iter().sum::<f64>().sqrt() <= target {
                chosen = Some(idx + 1);
                break;
            }
        }
        let (p, attained) = match chosen {
            Some(p) => (p, true),
            None => (ordering.max_index(), false),
        };
        let mut sol = self.solve(diag, p, method)?;
        sol.attained = attained;
        Ok(sol)
    }

    /// Projects a solution onto real-valued perturbations
    /// (`c_{-j,k} = conj(c_{j,k})`) and recomputes its residual.
    pub fn enforce_real(&self, sol: &RegularizedSolution, diag: &DiagonalData) -> Result<RegularizedSolution> {
        let mut coeffs = sol.coeffs.clone();
        coeffs.symmetrize_real();
        let residual = self.residual(&coeffs, diag)?;
        Ok(RegularizedSolution {
            coeffs,
            residual,
            ..sol.clone()
        })
    }
}

fn tail_sq(a: &[Complex64], q: usize) -> f64 {
    a[q..].iter().fold(0.0, |acc, z| acc + z.norm_sqr())
}

/// `sqrt(sum_j ||a^{j,M}[q_{|j|}..]||^2)` for per-block prefix lengths `counts`.
///
/// This is the discrepancy measure of the truncated triangular method. It is
/// not `||F^M c - a||`: rows below each prefix also see
/// `F[tail, head] c[head]`, which is generally nonzero.
pub fn tail_norm(diag: &DiagonalData, counts: &[usize]) -> f64 {
    diag.iter()
        .fold(0.0, |acc, (j, a)| acc + tail_sq(a, counts[j.unsigned_abs() as usize]))
        .sqrt()
}

/// Truncated-SVD solution at index `p` for data of order `diag.order()`.
pub fn truncated_svd_solve(diag: &DiagonalData, p: usize) -> Result<RegularizedSolution> {
    Solver::new(diag.order())?.truncated_svd(diag, p)
}

/// Truncated triangular solution at index `p`.
pub fn triangular_truncation_solve(diag: &DiagonalData, p: usize) -> Result<RegularizedSolution> {
    Solver::new(diag.order())?.truncated_triangular(diag, p)
}

/// Discrepancy-principle selection of the truncation index.
pub fn morozov_select(
    diag: &DiagonalData,
    delta: f64,
    omega: f64,
    method: Method,
) -> Result<RegularizedSolution> {
    Solver::new(diag.order())?.morozov(diag, delta, omega, method)
}

/// `-sqrt(pi (|j| + 1))`: inverse of the leading diagonal entry of `F^{|j|}`.
pub fn leading_inverse(j: i32) -> f64 {
    -(PI * (j.unsigned_abs() + 1) as f64).sqrt()
}
