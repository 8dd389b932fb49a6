//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zernike_eit::{radial_poly, ZernikeCoefficients, ZernikeIndex};

pub fn binom(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Coefficients of `R^J_{J+2k}(r)` as `(power, coefficient)` pairs.
pub fn radial_terms(j_abs: u64, k: u64) -> Vec<(u64, BigInt)> {
    let n = j_abs + 2 * k;
    (0..=k)
        .map(|s| {
            let c = binom(n - s, s) * binom(n - 2 * s, k - s);
            (n - 2 * s, if s % 2 == 0 { c } else { -c })
        })
        .collect()
}

/// `int_0^1 R^J_{J+2k}(r) r^{e} dr` in exact arithmetic.
pub fn radial_moment(j_abs: u64, k: u64, e: u64) -> BigRational {
    radial_terms(j_abs, k)
        .into_iter()
        .fold(BigRational::zero(), |acc, (p, c)| {
            acc + BigRational::new(c, BigInt::from(p + e + 1))
        })
}

/// Rational part `I` of the linearized data `a^{j,k}_{m,n} = -2 N_{j,k} I`.
///
/// With Neumann currents `f_m = e^{i m theta} / sqrt(2 pi)` the potentials are
/// `z^m / (m sqrt(2 pi))` (conjugated for `m < 0`), and
/// `grad u_m . grad conj(u_n)` vanishes unless `m, n` share a sign, in which
/// case it is `r^{|m|+|n|-2} e^{i(m-n) theta} / pi`. Integrating against
/// `psi_{j,k}` leaves the angular selection `n = m + j` and the radial moment
/// with exponent `|m| + |n| - 1`.
pub fn data_moment(j: i32, k: u32, m: i32, n: i32) -> BigRational {
    if m == 0 || n == 0 || n != m + j || (m > 0) != (n > 0) {
        return BigRational::zero();
    }
    radial_moment(j.unsigned_abs() as u64, k as u64, (m.abs() + n.abs() - 1) as u64)
}

/// Oracle value of `a^{j,k}_{m,n}`.
pub fn coefficient_oracle(j: i32, k: u32, m: i32, n: i32) -> f64 {
    let q = data_moment(j, k, m, n);
    let norm = ((j.unsigned_abs() + 2 * k + 1) as f64 / PI).sqrt();
    -2.0 * norm * q.to_f64().unwrap()
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact solution of the leading `q x q` part of `F^{|j|} c = a`.
///
/// Entry `(row, col)` of the block is `-2 N_{|j|,col} I(row, col)` with
/// rational `I`, so the system is solved exactly for `y_col = N_{|j|,col} c_col`
/// and rescaled at the end.
pub fn exact_triangular_solve(j_abs: usize, a: &[Complex64], q: usize) -> Vec<Complex64> {
    let l = j_abs as i32;
    let moments: Vec<Vec<BigRational>> = (0..q)
        .map(|row| {
            (0..=row)
                .map(|col| data_moment(l, col as u32, row as i32 + 1, row as i32 + 1 + l))
                .collect()
        })
        .collect();
    let solve = |rhs: Vec<BigRational>| -> Vec<BigRational> {
        let mut y: Vec<BigRational> = Vec::with_capacity(q);
        for row in 0..q {
            let mut acc = rhs[row].clone();
            for (col, yc) in y.iter().enumerate() {
                acc -= &moments[row][col] * yc;
            }
            y.push(acc / &moments[row][row]);
        }
        y
    };
    let re = solve(a[..q].iter().map(|z| rational(z.re)).collect());
    let im = solve(a[..q].iter().map(|z| rational(z.im)).collect());
    (0..q)
        .map(|col| {
            let norm = ((j_abs + 2 * col + 1) as f64 / PI).sqrt();
            let scale = -0.5 / norm;
            Complex64::new(re[col].to_f64().unwrap() * scale, im[col].to_f64().unwrap() * scale)
        })
        .collect()
}

/// Singular values of a dense matrix by one-sided Jacobi in `f64`, sorted
/// nonincreasing.
pub fn jacobi_singular_values(matrix: &DMatrix<f64>) -> Vec<f64> {
    let n = matrix.ncols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| matrix.column(c).iter().copied().collect()).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    for _ in 0..100 {
        let mut rotated = false;
        for i in 0..n {
            for k in i + 1..n {
                let gamma = dot(&cols[i], &cols[k]);
                if gamma == 0.0 {
                    continue;
                }
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[k], &cols[k]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = cols.split_at_mut(k);
                for (x, y) in head[i].iter_mut().zip(tail[0].iter_mut()) {
                    let (p, q) = (*x, *y);
                    *x = c * p - s * q;
                    *y = s * p + c * q;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sample.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let v = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

/// Coefficient set with i.i.d. complex standard normal entries.
pub fn random_coeffs(order: usize, rng: &mut ChaCha8Rng) -> ZernikeCoefficients {
    let mut c = ZernikeCoefficients::zeros(order).unwrap();
    for (idx, _) in ZernikeCoefficients::zeros(order).unwrap().iter() {
        c.set(idx, Complex64::new(gaussian(rng), gaussian(rng))).unwrap();
    }
    c
}

pub fn relative_error(found: &ZernikeCoefficients, truth: &ZernikeCoefficients) -> f64 {
    let num: f64 = truth
        .iter()
        .map(|(idx, t)| (found.get(idx).unwrap() - t).norm_sqr())
        .sum();
    (num / truth.iter().map(|(_, t)| t.norm_sqr()).sum::<f64>()).sqrt()
}

/// Zernike coefficients of `kappa` times the indicator of `|x| < rho`,
/// computed by Gauss–Legendre quadrature (exact for the polynomial integrand).
pub fn concentric_coefficients(order: usize, kappa: f64, rho: f64) -> ZernikeCoefficients {
    let nodes = gauss_legendre(2 * order + 2);
    let mut c = ZernikeCoefficients::zeros(order).unwrap();
    for k in 0..order as u32 {
        let idx = ZernikeIndex::new(0, k);
        let integral: f64 = nodes
            .iter()
            .map(|&(x, w)| {
                let r = 0.5 * rho * (x + 1.0);
                let radial = radial_poly(0, k, r).unwrap();
                0.5 * rho * w * radial * r
            })
            .sum();
        c.set(idx, Complex64::new(kappa * 2.0 * PI * idx.normalization() * integral, 0.0))
            .unwrap();
    }
    c
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
