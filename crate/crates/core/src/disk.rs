//! Exact nonlinear difference data for a single disk inclusion.
//!
//! For the concentric inclusion `1 + kappa * chi(|x| < rho)` the Fourier
//! currents are eigenfunctions of `Lambda(gamma) - Lambda(1)`. An off-center
//! disk is reduced to that case by a Möbius automorphism `Psi` of the unit disk:
//! currents are transported into the concentric frame with the boundary
//! Jacobian `|Phi'|`, the eigenvalues are applied mode by mode, and the
//! resulting potential is pulled back through `Psi`.
//!
//! Noise is drawn with a ChaCha8 stream and the Box–Muller transform evaluated
//! with the pure-Rust `libm` routines, so a seed yields the same matrix on every
//! platform.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::forward::{fourier_indices, DataMatrix};

/// Disk `|z - center| < radius` with conductivity `1 + kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskInclusion {
    center: Complex64,
    radius: f64,
    kappa: f64,
}

impl DiskInclusion {
    pub fn new(center: Complex64, radius: f64, kappa: f64) -> Result<Self> {
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidInclusion("center is not finite".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInclusion(format!("radius {radius} must be positive")));
        }
        if !(kappa > -1.0 && kappa.is_finite()) {
            return Err(Error::InvalidInclusion(format!("contrast {kappa} must exceed -1")));
        }
        if center.norm() + radius >= 1.0 {
            return Err(Error::InvalidInclusion(format!(
                "disk with |center| = {} and radius {radius} is not compactly contained in the unit disk",
                center.norm()
            )));
        }
        Ok(Self {
            center,
            radius,
            kappa,
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Disk automorphism `Psi(z) = e^{i phase} (z - a) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    phase: f64,
}

impl MobiusMap {
    pub fn new(a: Complex64, phase: f64) -> Result<Self> {
        if a.norm().is_nan() || a.norm() >= 1.0 || !phase.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Möbius parameter {a} must lie inside the unit disk"
            )));
        }
        Ok(Self { a, phase })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(0.0, 0.0),
            phase: 0.0,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    /// `Psi(z)`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.rotation() * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    /// `Phi(w) = Psi^{-1}(w)`.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        let u = self.rotation().conj() * w;
        (u + self.a) / (1.0 + self.a.conj() * u)
    }

    /// `Psi'(z)`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = 1.0 - self.a.conj() * z;
        self.rotation() * (1.0 - self.a.norm_sqr()) / (d * d)
    }

    /// `Phi'(w)`.
    pub fn inverse_derivative(&self, w: Complex64) -> Complex64 {
        let rot = self.rotation().conj();
        let d = 1.0 + self.a.conj() * rot * w;
        rot * (1.0 - self.a.norm_sqr()) / (d * d)
    }
}

/// Automorphism sending the inclusion onto the concentric disk of radius `rho`.
///
/// `a` sits on the ray through the center and the phase rotates that ray onto
/// the positive real axis. With `d = |center|`, `t1 = d - r`, `t2 = d + r`, the
/// requirement `Psi(t1) = -Psi(t2)` gives
/// `(t1 + t2) s^2 - 2 (1 + t1 t2) s + (t1 + t2) = 0` for `s = |a|`; the roots
/// multiply to one and the one inside the unit interval is taken.
pub fn mobius_for_disk(inclusion: &DiskInclusion) -> (MobiusMap, f64) {
    let d = inclusion.center.norm();
    let r = inclusion.radius;
    if d == 0.0 {
        return (MobiusMap::identity(), r);
    }
    let alpha = inclusion.center.arg();
    let (t1, t2) = (d - r, d + r);
    let sum = t1 + t2;
    let b = 1.0 + t1 * t2;
    let s = sum / (b + (b * b - sum * sum).sqrt());
    let rho = (t2 - s) / (1.0 - s * t2);
    let map = MobiusMap {
        a: Complex64::from_polar(s, alpha),
        phase: -alpha,
    };
    (map, rho)
}

fn check_concentric(kappa: f64, rho: f64, m: i32) -> Result<()> {
    if !(kappa > -1.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("contrast {kappa} must exceed -1")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("radius {rho} must lie in (0, 1)")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("Fourier index must be nonzero".into()));
    }
    Ok(())
}

/// Eigenvalue of `Lambda(1 + kappa chi_{D_rho}) - Lambda(1)` for `f_m`:
/// `-2 mu rho^{2|m|} / (|m| (1 + mu rho^{2|m|}))` with `mu = kappa / (kappa + 2)`.
pub fn concentric_difference_eigenvalue(kappa: f64, rho: f64, m: i32) -> Result<f64> {
    check_concentric(kappa, rho, m)?;
    let n = m.unsigned_abs() as f64;
    let t = kappa / (kappa + 2.0) * rho.powf(2.0 * n);
    Ok(-2.0 * t / (n * (1.0 + t)))
}

/// Same eigenvalue obtained by solving the transmission problem for the
/// separated mode `r^{|m|} e^{i m theta}` numerically.
///
/// Unknowns are the interior amplitude `A` and the exterior amplitudes in
/// `B r^n + C_s rho^{2n} r^{-n}` (the scaling keeps the system bounded for
/// large `n`); rows are continuity and flux matching at `rho` and the unit
/// Neumann condition at `r = 1`.
pub fn transmission_matching_eigenvalue(kappa: f64, rho: f64, m: i32) -> Result<f64> {
    check_concentric(kappa, rho, m)?;
    let n = m.unsigned_abs() as f64;
    let g = rho.powf(2.0 * n);
    #[rustfmt::skip]
    let system = Matrix3::new(
        1.0,         -1.0,  -1.0,
        1.0 + kappa, -1.0,   1.0,
        0.0,          n,    -n * g,
    );
    let rhs = Vector3::new(0.0, 0.0, 1.0);
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter("singular transmission system".into()))?;
    Ok(sol[1] + g * sol[2] - 1.0 / n)
}

/// Largest deviation between the closed-form eigenvalues and the matching
/// solver over `1 <= |m| <= max_m`.
pub fn eigenvalue_gate(kappa: f64, rho: f64, max_m: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in 1..=max_m as i32 {
        let a = concentric_difference_eigenvalue(kappa, rho, m)?;
        let b = transmission_matching_eigenvalue(kappa, rho, m)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// Relative boundary potentials `g_m` at nodes `theta_l = 2 pi l / (2N + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    order: usize,
    half_nodes: usize,
    // samples[i] belongs to fourier_indices(order)[i]
    samples: Vec<Vec<Complex64>>,
}

impl BoundarySamples {
    pub fn new(order: usize, half_nodes: usize, samples: Vec<Vec<Complex64>>) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroOrder);
        }
        if half_nodes < order {
            return Err(Error::InvalidParameter(format!(
                "N = {half_nodes} cannot resolve Fourier modes up to M = {order}"
            )));
        }
        let nodes = 2 * half_nodes + 1;
        if samples.len() != 2 * order || samples.iter().any(|s| s.len() != nodes) {
            return Err(Error::Format(format!(
                "expected {} sample vectors of length {nodes}",
                2 * order
            )));
        }
        Ok(Self {
            order,
            half_nodes,
            samples,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `N`; there are `2N + 1` nodes.
    pub fn half_nodes(&self) -> usize {
        self.half_nodes
    }

    pub fn node_count(&self) -> usize {
        2 * self.half_nodes + 1
    }

    /// Samples of `g_m`.
    pub fn get(&self, m: i32) -> &[Complex64] {
        &self.samples[crate::forward::fourier_position(self.order, m)]
    }

    /// `(m, g_m)` pairs in the fixed index order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &[Complex64])> {
        fourier_indices(self.order)
            .into_iter()
            .zip(self.samples.iter().map(Vec::as_slice))
    }
}

fn node_angles(nodes: usize) -> Vec<f64> {
    (0..nodes)
        .map(|l| 2.0 * PI * l as f64 / nodes as f64)
        .collect()
}

/// Fourier coefficients `<h, f_n>` for `|n| <= N` by FFT, indexed `n + N`.
fn fourier_coefficients(values: &[Complex64], planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let nodes = values.len();
    let half = (nodes - 1) / 2;
    let mut buf = values.to_vec();
    planner.plan_fft_forward(nodes).process(&mut buf);
    let scale = (2.0 * PI).sqrt() / nodes as f64;
    (-(half as i64)..=half as i64)
        .map(|n| buf[n.rem_euclid(nodes as i64) as usize] * scale)
        .collect()
}

/// Simulates `g_m`, `m in Z'_M`, on `2N + 1` equispaced boundary nodes.
pub fn simulate_boundary_potentials(
    inclusion: &DiskInclusion,
    order: usize,
    half_nodes: usize,
) -> Result<BoundarySamples> {
    if order == 0 {
        return Err(Error::ZeroOrder);
    }
    if half_nodes < 4 * order {
        return Err(Error::InvalidParameter(format!(
            "N = {half_nodes} is below the required 4M = {}",
            4 * order
        )));
    }
    let nodes = 2 * half_nodes + 1;
    let half = half_nodes as i64;
    let (map, rho) = mobius_for_disk(inclusion);
    let kappa = inclusion.kappa();
    let theta = node_angles(nodes);
    let norm = 1.0 / (2.0 * PI).sqrt();

    let eigen: Vec<f64> = (-half..=half)
        .map(|n| {
            if n == 0 {
                Ok(0.0)
            } else {
                concentric_difference_eigenvalue(kappa, rho, n as i32)
            }
        })
        .collect::<Result<_>>()?;

    // Concentric-frame node z_l: argument of Phi(z_l) and the Jacobian |Phi'(z_l)|.
    let transported: Vec<(f64, f64)> = theta
        .iter()
        .map(|&t| {
            let z = Complex64::from_polar(1.0, t);
            (map.inverse(z).arg(), map.inverse_derivative(z).norm())
        })
        .collect();
    // Physical node: angle of Psi(z_l), where the concentric potential is read.
    let pulled: Vec<f64> = theta
        .iter()
        .map(|&t| map.apply(Complex64::from_polar(1.0, t)).arg())
        .collect();
    // synth[l][n + N] = f_n(pulled[l])
    let synth: Vec<Vec<Complex64>> = pulled
        .iter()
        .map(|&phi| {
            (-half..=half)
                .map(|n| Complex64::from_polar(norm, n as f64 * phi))
                .collect()
        })
        .collect();

    let mut planner = FftPlanner::new();
    let samples = fourier_indices(order)
        .into_iter()
        .map(|m| {
            let current: Vec<Complex64> = transported
                .iter()
                .map(|&(arg, jac)| Complex64::from_polar(norm * jac, m as f64 * arg))
                .collect();
            let coeffs = fourier_coefficients(&current, &mut planner);
            let potential: Vec<Complex64> = coeffs
                .iter()
                .zip(&eigen)
                .map(|(c, lam)| c * lam)
                .collect();
            let mut g: Vec<Complex64> = synth
                .iter()
                .map(|row| row.iter().zip(&potential).map(|(e, w)| e * w).sum())
                .collect();
            let mean = g.iter().sum::<Complex64>() / nodes as f64;
            for v in &mut g {
                *v -= mean;
            }
            g
        })
        .collect();
    BoundarySamples::new(order, half_nodes, samples)
}

/// Trapezoidal-rule data matrix `a_{m,n} = <g_m, f_n>` evaluated with one FFT
/// per row.
pub fn data_matrix_from_potentials(samples: &BoundarySamples) -> DataMatrix {
    let order = samples.order();
    let half = samples.half_nodes() as i64;
    let mut planner = FftPlanner::new();
    let mut out = DataMatrix::zeros(order).expect("order is positive");
    for (m, g) in samples.iter() {
        let coeffs = fourier_coefficients(g, &mut planner);
        for n in fourier_indices(order) {
            out.set(m, n, coeffs[(n as i64 + half) as usize]);
        }
    }
    out
}

/// Relative Gaussian noise level `sigma` and generator seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Adds noise drawn with a ChaCha8 generator seeded from `spec.seed`.
/// Returns the noisy matrix and `delta = sigma * ||A||_F` of the clean matrix.
pub fn add_noise(data: &DataMatrix, spec: &NoiseSpec) -> Result<(DataMatrix, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise_with_rng(data, spec.sigma, &mut rng)
}

/// Adds `N(0, sigma^2 Re(a)^2)` to `Re(a)` and `N(0, sigma^2 Im(a)^2)` to
/// `Im(a)` for every entry, visiting entries row-major and drawing one
/// Box–Muller pair per entry.
pub fn add_noise_with_rng<R: Rng + ?Sized>(
    data: &DataMatrix,
    sigma: f64,
    rng: &mut R,
) -> Result<(DataMatrix, f64)> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {sigma} must be >= 0")));
    }
    let mut out = data.clone();
    let mut variance = 0.0;
    for z in out.entries_mut() {
        let (sr, si) = (sigma * z.re, sigma * z.im);
        variance += sr * sr + si * si;
        let (g0, g1) = box_muller(rng);
        z.re += sr.abs() * g0;
        z.im += si.abs() * g1;
    }
    Ok((out, variance.sqrt()))
}

fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u in (0, 1], v in [0, 1)
    let u = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let v = (rng.next_u64() >> 11) as f64 * SCALE;
    let radius = libm::sqrt(-2.0 * libm::log(u));
    let angle = 2.0 * PI * v;
    (radius * libm::cos(angle), radius * libm::sin(angle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusion_validation() {
        assert!(DiskInclusion::new(Complex64::new(0.5, 0.0), 0.5, 0.2).is_err());
        assert!(DiskInclusion::new(Complex64::new(0.0, 0.0), 0.3, -1.0).is_err());
        assert!(DiskInclusion::new(Complex64::new(0.0, 0.0), 0.0, 0.2).is_err());
        assert!(DiskInclusion::new(Complex64::new(0.25, 0.433), 0.2, 0.2).is_ok());
    }

    #[test]
    fn centered_inclusion_uses_identity() {
        let inc = DiskInclusion::new(Complex64::new(0.0, 0.0), 0.3, 4.0).unwrap();
        let (map, rho) = mobius_for_disk(&inc);
        assert_eq!(map, MobiusMap::identity());
        assert_eq!(rho, 0.3);
    }

    #[test]
    fn inclusion_circle_maps_to_concentric_circle() {
        let inc = DiskInclusion::new(Complex64::new(0.25, 0.75f64.sqrt() / 2.0), 0.2, 0.2).unwrap();
        let (map, rho) = mobius_for_disk(&inc);
        for i in 0..64 {
            let t = 2.0 * PI * i as f64 / 64.0;
            let z = inc.center() + Complex64::from_polar(inc.radius(), t);
            assert!((map.apply(z).norm() - rho).abs() < 1e-12);
        }
        assert!(map.apply(inc.center()).norm() < rho);
    }

    #[test]
    fn inverse_and_derivatives() {
        let map = MobiusMap::new(Complex64::new(0.3, -0.4), 0.7).unwrap();
        for i in 0..20 {
            let z = Complex64::from_polar(0.05 * i as f64, 0.9 * i as f64);
            assert!((map.inverse(map.apply(z)) - z).norm() < 1e-14);
            let h = 1e-6;
            let fd = (map.apply(z + h) - map.apply(z - h)) / (2.0 * h);
            assert!((fd - map.derivative(z)).norm() < 1e-8);
            let w = map.apply(z);
            assert!((map.inverse_derivative(w) * map.derivative(z) - 1.0).norm() < 1e-12);
        }
        assert!(MobiusMap::new(Complex64::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn eigenvalue_limits() {
        assert_eq!(concentric_difference_eigenvalue(0.0, 0.5, 3).unwrap(), 0.0);
        let small = concentric_difference_eigenvalue(0.4, 1e-3, 2).unwrap();
        assert!(small.abs() < 1e-11);
        assert!(concentric_difference_eigenvalue(-1.0, 0.5, 1).is_err());
        assert!(concentric_difference_eigenvalue(0.2, 1.0, 1).is_err());
        assert!(concentric_difference_eigenvalue(0.2, 0.5, 0).is_err());
        let a = concentric_difference_eigenvalue(0.2, 0.2, 1).unwrap();
        let b = transmission_matching_eigenvalue(0.2, 0.2, 1).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn zero_contrast_gives_zero_samples() {
        let inc = DiskInclusion::new(Complex64::new(0.1, 0.2), 0.3, 0.0).unwrap();
        let s = simulate_boundary_potentials(&inc, 3, 12).unwrap();
        assert!(s.iter().all(|(_, g)| g.iter().all(|z| z.norm() == 0.0)));
        assert!(simulate_boundary_potentials(&inc, 3, 11).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_fourier_modes() {
        let (order, half) = (4, 16);
        let nodes = 2 * half + 1;
        let theta = node_angles(nodes);
        let norm = 1.0 / (2.0 * PI).sqrt();
        let samples = fourier_indices(order)
            .into_iter()
            .map(|m| {
                theta
                    .iter()
                    .map(|&t| Complex64::from_polar(norm, m as f64 * t))
                    .collect()
            })
            .collect();
        let s = BoundarySamples::new(order, half, samples).unwrap();
        let a = data_matrix_from_potentials(&s);
        for m in fourier_indices(order) {
            for n in fourier_indices(order) {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((a.get(m, n) - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn noise_delta_and_reproducibility() {
        let mut a = DataMatrix::zeros(2).unwrap();
        a.set(1, 1, Complex64::new(1.0, 0.0));
        let (noisy, delta) = add_noise(&a, &NoiseSpec { sigma: 0.01, seed: 4 }).unwrap();
        assert!((delta - 0.01).abs() < 1e-15);
        assert_eq!(noisy.get(1, 1).im, 0.0);
        assert_ne!(noisy.get(1, 1).re, 1.0);
        let (again, _) = add_noise(&a, &NoiseSpec { sigma: 0.01, seed: 4 }).unwrap();
        assert_eq!(noisy, again);
        let (same, delta) = add_noise(&a, &NoiseSpec { sigma: 0.0, seed: 4 }).unwrap();
        assert_eq!(same, a);
        assert_eq!(delta, 0.0);
        assert!(add_noise(&a, &NoiseSpec { sigma: -0.1, seed: 0 }).is_err());
    }
}
