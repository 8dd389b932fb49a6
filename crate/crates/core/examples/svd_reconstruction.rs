//! Truncated SVD reconstruction of a disk inclusion, both at a fixed
//! truncation index and with the discrepancy principle.

use num_complex::Complex64;
use zernike_eit::disk::{add_noise, data_matrix_from_potentials, simulate_boundary_potentials, DiskInclusion, NoiseSpec};
use zernike_eit::raster::{Part, RasterGrid};
use zernike_eit::{extract_diagonals, Method, Solver};

fn summarize(label: &str, sol: &zernike_eit::RegularizedSolution) -> zernike_eit::Result<()> {
    let grid = RasterGrid::evaluate(&sol.coeffs, 64, Part::Real)?;
    let (lo, hi) = grid.range().expect("grid has interior points");
    println!(
        "{label}: p = {:>3}, residual {:.3e}, attained {}, image range [{lo:.4}, {hi:.4}]",
        sol.p, sol.residual, sol.attained
    );
    Ok(())
}

fn main() -> zernike_eit::Result<()> {
    let order = 32;
    let inclusion = DiskInclusion::new(Complex64::new(0.25, 3f64.sqrt() / 4.0), 0.2, 0.2)?;
    let clean = data_matrix_from_potentials(&simulate_boundary_potentials(&inclusion, order, 8 * order)?);
    let (noisy, delta) = add_noise(&clean, &NoiseSpec { sigma: 0.01, seed: 0 })?;
    let diag = extract_diagonals(&noisy, true);

    let solver = Solver::new(order)?;
    println!("delta = {delta:.4e}, largest index {}", solver.max_index());

    let full = solver.solve(&extract_diagonals(&clean, true), solver.max_index(), Method::Svd)?;
    summarize("clean, full rank", &full)?;

    for p in [20, 88, 200] {
        summarize("noisy, fixed    ", &solver.solve(&diag, p, Method::Svd)?)?;
    }
    for omega in [1.0, 1.5, 3.0] {
        let sol = solver.morozov(&diag, delta, omega, Method::Svd)?;
        summarize(&format!("omega = {omega:<4}   "), &sol)?;
    }
    Ok(())
}
