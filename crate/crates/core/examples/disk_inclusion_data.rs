//! Exact nonlinear data for an off-center disk inclusion.

use num_complex::Complex64;
use zernike_eit::disk::{
    add_noise, concentric_difference_eigenvalue, data_matrix_from_potentials, eigenvalue_gate, mobius_for_disk,
    simulate_boundary_potentials, DiskInclusion, NoiseSpec,
};

fn main() -> zernike_eit::Result<()> {
    let inclusion = DiskInclusion::new(Complex64::new(0.25, 3f64.sqrt() / 4.0), 0.2, 0.2)?;
    let (map, rho) = mobius_for_disk(&inclusion);
    println!("Mobius map: a = {:.6}, phase = {:.6}", map.a(), map.phase());
    println!("image is the concentric disk of radius {rho:.6}");

    println!("\nconcentric eigenvalues of the difference map:");
    for m in 1..=4 {
        println!("  m = {m}: {:+.6e}", concentric_difference_eigenvalue(inclusion.kappa(), rho, m)?);
    }
    let order = 8;
    let nodes = 8 * order;
    println!("gate deviation up to m = {nodes}: {:.2e}", eigenvalue_gate(inclusion.kappa(), rho, nodes)?);

    let samples = simulate_boundary_potentials(&inclusion, order, nodes)?;
    let data = data_matrix_from_potentials(&samples);
    println!("\ndata matrix for M = {order}, main diagonal:");
    for m in data.indices() {
        println!("  a({m:+},{m:+}) = {:+.6e}", data.get(m, m).re);
    }
    println!("a(1,2) = {:.6e}", data.get(1, 2));

    let (noisy, delta) = add_noise(&data, &NoiseSpec { sigma: 0.01, seed: 0 })?;
    println!("\none percent noise: delta = {delta:.6e}");
    println!("a(1,1) noisy = {:.6e}", noisy.get(1, 1));
    Ok(())
}
