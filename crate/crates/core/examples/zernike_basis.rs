//! Evaluating the orthonormal Zernike basis and a small expansion.
//!
//! ```text
//! cargo run --example zernike_basis
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use zernike_eit::zernike::angular_range;
use zernike_eit::{eval_expansion, radial_poly, zernike_eval, ZernikeCoefficients, ZernikeIndex};

fn main() -> zernike_eit::Result<()> {
    println!("radial polynomials R^j_(j+2k)(r) at r = 0.5");
    for j in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|k| format!("{:>10.6}", radial_poly(j, k, 0.5).unwrap()))
            .collect();
        println!("  j = {j}: {}", row.join(" "));
    }

    // psi_{j,k} has unit L2 norm on the disk, so its value at the rim is the
    // normalization sqrt((|j| + 2k + 1) / pi) times a phase.
    let idx = ZernikeIndex::new(-2, 1);
    let rim = zernike_eval(idx, 1.0, PI / 3.0)?;
    println!(
        "\npsi(-2,1) at the rim, theta = pi/3: {rim:.6} (|psi| = {:.6}, N = {:.6})",
        rim.norm(),
        idx.normalization()
    );

    let order = 3;
    print!("\nangular indices for M = {order}:");
    for j in angular_range(order) {
        print!(" {j}");
    }
    println!();

    let mut c = ZernikeCoefficients::zeros(order)?;
    c.set(ZernikeIndex::new(0, 0), Complex64::new(PI.sqrt(), 0.0))?;
    c.set(ZernikeIndex::new(1, 0), Complex64::new(0.5, 0.0))?;
    c.symmetrize_real();
    let points = [(0.0, 0.0), (0.5, 0.0), (0.5, PI), (0.9, PI / 2.0)];
    let values = eval_expansion(&c, &points)?;
    println!("\n1 + 0.5 (psi(1,0) + psi(-1,0)) at sample points:");
    for ((r, t), v) in points.iter().zip(values) {
        println!("  r = {r:.2}, theta = {t:.3}: {:.6}", v.re);
    }
    Ok(())
}
