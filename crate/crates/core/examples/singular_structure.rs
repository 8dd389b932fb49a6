//! Singular spectrum of the forward operator at `M = 32`.
//!
//! Each block is factored separately in extended precision, so the trailing
//! singular values near `1e-24` are resolved rather than flushed to zero.

use zernike_eit::pipeline::{singular_function, singular_spectrum};
use zernike_eit::{Method, Solver};

fn main() -> zernike_eit::Result<()> {
    let solver = Solver::new(32)?;
    let spectrum = singular_spectrum(&solver, 40);
    println!("{:>4} {:>14} {:>4} {:>4} {:>4}", "pos", "sigma", "|j|", "occ", "mult");
    for e in &spectrum {
        println!(
            "{:>4} {:>14.6e} {:>4} {:>4} {:>4}",
            e.position, e.value, e.block, e.occurrence, e.multiplicity
        );
    }

    let all = solver.block_svd().full_spectrum();
    println!("\n{} singular values in total", all.len());
    println!("largest  {:.6e}", all[0]);
    println!("smallest {:.6e}", all[all.len() - 1]);
    println!("block 0 smallest {:.6e}", solver.block_svd().factor(0).singular_values[31]);

    let ordering = solver.ordering(Method::Svd);
    println!("\nper-block counts after p = 100: {:?}", &ordering.counts(100)?[..10]);

    let second = singular_function(&solver, 0, 2)?;
    println!("second radial singular function, leading coefficients:");
    for z in second.block(0).iter().take(5) {
        println!("  {:+.6}", z.re);
    }
    Ok(())
}
