//! Assembling the block operator and applying the linearized forward map.

use num_complex::Complex64;
use zernike_eit::{
    apply_forward, coefficient, diagonal_data_to_matrix, extract_diagonals, BlockDiagonalOperator,
    ZernikeCoefficients, ZernikeIndex,
};

fn main() -> zernike_eit::Result<()> {
    let order = 4;
    let op = BlockDiagonalOperator::assemble(order)?;
    println!("M = {order}: {} blocks of sizes {:?}", op.block_count(), op.block_sizes());
    println!("dense dimension {}", op.dimension());

    let block = op.block(1);
    println!("\nblock |j| = 1 (lower triangular):");
    for row in 0..block.dim() {
        let entries: Vec<String> = (0..block.dim()).map(|col| format!("{:>10.5}", block.get(row, col))).collect();
        println!("  {}", entries.join(" "));
    }
    println!("a^(1,0)_(1,2) = {:.6}", coefficient(1, 0, 1, 2));
    println!("a^(1,0)_(1,3) = {:.6} (off the first diagonal)", coefficient(1, 0, 1, 3));

    let mut c = ZernikeCoefficients::zeros(order)?;
    c.set(ZernikeIndex::new(0, 0), Complex64::new(1.0, 0.0))?;
    c.set(ZernikeIndex::new(2, 1), Complex64::new(0.0, -0.3))?;
    let diag = apply_forward(&c)?;
    for (j, v) in diag.iter().filter(|(_, v)| v.iter().any(|z| z.norm() > 0.0)) {
        println!("\ndiagonal {j}:");
        for z in v {
            println!("  {z:.6}");
        }
    }

    let matrix = diagonal_data_to_matrix(&diag);
    println!("\nfull data matrix is {0} x {0}, Frobenius norm {1:.6}", matrix.side(), matrix.frobenius_norm());
    assert_eq!(extract_diagonals(&matrix, true), diag);
    Ok(())
}
