//! The simulate, noise, reconstruct and raster steps through files, the same
//! chain the `reproduce-inclusion` subcommand runs.

use std::path::PathBuf;

use zernike_eit::pipeline::{reproduce_inclusion, InclusionExperiment};

fn main() -> zernike_eit::Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("zernike-inclusion"));
    let exp = InclusionExperiment {
        order: 16,
        resolution: 64,
        ..InclusionExperiment::default()
    };
    let report = reproduce_inclusion(&exp, &out)?;
    println!("gate deviation {:.2e}", report.simulation.gate_deviation);
    println!("delta          {:.4e}", report.noise.delta);
    println!(
        "chosen p       {} (residual {:.4e}, attained {})",
        report.solution.p, report.solution.residual, report.solution.attained
    );
    let mut files: Vec<_> = std::fs::read_dir(&out)?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    files.sort();
    println!("files in {}:", out.display());
    for f in files {
        println!("  {}", f.to_string_lossy());
    }
    Ok(())
}
