//! Rasterizing a coefficient set to CSV and PGM files.
//!
//! ```text
//! cargo run --example raster_export -- /tmp/raster
//! ```

use std::path::PathBuf;

use zernike_eit::raster::{Part, RasterGrid};
use zernike_eit::{ZernikeCoefficients, ZernikeIndex};

fn main() -> zernike_eit::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("zernike-raster"));
    std::fs::create_dir_all(&dir)?;

    let mut c = ZernikeCoefficients::zeros(6)?;
    c.set(ZernikeIndex::new(3, 0), 1.0.into())?;
    c.set(ZernikeIndex::new(0, 2), 0.4.into())?;
    c.symmetrize_real();

    for part in [Part::Real, Part::Abs] {
        let grid = RasterGrid::evaluate(&c, 96, part)?;
        let (lo, hi) = grid.range().unwrap();
        let stem = format!("pattern_{part}");
        grid.write_files(&dir, &stem)?;
        println!("{part:>4}: range [{lo:+.4}, {hi:+.4}] -> {}", dir.join(format!("{stem}.pgm")).display());
    }

    // coarse preview on the terminal
    let grid = RasterGrid::evaluate(&c, 21, Part::Real)?;
    let (lo, hi) = grid.range().unwrap();
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for row in 0..grid.resolution() {
        let line: String = (0..grid.resolution())
            .map(|col| match grid.get(row, col) {
                Some(v) => shades[(((v - lo) / (hi - lo)) * 9.0).round() as usize],
                None => ' ',
            })
            .flat_map(|ch| [ch, ch])
            .collect();
        println!("{line}");
    }
    Ok(())
}
