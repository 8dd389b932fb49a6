//! File-based pipeline stages behind the `zernike-eit` binary.
//!
//! Each stage reads and writes the JSON formats of [`crate::io`] and returns
//! a small report; nothing here prints. Errors map to process exit codes via
//! [`exit_code`].

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::disk::{
    add_noise, data_matrix_from_potentials, eigenvalue_gate, mobius_for_disk,
    simulate_boundary_potentials, DiskInclusion, NoiseSpec,
};
use crate::error::{Error, Result};
use crate::forward::{extract_diagonals, DataMatrix, DiagonalData};
use crate::inversion::{Method, RegularizedSolution, Solver};
use crate::io::{DataFile, JsonFormat, NoiseRecord};
use crate::raster::{Part, RasterGrid};
use crate::zernike::{ZernikeCoefficients, ZernikeIndex};

/// Closed-form eigenvalues must agree with the matching solver to this level.
pub const EIGENVALUE_GATE: f64 = 1e-10;

/// Process exit status for an error: 3 for a violated numerical contract,
/// 2 for everything caused by configuration or input files.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalContract(_) => 3,
        _ => 2,
    }
}

/// Exit status of a finished run: 0, or 4 when the discrepancy principle could
/// not be satisfied (the output is still written).
pub fn success_code(attained: bool) -> i32 {
    if attained {
        0
    } else {
        4
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateConfig {
    pub inclusion: DiskInclusion,
    pub order: usize,
    /// Half the node count; `None` selects `8M`.
    pub half_nodes: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub order: usize,
    pub half_nodes: usize,
    pub rho: f64,
    pub mobius_a: Complex64,
    pub mobius_phase: f64,
    pub gate_deviation: f64,
    /// `||A||_F`; noise level `sigma` gives `delta = sigma * ||A||_F`.
    pub frobenius_norm: f64,
    pub samples_path: PathBuf,
    pub data_path: PathBuf,
}

/// Simulates exact data for a disk inclusion and writes `samples.json` and
/// `data.json` into `out`.
pub fn simulate(config: &SimulateConfig, out: &Path) -> Result<SimulateReport> {
    let order = config.order;
    if order == 0 {
        return Err(Error::ZeroOrder);
    }
    let half_nodes = config.half_nodes.unwrap_or(8 * order);
    let (map, rho) = mobius_for_disk(&config.inclusion);
    let gate = eigenvalue_gate(config.inclusion.kappa(), rho, half_nodes)?;
    if gate.is_nan() || gate > EIGENVALUE_GATE {
        return Err(Error::NumericalContract(format!(
            "concentric eigenvalues deviate from the matching solver by {gate:e}"
        )));
    }
    let samples = simulate_boundary_potentials(&config.inclusion, order, half_nodes)?;
    let data = data_matrix_from_potentials(&samples);
    ensure_dir(out)?;
    let samples_path = out.join("samples.json");
    let data_path = out.join("data.json");
    samples.write_json(&samples_path)?;
    data.write_json(&data_path)?;
    Ok(SimulateReport {
        order,
        half_nodes,
        rho,
        mobius_a: map.a(),
        mobius_phase: map.phase(),
        gate_deviation: gate,
        frobenius_norm: data.frobenius_norm(),
        samples_path,
        data_path,
    })
}

/// Adds noise to a data matrix file, writing `data_noisy.json` and
/// `delta.json` into `out`.
pub fn noise(data_path: &Path, spec: &NoiseSpec, out: &Path) -> Result<NoiseRecord> {
    let data = DataMatrix::read_json(data_path)?;
    let (noisy, delta) = add_noise(&data, spec)?;
    let record = NoiseRecord {
        sigma: spec.sigma,
        seed: spec.seed,
        delta,
    };
    ensure_dir(out)?;
    noisy.write_json(out.join("data_noisy.json"))?;
    record.write_json(out.join("delta.json"))?;
    Ok(record)
}

/// How the truncation index is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Fixed(usize),
    Discrepancy { delta: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ReconstructConfig {
    pub method: Method,
    pub truncation: Truncation,
    /// Averaging of mirrored entries for full data matrices; `None` means on.
    /// Diagonal data files are used as given.
    pub averaging: Option<bool>,
    pub real: bool,
}

/// Reduces a data file to diagonal data.
pub fn load_diagonals(path: &Path, averaging: Option<bool>) -> Result<DiagonalData> {
    Ok(match DataFile::read(path)? {
        DataFile::Matrix(m) => extract_diagonals(&m, averaging.unwrap_or(true)),
        DataFile::Diagonals(d) => d,
    })
}

/// Solves for diagonal data already in memory.
pub fn reconstruct_diagonals(diag: &DiagonalData, config: &ReconstructConfig) -> Result<RegularizedSolution> {
    let solver = Solver::new(diag.order())?;
    let sol = match config.truncation {
        Truncation::Fixed(p) => solver.solve(diag, p, config.method)?,
        Truncation::Discrepancy { delta, omega } => solver.morozov(diag, delta, omega, config.method)?,
    };
    if config.real {
        solver.enforce_real(&sol, diag)
    } else {
        Ok(sol)
    }
}

/// Reads a data file, reconstructs and writes the solution to `out_path`.
pub fn reconstruct(data_path: &Path, config: &ReconstructConfig, out_path: &Path) -> Result<RegularizedSolution> {
    let diag = load_diagonals(data_path, config.averaging)?;
    let sol = reconstruct_diagonals(&diag, config)?;
    if let Some(dir) = out_path.parent() {
        ensure_dir(dir)?;
    }
    sol.write_json(out_path)?;
    Ok(sol)
}

/// One singular value in the multiplicity-expanded spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularEntry {
    /// 1-based position counting multiplicity; a doubled value occupies
    /// `position` and `position + 1`.
    pub position: usize,
    pub value: f64,
    /// `|j|` of the block.
    pub block: usize,
    /// 1-based rank of the value inside its block.
    pub occurrence: usize,
    pub multiplicity: usize,
}

/// The singular values of `F^M` covering the first `count` positions.
pub fn singular_spectrum(solver: &Solver, count: usize) -> Vec<SingularEntry> {
    let mut out = Vec::new();
    let mut position = 1;
    for r in solver.ordering(Method::Svd).ranked() {
        if position > count {
            break;
        }
        let multiplicity = if r.block == 0 { 1 } else { 2 };
        out.push(SingularEntry {
            position,
            value: r.value,
            block: r.block,
            occurrence: r.position + 1,
            multiplicity,
        });
        position += multiplicity;
    }
    out
}

/// Right singular function of block `j` as a coefficient set: component
/// `occurrence - 1` of the block SVD placed in angular block `j`.
pub fn singular_function(solver: &Solver, j: i32, occurrence: usize) -> Result<ZernikeCoefficients> {
    let order = solver.order();
    let l = j.unsigned_abs() as usize;
    if l >= order {
        return Err(Error::BlockOutOfRange { j_abs: l, order });
    }
    let factor = solver.block_svd().factor(l);
    if occurrence == 0 || occurrence > factor.dim() {
        return Err(Error::InvalidParameter(format!(
            "block {l} has {} singular values, requested #{occurrence}",
            factor.dim()
        )));
    }
    let mut coeffs = ZernikeCoefficients::zeros(order)?;
    for (k, &x) in factor.v.column(occurrence - 1).iter().enumerate() {
        coeffs.set(ZernikeIndex::new(j, k as u32), Complex64::new(x, 0.0))?;
    }
    Ok(coeffs)
}

/// Writes the singular functions of the listed entries as
/// `singular_<position>.json` (for doubled values: `j = +l` at `position`,
/// `j = -l` at `position + 1`).
pub fn export_singular_functions(solver: &Solver, entries: &[SingularEntry], out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut paths = Vec::new();
    for e in entries {
        let signs: &[i32] = if e.block == 0 { &[1] } else { &[1, -1] };
        for (i, &s) in signs.iter().enumerate() {
            let coeffs = singular_function(solver, s * e.block as i32, e.occurrence)?;
            let path = out.join(format!("singular_{:04}.json", e.position + i));
            coeffs.write_json(&path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Rasterizes a coefficient or solution file into `<stem>.{csv,pgm,pgm.json}`.
pub fn raster(coeffs_path: &Path, resolution: usize, part: Part, out: &Path, stem: &str) -> Result<RasterGrid> {
    let text = fs::read_to_string(coeffs_path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let coeffs = if value.get("p").is_some() {
        RegularizedSolution::from_json(&text)?.coeffs
    } else {
        ZernikeCoefficients::from_json(&text)?
    };
    let grid = RasterGrid::evaluate(&coeffs, resolution, part)?;
    ensure_dir(out)?;
    grid.write_files(out, stem)?;
    Ok(grid)
}

/// Settings for the simulate → noise → reconstruct → raster chain.
#[derive(Debug, Clone, Copy)]
pub struct InclusionExperiment {
    pub inclusion: DiskInclusion,
    pub order: usize,
    pub half_nodes: Option<usize>,
    pub noise: NoiseSpec,
    pub method: Method,
    pub omega: f64,
    /// Fixed truncation index; `None` selects it by the discrepancy principle.
    pub p: Option<usize>,
    pub resolution: usize,
}

impl Default for InclusionExperiment {
    /// Disk of radius 0.2 centered at `(1/4, sqrt(3)/4)` with contrast 0.2,
    /// `M = 32`, one percent noise.
    fn default() -> Self {
        Self {
            inclusion: DiskInclusion::new(Complex64::new(0.25, 3f64.sqrt() / 4.0), 0.2, 0.2)
                .expect("default inclusion is valid"),
            order: 32,
            half_nodes: None,
            noise: NoiseSpec {
                sigma: 0.01,
                seed: 0,
            },
            method: Method::Svd,
            omega: 1.0,
            p: None,
            resolution: 128,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub simulation: SimulateReport,
    pub noise: NoiseRecord,
    pub solution: RegularizedSolution,
}

/// Runs the full chain, writing every intermediate file into `out`.
pub fn reproduce_inclusion(exp: &InclusionExperiment, out: &Path) -> Result<ExperimentReport> {
    let simulation = simulate(
        &SimulateConfig {
            inclusion: exp.inclusion,
            order: exp.order,
            half_nodes: exp.half_nodes,
        },
        out,
    )?;
    let noise = noise(&simulation.data_path, &exp.noise, out)?;
    let truncation = match exp.p {
        Some(p) => Truncation::Fixed(p),
        None => Truncation::Discrepancy {
            delta: noise.delta,
            omega: exp.omega,
        },
    };
    let config = ReconstructConfig {
        method: exp.method,
        truncation,
        averaging: Some(true),
        real: false,
    };
    let solution_path = out.join("solution.json");
    let solution = reconstruct(&out.join("data_noisy.json"), &config, &solution_path)?;
    raster(&solution_path, exp.resolution, Part::Real, out, "reconstruction")?;
    Ok(ExperimentReport {
        simulation,
        noise,
        solution,
    })
}
