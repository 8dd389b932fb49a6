use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use zernike_eit::disk::{DiskInclusion, NoiseSpec};
use zernike_eit::inversion::{Method, Solver};
use zernike_eit::io::{JsonFormat, NoiseRecord};
use zernike_eit::pipeline::{self, InclusionExperiment, ReconstructConfig, SimulateConfig, Truncation};
use zernike_eit::raster::Part;
use zernike_eit::{Error, Result};

#[derive(Parser)]
#[command(name = "zernike-eit", version, about = "Zernike-basis reconstruction for linearized EIT on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate exact difference data for a disk inclusion
    Simulate {
        #[command(flatten)]
        inclusion: InclusionArgs,
        #[arg(long = "M")]
        order: usize,
        /// Half the number of boundary nodes (default 8M)
        #[arg(long = "N")]
        half_nodes: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Add relative Gaussian noise to a data matrix
    Noise {
        data: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Reconstruct Zernike coefficients from a data file
    Reconstruct {
        data: PathBuf,
        #[arg(long, default_value = "svd")]
        method: Method,
        /// Fixed truncation index
        #[arg(long, conflicts_with_all = ["delta", "delta_file"])]
        p: Option<usize>,
        /// Noise level for the discrepancy principle
        #[arg(long, conflicts_with = "delta_file", requires = "omega")]
        delta: Option<f64>,
        /// Read the noise level from a delta.json file
        #[arg(long, requires = "omega")]
        delta_file: Option<PathBuf>,
        /// Discrepancy fudge factor (>= 1)
        #[arg(long)]
        omega: Option<f64>,
        /// Solve the primary diagonal entries only
        #[arg(long)]
        no_averaging: bool,
        /// Enforce the symmetry of a real perturbation
        #[arg(long)]
        real: bool,
        #[arg(long, default_value = "solution.json")]
        out: PathBuf,
    },
    /// List the leading singular values of the forward operator
    Svdinfo {
        #[arg(long = "M")]
        order: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Also write the listed singular functions as coefficient files
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Evaluate a coefficient or solution file on a grid
    Raster {
        coeffs: PathBuf,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        #[arg(long, default_value = "real")]
        part: Part,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "raster")]
        stem: String,
    },
    /// Simulate, add noise, reconstruct and rasterize in one go
    ReproduceInclusion {
        #[arg(long = "M", default_value_t = 32)]
        order: usize,
        #[arg(long = "N")]
        half_nodes: Option<usize>,
        #[arg(long, default_value = "0.25,0.4330127018922193")]
        center: String,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(long, default_value_t = 0.2)]
        kappa: f64,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "svd")]
        method: Method,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Fixed truncation index instead of the discrepancy principle
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InclusionArgs {
    /// Inclusion center as RE,IM
    #[arg(long)]
    center: String,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    kappa: f64,
}

fn parse_center(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::InvalidParameter(format!("center '{text}' must be RE,IM"));
    match parts.as_slice() {
        [re, im] => Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn print_solution_summary(sol: &zernike_eit::RegularizedSolution) {
    println!(
        "method {}  p {}  residual {:.6e}  attained {}",
        sol.method.as_str(),
        sol.p,
        sol.residual,
        sol.attained
    );
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate {
            inclusion,
            order,
            half_nodes,
            out,
        } => {
            let inclusion = DiskInclusion::new(parse_center(&inclusion.center)?, inclusion.radius, inclusion.kappa)?;
            let rep = pipeline::simulate(
                &SimulateConfig {
                    inclusion,
                    order,
                    half_nodes,
                },
                &out,
            )?;
            println!("M {}  N {}  nodes {}", rep.order, rep.half_nodes, 2 * rep.half_nodes + 1);
            println!("concentric radius {}  mobius a {}  phase {}", rep.rho, rep.mobius_a, rep.mobius_phase);
            println!("eigenvalue gate deviation {:e}", rep.gate_deviation);
            println!("||A||_F {:e}  (delta = sigma * ||A||_F)", rep.frobenius_norm);
            println!("wrote {} and {}", rep.samples_path.display(), rep.data_path.display());
            Ok(0)
        }
        Command::Noise { data, sigma, seed, out } => {
            let rec = pipeline::noise(&data, &NoiseSpec { sigma, seed }, &out)?;
            println!("sigma {}  seed {}  delta {:e}", rec.sigma, rec.seed, rec.delta);
            Ok(0)
        }
        Command::Reconstruct {
            data,
            method,
            p,
            delta,
            delta_file,
            omega,
            no_averaging,
            real,
            out,
        } => {
            let delta = match (delta, delta_file) {
                (Some(d), _) => Some(d),
                (None, Some(path)) => Some(NoiseRecord::read_json(path)?.delta),
                (None, None) => None,
            };
            let truncation = match (p, delta, omega) {
                (Some(p), None, None) => Truncation::Fixed(p),
                (None, Some(delta), Some(omega)) => Truncation::Discrepancy { delta, omega },
                _ => {
                    return Err(Error::InvalidParameter(
                        "give either --p or a noise level (--delta or --delta-file) with --omega".into(),
                    ))
                }
            };
            let config = ReconstructConfig {
                method,
                truncation,
                averaging: if no_averaging { Some(false) } else { None },
                real,
            };
            let sol = pipeline::reconstruct(&data, &config, &out)?;
            print_solution_summary(&sol);
            Ok(pipeline::success_code(sol.attained))
        }
        Command::Svdinfo { order, count, export } => {
            let solver = Solver::new(order)?;
            let entries = pipeline::singular_spectrum(&solver, count);
            println!("{:>8} {:>24} {:>6} {:>10} {:>12}", "position", "singular value", "block", "occurrence", "multiplicity");
            for e in &entries {
                println!(
                    "{:>8} {:>24.16e} {:>6} {:>10} {:>12}",
                    e.position, e.value, e.block, e.occurrence, e.multiplicity
                );
            }
            if let Some(dir) = export {
                let paths = pipeline::export_singular_functions(&solver, &entries, &dir)?;
                println!("wrote {} singular functions to {}", paths.len(), dir.display());
            }
            Ok(0)
        }
        Command::Raster {
            coeffs,
            resolution,
            part,
            out,
            stem,
        } => {
            let grid = pipeline::raster(&coeffs, resolution, part, &out, &stem)?;
            if let Some((lo, hi)) = grid.range() {
                println!("{part} part on {resolution}x{resolution} grid, range [{lo:e}, {hi:e}]");
            }
            Ok(0)
        }
        Command::ReproduceInclusion {
            order,
            half_nodes,
            center,
            radius,
            kappa,
            sigma,
            seed,
            method,
            omega,
            p,
            resolution,
            out,
        } => {
            let exp = InclusionExperiment {
                inclusion: DiskInclusion::new(parse_center(&center)?, radius, kappa)?,
                order,
                half_nodes,
                noise: NoiseSpec { sigma, seed },
                method,
                omega,
                p,
                resolution,
            };
            let rep = pipeline::reproduce_inclusion(&exp, &out)?;
            println!("delta {:e}", rep.noise.delta);
            print_solution_summary(&rep.solution);
            println!("wrote results to {}", out.display());
            Ok(pipeline::success_code(rep.solution.attained))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(pipeline::exit_code(&err) as u8)
        }
    }
}
