use std::time::Instant;

use num_complex::Complex64;

use zernike_eit::disk::{
    add_noise, concentric_difference_eigenvalue, data_matrix_from_potentials, simulate_boundary_potentials,
    BoundarySamples, DiskInclusion, NoiseSpec,
};
use zernike_eit::forward::fourier_indices;
use zernike_eit::io::{JsonFormat, NoiseRecord};
use zernike_eit::pipeline::{self, SimulateConfig};
use zernike_eit::DataMatrix;

fn reference() -> DiskInclusion {
    DiskInclusion::new(Complex64::new(0.25, 3f64.sqrt() / 4.0), 0.2, 0.2).unwrap()
}

fn max_entry_gap(a: &DataMatrix, b: &DataMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

#[test]
fn zero_contrast_gives_zero_matrix() {
    let inc = DiskInclusion::new(Complex64::new(0.3, -0.1), 0.25, 0.0).unwrap();
    let data = data_matrix_from_potentials(&simulate_boundary_potentials(&inc, 6, 48).unwrap());
    assert_eq!(data, DataMatrix::zeros(6).unwrap());
}

#[test]
fn concentric_matrix_is_diagonal() {
    let inc = DiskInclusion::new(Complex64::new(0.0, 0.0), 0.35, 3.0).unwrap();
    let data = data_matrix_from_potentials(&simulate_boundary_potentials(&inc, 8, 64).unwrap());
    for m in fourier_indices(8) {
        for n in fourier_indices(8) {
            let expected = if m == n {
                concentric_difference_eigenvalue(3.0, 0.35, m).unwrap()
            } else {
                0.0
            };
            assert!((data.get(m, n) - expected).norm() < 1e-10, "({m}, {n})");
        }
    }
}

#[test]
fn off_center_data_has_real_perturbation_symmetries() {
    let data = data_matrix_from_potentials(&simulate_boundary_potentials(&reference(), 12, 96).unwrap());
    let scale = data.frobenius_norm();
    for m in fourier_indices(12) {
        for n in fourier_indices(12) {
            let a = data.get(m, n);
            assert!((a - data.get(n, m).conj()).norm() < 1e-12 * scale, "self-adjointness at ({m}, {n})");
            assert!((a - data.get(-m, -n).conj()).norm() < 1e-12 * scale, "conjugation at ({m}, {n})");
        }
    }
    // the dominant structure sits on the main diagonal with negative entries
    assert!(fourier_indices(12).iter().all(|&m| data.get(m, m).re < 0.0));
}

#[test]
fn refining_the_nodes_leaves_the_data_unchanged() {
    let coarse = data_matrix_from_potentials(&simulate_boundary_potentials(&reference(), 16, 128).unwrap());
    let fine = data_matrix_from_potentials(&simulate_boundary_potentials(&reference(), 16, 256).unwrap());
    assert!(max_entry_gap(&coarse, &fine) < 1e-14);
}

#[test]
fn reference_geometry_simulates_quickly_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let report = pipeline::simulate(
        &SimulateConfig {
            inclusion: reference(),
            order: 32,
            half_nodes: None,
        },
        dir.path(),
    )
    .unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(report.half_nodes, 256);
    assert!(report.gate_deviation <= pipeline::EIGENVALUE_GATE);
    for path in [&report.samples_path, &report.data_path] {
        let bytes = std::fs::read_to_string(path).unwrap();
        let again = if path.ends_with("data.json") {
            DataMatrix::from_json(&bytes).unwrap().to_json().unwrap()
        } else {
            BoundarySamples::from_json(&bytes).unwrap().to_json().unwrap()
        };
        assert_eq!(again, bytes);
    }
    let samples = BoundarySamples::read_json(&report.samples_path).unwrap();
    assert_eq!(
        data_matrix_from_potentials(&samples),
        DataMatrix::read_json(&report.data_path).unwrap()
    );
}

#[test]
fn delta_file_matches_hand_summed_variance() {
    let dir = tempfile::tempdir().unwrap();
    let report = pipeline::simulate(
        &SimulateConfig {
            inclusion: reference(),
            order: 32,
            half_nodes: None,
        },
        dir.path(),
    )
    .unwrap();
    let spec = NoiseSpec { sigma: 0.01, seed: 99 };
    let record = pipeline::noise(&report.data_path, &spec, dir.path()).unwrap();
    let clean = DataMatrix::read_json(&report.data_path).unwrap();
    let mut variance = 0.0;
    for row in clean.rows() {
        for z in row {
            variance += (0.01 * z.re).powi(2) + (0.01 * z.im).powi(2);
        }
    }
    assert!((record.delta - variance.sqrt()).abs() < 1e-12);
    assert_eq!(NoiseRecord::read_json(dir.path().join("delta.json")).unwrap(), record);
    let noisy = DataMatrix::read_json(dir.path().join("data_noisy.json")).unwrap();
    assert_eq!(noisy, add_noise(&clean, &spec).unwrap().0);
}

#[test]
fn noise_statistics_follow_the_model() {
    let mut clean = DataMatrix::zeros(16).unwrap();
    for m in fourier_indices(16) {
        for n in fourier_indices(16) {
            clean.set(m, n, Complex64::new(1.0, -2.0));
        }
    }
    let (noisy, _) = add_noise(&clean, &NoiseSpec { sigma: 0.1, seed: 5 }).unwrap();
    let count = noisy.entries().len() as f64;
    let (mut sr, mut si, mut qr, mut qi) = (0.0, 0.0, 0.0, 0.0);
    for z in noisy.entries() {
        let (er, ei) = ((z.re - 1.0) / 0.1, (z.im + 2.0) / 0.2);
        sr += er;
        si += ei;
        qr += er * er;
        qi += ei * ei;
    }
    // 1024 draws: mean within 4 standard errors, variance within 15 percent
    assert!((sr / count).abs() < 4.0 / count.sqrt());
    assert!((si / count).abs() < 4.0 / count.sqrt());
    assert!((qr / count - 1.0).abs() < 0.15);
    assert!((qi / count - 1.0).abs() < 0.15);
}
