mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use zernike_eit::disk::{
    add_noise, concentric_difference_eigenvalue, mobius_for_disk, transmission_matching_eigenvalue, DiskInclusion,
    MobiusMap, NoiseSpec,
};
use zernike_eit::io::JsonFormat;
use zernike_eit::{
    apply_forward, build_ordering, diagonal_data_to_matrix, extract_diagonals, forward_substitution, zernike_eval,
    DataMatrix, DiagonalData, Method, OrderingKind, Solver, ZernikeCoefficients, ZernikeIndex,
};

fn coeffs_strategy(max_order: usize) -> impl Strategy<Value = ZernikeCoefficients> {
    (1..=max_order, any::<u64>()).prop_map(|(order, seed)| common::random_coeffs(order, &mut common::rng(seed)))
}

fn combine(a: &DiagonalData, b: &DiagonalData, s: f64) -> Vec<Complex64> {
    a.iter()
        .zip(b.iter())
        .flat_map(|((_, x), (_, y))| x.iter().zip(y).map(move |(u, v)| u * s + v).collect::<Vec<_>>())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_map_is_linear(order in 1usize..10, s1 in any::<u64>(), s2 in any::<u64>(), scale in -3.0f64..3.0) {
        let c1 = common::random_coeffs(order, &mut common::rng(s1));
        let c2 = common::random_coeffs(order, &mut common::rng(s2));
        let mut sum = c2.clone();
        for (idx, v) in c1.iter() {
            sum.set(idx, v * scale + c2.get(idx).unwrap()).unwrap();
        }
        let lhs: Vec<Complex64> = apply_forward(&sum).unwrap().iter().flat_map(|(_, v)| v.to_vec()).collect();
        let rhs = combine(&apply_forward(&c1).unwrap(), &apply_forward(&c2).unwrap(), scale);
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).norm() <= 1e-13 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn full_solves_invert_forward_map(c in coeffs_strategy(10)) {
        let solver = Solver::new(c.order()).unwrap();
        let data = apply_forward(&c).unwrap();
        for method in [Method::Svd, Method::Triangular] {
            let sol = solver.solve(&data, solver.max_index(), method).unwrap();
            prop_assert!(common::relative_error(&sol.coeffs, &c) < 1e-9);
        }
    }

    #[test]
    fn recursion_is_prefix_stable(j in -10i32..=10, seed in any::<u64>()) {
        let len = 11 - j.unsigned_abs() as usize;
        let mut rng = common::rng(seed);
        let a: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(common::gaussian(&mut rng), common::gaussian(&mut rng)))
            .collect();
        let full = forward_substitution(j, &a, len).unwrap();
        for q in 0..len {
            prop_assert_eq!(&forward_substitution(j, &a, q).unwrap()[..], &full[..q]);
        }
    }

    #[test]
    fn ordering_tables_are_consistent(order in 1usize..24, diagonal in any::<bool>()) {
        let kind = if diagonal { OrderingKind::Diagonal } else { OrderingKind::Singular };
        let map = build_ordering(order, kind).unwrap();
        prop_assert_eq!(map.max_index(), order * (order + 1) / 2);
        let mut previous = vec![0usize; order];
        for p in 1..=map.max_index() {
            let counts = map.counts(p).unwrap();
            prop_assert_eq!(counts.iter().sum::<usize>(), p);
            prop_assert!(counts.iter().zip(&previous).all(|(c, q)| c >= q));
            previous = counts.to_vec();
        }
        let full: Vec<usize> = (0..order).map(|l| order - l).collect();
        prop_assert_eq!(previous, full);
        prop_assert!(map.ranked().windows(2).all(|w| w[0].value >= w[1].value));
    }

    #[test]
    fn truncation_residual_shrinks_to_zero(c in coeffs_strategy(8)) {
        let solver = Solver::new(c.order()).unwrap();
        let data = apply_forward(&c).unwrap();
        let last = solver.solve(&data, solver.max_index(), Method::Svd).unwrap();
        prop_assert!(last.residual <= 1e-12 * (1.0 + data.norm()));
        let first = solver.solve(&data, 1, Method::Svd).unwrap();
        prop_assert!(first.residual <= data.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn conjugate_symmetry_of_basis(j in -8i32..=8, k in 0u32..8, r in 0.0f64..=1.0, t in -PI..PI) {
        let a = zernike_eval(ZernikeIndex::new(j, k), r, t).unwrap();
        let b = zernike_eval(ZernikeIndex::new(-j, k), r, t).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn diagonal_extraction_round_trips(c in coeffs_strategy(9), averaging in any::<bool>()) {
        let data = apply_forward(&c).unwrap();
        let matrix = diagonal_data_to_matrix(&data);
        prop_assert_eq!(extract_diagonals(&matrix, averaging), data);
    }

    #[test]
    fn mobius_maps_preserve_the_circle(ar in -0.6f64..0.6, ai in -0.6f64..0.6, phase in -PI..PI, t in -PI..PI) {
        let map = MobiusMap::new(Complex64::new(ar, ai), phase).unwrap();
        let z = Complex64::from_polar(1.0, t);
        prop_assert!((map.apply(z).norm() - 1.0).abs() < 1e-13);
        prop_assert!((map.inverse(map.apply(z)) - z).norm() < 1e-13);
    }

    #[test]
    fn inclusion_maps_to_concentric_disk(d in 0.0f64..0.7, alpha in -PI..PI, frac in 0.05f64..0.95, t in -PI..PI) {
        let radius = frac * (1.0 - d);
        let inc = DiskInclusion::new(Complex64::from_polar(d, alpha), radius, 0.5).unwrap();
        let (map, rho) = mobius_for_disk(&inc);
        prop_assert!(rho > 0.0 && rho < 1.0);
        let w = map.apply(inc.center() + Complex64::from_polar(radius, t));
        prop_assert!((w.norm() - rho).abs() < 1e-11);
    }

    #[test]
    fn eigenvalues_match_transmission_solver(kappa in -0.95f64..20.0, rho in 0.01f64..0.99, m in 1i32..64) {
        let a = concentric_difference_eigenvalue(kappa, rho, m).unwrap();
        let b = transmission_matching_eigenvalue(kappa, rho, m).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!(a * kappa <= 0.0);
    }

    #[test]
    fn noise_delta_is_scaled_frobenius_norm(order in 1usize..6, seed in any::<u64>(), sigma in 0.0f64..0.2) {
        let mut rng = common::rng(seed);
        let rows = (0..2 * order)
            .map(|_| (0..2 * order).map(|_| Complex64::new(common::gaussian(&mut rng), common::gaussian(&mut rng))).collect())
            .collect();
        let data = DataMatrix::from_rows(order, rows).unwrap();
        let (noisy, delta) = add_noise(&data, &NoiseSpec { sigma, seed }).unwrap();
        prop_assert!((delta - sigma * data.frobenius_norm()).abs() <= 1e-14 * (1.0 + delta));
        prop_assert_eq!(add_noise(&data, &NoiseSpec { sigma, seed }).unwrap().0, noisy);
    }

    #[test]
    fn coefficient_files_round_trip_bytes(c in coeffs_strategy(7)) {
        let text = c.to_json().unwrap();
        let back = ZernikeCoefficients::from_json(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn data_files_round_trip_bytes(c in coeffs_strategy(7)) {
        let diag = apply_forward(&c).unwrap();
        let text = diag.to_json().unwrap();
        prop_assert_eq!(DiagonalData::from_json(&text).unwrap().to_json().unwrap(), text.clone());
        let matrix = diagonal_data_to_matrix(&diag);
        let text = matrix.to_json().unwrap();
        let back = DataMatrix::from_json(&text).unwrap();
        prop_assert_eq!(&back, &matrix);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}
