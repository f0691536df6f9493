mod common;

use proptest::prelude::*;
use spo_core::eigen::{lowest_eigenvalues_sparse, EigenMethod, EigenOptions};
use spo_core::spectrum::{gap_values, min_of_gaps};
use spo_core::{assemble, gap_profile, GapRange, PathHamiltonian, QuboInstance, Schedule};

#[test]
fn assembled_operator_matches_kronecker_reference() {
    for n in 1..=4 {
        let inst = QuboInstance::random(n, 11 + n as u64).unwrap();
        let sched = common::bumpy_schedule(n, 8, n as u64);
        for i in [0, 3, 8] {
            let dense = assemble(&inst, &sched, i).unwrap().realize().to_dense_real();
            let reference = common::hamiltonian(&inst, &sched, i);
            let dim = 1 << n;
            for r in 0..dim {
                for c in 0..dim {
                    assert!((dense[r * dim + c] - reference[(r, c)]).abs() < 1e-14, "n={n} i={i} ({r},{c})");
                }
            }
        }
    }
}

#[test]
fn path_hamiltonian_agrees_with_pauli_assembly() {
    let inst = QuboInstance::random(5, 3).unwrap();
    let sched = common::bumpy_schedule(5, 10, 9);
    let path = PathHamiltonian::new(&inst);
    for i in 0..=10 {
        let a = path.at(&sched, i);
        let b = assemble(&inst, &sched, i).unwrap();
        assert!(a.max_abs_difference(b.realize()) < 1e-14);
    }
}

#[test]
fn lanczos_and_dense_paths_agree_with_reference() {
    for (n, seed) in [(5usize, 1u64), (6, 2), (7, 3)] {
        let inst = QuboInstance::random(n, seed).unwrap();
        let sched = common::bumpy_schedule(n, 20, seed);
        let path = PathHamiltonian::new(&inst);
        for i in [1, 7, 13, 19] {
            let op = path.at(&sched, i);
            let reference = common::sorted_eigenvalues(common::hamiltonian(&inst, &sched, i));
            for method in [EigenMethod::Dense, EigenMethod::Lanczos] {
                let got = lowest_eigenvalues_sparse(&op, 6, &EigenOptions::with_method(method)).unwrap();
                for (g, r) in got.iter().zip(&reference) {
                    assert!((g - r).abs() < 1e-10, "{method:?} n={n} i={i}: {g} vs {r}");
                }
            }
        }
    }
}

#[test]
fn degenerate_problem_spectrum_is_resolved_by_lanczos() {
    // every Z-string sum with equal couplings on a ring is highly degenerate at s = 1
    let n = 7;
    let couplings = (0..n).map(|q| (q, (q + 1) % n, 1.0));
    let inst = QuboInstance::new(n, vec![0.0; n], couplings, 0).unwrap();
    let sched = Schedule::linear(n, 10, 1.0, 2.5).unwrap();
    let path = PathHamiltonian::new(&inst);
    for i in [9, 10] {
        let reference = common::sorted_eigenvalues(common::hamiltonian(&inst, &sched, i));
        let got = lowest_eigenvalues_sparse(&path.at(&sched, i), 6, &EigenOptions::with_method(EigenMethod::Lanczos))
            .unwrap();
        for (g, r) in got.iter().zip(&reference) {
            assert!((g - r).abs() < 1e-10, "i={i}: {g} vs {r}");
        }
    }
}

#[test]
fn driver_gap_is_two_for_every_size() {
    for n in 1..=9 {
        let inst = QuboInstance::random(n, n as u64).unwrap();
        let sched = Schedule::linear(n, 4, 1.0, 2.5).unwrap();
        let gaps = gap_values(&PathHamiltonian::new(&inst), &sched, &EigenOptions::default()).unwrap();
        assert!((gaps[0] - 2.0).abs() < 1e-12, "n={n}: {}", gaps[0]);
    }
}

#[test]
fn final_gap_matches_sorted_problem_diagonal() {
    let inst = QuboInstance::random(6, 42).unwrap();
    let mut diag = inst.diagonal();
    diag.sort_by(f64::total_cmp);
    let sched = Schedule::linear(6, 10, 1.0, 2.5).unwrap();
    let profile = gap_profile(&inst, &sched, 4).unwrap();
    for (got, want) in profile.eigenvalues(10).iter().zip(&diag) {
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn global_field_flip_leaves_gaps_unchanged() {
    // a uniform field flip is a unitary relabeling, so the gap profile is invariant
    let inst = QuboInstance::random(4, 5).unwrap();
    let flipped_h: Vec<f64> = inst.fields().iter().map(|h| -h).collect();
    let flipped = QuboInstance::new(4, flipped_h, inst.couplings(), 5).unwrap();
    let sched = Schedule::linear(4, 20, 1.0, 2.5).unwrap();
    let a = gap_profile(&inst, &sched, 3).unwrap();
    let b = gap_profile(&flipped, &sched, 3).unwrap();
    for (x, y) in a.gaps().iter().zip(b.gaps()) {
        assert!((x - y).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_match_reference_on_random_instances(n in 1usize..=5, seed in any::<u64>(), i in 0usize..=12) {
        let inst = QuboInstance::random(n, seed).unwrap();
        let sched = common::bumpy_schedule(n, 12, seed ^ 7);
        let profile = gap_profile(&inst, &sched, 4.min(1 << n)).unwrap();
        let reference = common::sorted_eigenvalues(common::hamiltonian(&inst, &sched, i));
        for (g, r) in profile.eigenvalues(i).iter().zip(&reference) {
            prop_assert!((g - r).abs() < 1e-10);
        }
    }

    #[test]
    fn gaps_are_nonnegative_and_weyl_bounded(n in 2usize..=5, seed in any::<u64>()) {
        // a perturbation of operator norm d moves each eigenvalue by at most d
        let inst = QuboInstance::random(n, seed).unwrap();
        let sched = common::bumpy_schedule(n, 10, seed);
        let linear = Schedule::linear(n, 10, 10.0, 10.0).unwrap();
        let path = PathHamiltonian::new(&inst);
        let a = gap_values(&path, &sched, &EigenOptions::default()).unwrap();
        let b = gap_values(&path, &linear, &EigenOptions::default()).unwrap();
        for i in 0..=10 {
            let bound: f64 = sched.column(i).iter().map(|v| v.abs()).sum();
            prop_assert!(a[i] >= 0.0);
            prop_assert!((a[i] - b[i]).abs() <= 2.0 * bound + 1e-10);
        }
        let (m, im) = min_of_gaps(&a, GapRange::Full);
        prop_assert_eq!(m, a[im]);
    }

    #[test]
    fn csv_round_trip_preserves_schedules(n in 1usize..=4, seed in any::<u64>()) {
        let sched = common::bumpy_schedule(n, 6, seed);
        let back = Schedule::from_csv(&sched.to_csv(), 10.0, 10.0).unwrap();
        prop_assert!(back.max_abs_difference(&sched) <= 1e-8 * 10.0);
    }

    #[test]
    fn instance_json_round_trip_is_exact(n in 1usize..=8, seed in any::<u64>()) {
        let inst = QuboInstance::random(n, seed).unwrap();
        let back = QuboInstance::from_json(&inst.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }
}
