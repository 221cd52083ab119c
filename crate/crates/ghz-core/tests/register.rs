use ghz_core::drive::{DriveSchedule, DriveTone, Pumping};
use ghz_core::params::{Branching, SystemParams};
use ghz_core::register::*;
use ghz_core::sparse::SparseMatrix;
use ghz_core::{Error, C64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn random_state(n: usize, re: &[f64], im: &[f64], basis: Basis) -> GroundState {
    let d = 1 << n;
    let amps = DVector::from_fn(d, |i, _| C64::new(re[i], im[i]));
    let norm = amps.norm();
    GroundState::new(n, amps / C64::new(norm, 0.0), basis).unwrap()
}

#[test]
fn ghz_pair_is_orthonormal() {
    for n in 1..=8 {
        let p = ghz_state(n, Sign::Plus).unwrap();
        let m = ghz_state(n, Sign::Minus).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-15);
        if n > 1 {
            assert!(p.inner(&m).unwrap().norm() < 1e-15);
        }
    }
}

#[test]
fn ghz_has_even_weight_in_x() {
    // |GHZ⟩ only populates even numbers of |−⟩, |GHZ₋⟩ only odd ones
    for n in 2..=7 {
        let p = basis_change(&ghz_state(n, Sign::Plus).unwrap(), Basis::X).unwrap();
        let m = basis_change(&ghz_state(n, Sign::Minus).unwrap(), Basis::X).unwrap();
        for (w, (a, b)) in p.weight_distribution().iter().zip(m.weight_distribution()).enumerate() {
            if w % 2 == 0 {
                assert!(b.abs() < 1e-14);
            } else {
                assert!(a.abs() < 1e-14);
            }
        }
    }
}

#[test]
fn fidelity_checks_basis() {
    let rho = DensityMatrix::maximally_mixed(4, Basis::X);
    let psi = ghz_state(2, Sign::Plus).unwrap();
    assert!(matches!(fidelity(&rho, &psi), Err(Error::BasisMismatch { .. })));
    let rho = DensityMatrix::maximally_mixed(8, Basis::Z);
    assert!(matches!(fidelity(&rho, &psi), Err(Error::Dimension { .. })));
}

#[test]
fn sector_projectors_partition_identity() {
    let n = 5;
    let total = (0..=n)
        .fold(DMatrix::<C64>::zeros(32, 32), |acc, k| acc + sector_projector(n, k, Basis::Z).unwrap().to_matrix());
    assert_eq!(total, DMatrix::identity(32, 32));
    assert_eq!(sector_projector(n, 2, Basis::Z).unwrap().rank(), 10);
    assert!(matches!(sector_projector(n, 6, Basis::Z), Err(Error::Sector { .. })));
}

#[test]
fn mixed_state_sector_weights_are_binomial() {
    let rho = DensityMatrix::maximally_mixed(16, Basis::Z);
    for k in 0..=4 {
        let w = sector_projector(4, k, Basis::Z).unwrap().expectation(&rho).unwrap();
        assert!((w - binomial(4, k) / 16.0).abs() < 1e-15);
    }
}

#[test]
fn sparse_rejects_nothing_and_merges() {
    let a = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(1.0, 0.0)), (0, 1, C64::new(-1.0, 0.0))]);
    assert!(a.is_zero());
    let b = SparseMatrix::identity(3);
    assert_eq!(b.nnz(), 3);
    assert!(b.is_diagonal());
}

#[test]
fn params_validation() {
    assert!(SystemParams::symmetric(1, 0.1, 0.1).is_err());
    assert!(SystemParams::symmetric(3, -0.1, 0.1).is_err());
    let asym =
        SystemParams::new(3, 1.0, Branching { to_zero: 0.03, to_one: 0.01 }, Branching::symmetric(0.02), 0.0, 0.0)
            .unwrap();
    assert!(!asym.is_symmetric_branching());
    assert!((asym.gamma_e() - 0.04).abs() < 1e-15);
}

#[test]
fn drive_detuning_sits_on_dressed_level() {
    let t = DriveTone::new(Pumping::Z, 3, Sign::Minus, 0.01, 2.0).unwrap();
    assert!((t.detuning() + 2.0 * 3f64.sqrt()).abs() < 1e-15);
    let s = DriveSchedule::new(4, 1.0, vec![0.1, 0.0, 0.2], vec![0.3, 0.0]).unwrap();
    // zero amplitudes produce no tones
    assert_eq!(s.tones(Pumping::Z).len(), 4);
    assert_eq!(s.tones(Pumping::X).len(), 2);
    assert!(DriveSchedule::new(4, 1.0, vec![0.1; 2], vec![0.3; 2]).is_err());
}

proptest! {
    #[test]
    fn basis_change_is_an_involution(
        n in 1usize..=5,
        re in prop::collection::vec(-1.0f64..1.0, 32),
        im in prop::collection::vec(-1.0f64..1.0, 32),
    ) {
        prop_assume!(re.iter().take(1 << n).any(|v| v.abs() > 1e-3));
        let psi = random_state(n, &re, &im, Basis::Z);
        let there = basis_change(&psi, Basis::X).unwrap();
        let back = basis_change(&there, Basis::Z).unwrap();
        prop_assert!((there.norm() - 1.0).abs() < 1e-12);
        prop_assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn fidelity_is_a_probability(
        n in 1usize..=4,
        re in prop::collection::vec(-1.0f64..1.0, 16),
        im in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        prop_assume!(re.iter().take(1 << n).any(|v| v.abs() > 1e-3));
        let psi = random_state(n, &re, &im, Basis::Z);
        let rho = DensityMatrix::from_pure(&psi);
        let f = fidelity(&rho, &ghz_state(n, Sign::Plus).unwrap()).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_basis_change_keeps_spectrum(
        re in prop::collection::vec(-1.0f64..1.0, 8),
        im in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        prop_assume!(re.iter().any(|v| v.abs() > 1e-3));
        let rho = DensityMatrix::from_pure(&random_state(3, &re, &im, Basis::Z));
        let x = basis_change(&rho, Basis::X).unwrap();
        prop_assert!((x.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(x.min_eigenvalue() > -1e-12);
        prop_assert!((x.eigenvalues()[7] - 1.0).abs() < 1e-12);
    }
}
