use ghz_core::analytic::weak_drive_params;
use ghz_core::compartment::{sector_transfer_rate, x_depumping_rate};
use ghz_core::drive::{DriveSchedule, DriveTone, Pumping};
use ghz_core::effective::*;
use ghz_core::params::SystemParams;
use ghz_core::register::{basis_change, ghz_state, Basis, GroundState, Sign};
use ghz_core::sparse::SparseMatrix;
use ghz_core::C64;
use proptest::prelude::*;

fn weak(n: usize) -> (DriveSchedule, SystemParams) {
    let w = weak_drive_params(n, 0.05, 0.25).unwrap();
    (w.schedule().unwrap(), w.system_params().unwrap())
}

fn expectation(op: &SparseMatrix, psi: &GroundState) -> f64 {
    let v = psi.amplitudes();
    v.dotc(&op.apply(v)).re
}

#[test]
fn paired_tones_cancel_stark_shifts() {
    for n in 2..=8 {
        let (s, p) = weak(n);
        for pumping in [Pumping::Z, Pumping::X] {
            let m = build_effective_model(pumping, &s, &p, EffectiveOptions::default()).unwrap();
            assert!(m.stark_scale() > 0.0);
            for shift in m.stark_by_sector() {
                assert!(shift.abs() <= 1e-12 * m.stark_scale(), "N={n} {pumping:?}: {shift}");
            }
        }
    }
}

#[test]
fn single_tone_shift_does_not_vanish() {
    let p = SystemParams::symmetric(3, 0.02, 0.02).unwrap();
    let t = DriveTone::new(Pumping::Z, 1, Sign::Plus, 0.002, 1.0).unwrap();
    assert!(stark_shift(&t, 2, &p).unwrap().abs() > 1e-7);
    assert_eq!(stark_shift(&t, 0, &p).unwrap(), 0.0);
}

#[test]
fn resonant_jumps_annihilate_ghz() {
    for n in 2..=8 {
        let (s, p) = weak(n);
        let ghz = ghz_state(n, Sign::Plus).unwrap();
        for pumping in [Pumping::Z, Pumping::X] {
            let m = build_effective_model(pumping, &s, &p, EffectiveOptions::default()).unwrap();
            let psi = basis_change(&ghz, m.basis()).unwrap();
            for j in m.jumps().iter().filter(|j| j.label.is_resonant()) {
                let out = j.operator(n).apply(psi.amplitudes());
                assert!(out.norm() <= 1e-12 * j.rate.sqrt().max(1e-300), "N={n} {:?}", j.label);
            }
        }
    }
}

#[test]
fn jump_products_are_diagonal() {
    let (s, p) = weak(4);
    for pumping in [Pumping::Z, Pumping::X] {
        let m = build_effective_model(pumping, &s, &p, EffectiveOptions::broadened(2.0)).unwrap();
        for l in m.aggregated_operators() {
            assert!(l.adjoint().matmul(&l).is_diagonal());
        }
    }
}

#[test]
fn resonant_z_rate_equals_sector_transfer() {
    for eta in [None, Some(2.0)] {
        let (s, p) = weak(5);
        let opts = EffectiveOptions { broadening: eta, resonant_only: true };
        let m = build_effective_model(Pumping::Z, &s, &p, opts).unwrap();
        for n1 in 1..5 {
            let expect = sector_transfer_rate(n1, &s, &p, eta).unwrap();
            let om2 = s.z_rabi(n1).powi(2);
            let oracle =
                2.0 * n1 as f64 * p.gamma_0e() * om2 / (p.gamma_e().powi(2) + eta.unwrap_or(0.0) * n1 as f64 * om2);
            assert!((expect - oracle).abs() < 1e-14 * oracle);
            // each of the n₁ atoms in |1⟩ carries the same rate, both signs summed
            let per_atom = m.total_rate(|l| l.sector == n1 && l.channel == Channel::DecayToZero && l.atom == Some(0));
            assert!((per_atom * n1 as f64 - expect).abs() < 1e-12 * expect, "n1={n1}");
        }
    }
}

#[test]
fn x_pumping_depletes_minus_at_the_printed_rate() {
    for n in 2..=6 {
        let (s, p) = weak(n);
        let opts = EffectiveOptions { broadening: None, resonant_only: true };
        let m = build_effective_model(Pumping::X, &s, &p, opts).unwrap();
        let minus = basis_change(&ghz_state(n, Sign::Minus).unwrap(), Basis::X).unwrap();
        let loss: f64 = m
            .jumps()
            .iter()
            .map(|j| {
                let l = j.operator(n);
                expectation(&l.adjoint().matmul(&l), &minus)
            })
            .sum();
        let printed = x_depumping_rate(&s, &p, None);
        assert!((loss - printed).abs() < 1e-12 * printed, "N={n}: {loss} vs {printed}");
    }
}

#[test]
fn cavity_channel_only_with_loss() {
    let (s, p) = weak(3);
    let m = build_effective_model(Pumping::Z, &s, &p, EffectiveOptions::default()).unwrap();
    assert!(m.jumps().iter().all(|j| j.label.channel != Channel::Cavity));
    let lossy = p.with_oscillator_loss(0.01, 0.01).unwrap();
    let m = build_effective_model(Pumping::Z, &s, &lossy, EffectiveOptions::default()).unwrap();
    assert!(m.jumps().iter().any(|j| j.label.channel == Channel::Cavity));
}

#[test]
fn excited_population_is_linear_in_drive() {
    let (s, p) = weak(4);
    let a = excited_population(&s, &p);
    let b = excited_population(&s.scaled(2.0), &p);
    assert!(a > 0.0);
    assert!((b / a - 2.0).abs() < 1e-12);
}

#[test]
fn zero_drive_gives_empty_model() {
    let p = SystemParams::symmetric(3, 0.02, 0.02).unwrap();
    let m = build_effective_model(Pumping::X, &DriveSchedule::zero(3, 1.0).unwrap(), &p, EffectiveOptions::default())
        .unwrap();
    assert!(m.is_empty());
}

proptest! {
    #[test]
    fn detuning_and_coupling_are_consistent(n in 1usize..8, f in 1usize..8, gamma in 1e-3f64..0.2, kappa in 1e-3f64..0.2) {
        let p = SystemParams::symmetric(8, gamma, gamma).unwrap().with_oscillator_loss(kappa, kappa).unwrap();
        let t = DriveTone::new(Pumping::Z, f, Sign::Minus, 0.001, 1.0).unwrap();
        let big = C64::new(t.detuning(), -gamma / 2.0);
        let small = C64::new(t.detuning(), -kappa / 2.0);
        let dn = effective_detuning(&t, n, &p).unwrap();
        let gn = effective_coupling(&t, n, &p).unwrap();
        // Δ̃_n δ̃ = Δ̃δ̃ − n g² and g̃_n = −(Δ̃_n δ̃)/(n g)
        prop_assert!((dn * small - (big * small - n as f64)).norm() < 1e-12);
        prop_assert!((gn + dn * small / n as f64).norm() < 1e-12);
    }
}
