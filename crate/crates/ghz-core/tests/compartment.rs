use ghz_core::analytic::weak_drive_params;
use ghz_core::compartment::*;
use ghz_core::drive::{x_tone_count, DriveSchedule};
use ghz_core::params::{Branching, SystemParams};
use ghz_core::Error;
use proptest::prelude::*;

const B_TABLE: [(usize, f64); 11] = [
    (2, 55.0),
    (3, 33.0),
    (4, 27.0),
    (5, 25.0),
    (6, 23.0),
    (7, 22.0),
    (8, 21.0),
    (10, 20.0),
    (20, 18.0),
    (50, 17.0),
    (100, 16.0),
];

const KAPPA_TABLE: [(usize, f64); 11] = [
    (2, 0.28),
    (3, 0.32),
    (4, 0.34),
    (5, 0.35),
    (6, 0.36),
    (7, 0.36),
    (8, 0.37),
    (10, 0.38),
    (20, 0.39),
    (50, 0.40),
    (100, 0.41),
];

fn uniform_schedule(n: usize, rabi: f64) -> DriveSchedule {
    DriveSchedule::new(n, 1.0, vec![rabi; n - 1], vec![rabi; x_tone_count(n)]).unwrap()
}

#[test]
fn columns_conserve_probability() {
    for n in [2, 3, 5, 20] {
        let m = build_4compartment(n, asymptotic_bundle(n, 0.03)).unwrap();
        assert!(m.conservation_defect() < 1e-14);
        let t = m.matrix();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(t[(i, j)] >= 0.0);
                }
            }
        }
    }
    let s = build_3compartment_strong(asymptotic_bundle(3, 0.03)).unwrap();
    assert!(s.conservation_defect() < 1e-14);
}

#[test]
fn steady_state_has_closed_form() {
    for n in [3, 4, 7, 30] {
        let loss = 0.02;
        let m = build_4compartment(n, asymptotic_bundle(n, loss)).unwrap();
        let p = m.steady_state().unwrap();
        let l = (n as f64).ln();
        let raw = [1.0 / l, 2.0, 1.0, 1.0 / loss];
        let s: f64 = raw.iter().sum();
        for (a, b) in p.iter().zip(raw) {
            assert!((a - b / s).abs() < 1e-12, "N={n}");
        }
    }
}

#[test]
fn three_qubit_steady_vector() {
    let m = build_4compartment(3, asymptotic_bundle(3, 0.1)).unwrap();
    let p = m.steady_state().unwrap();
    // (1/ln3, 2, 1, 10)/(13 + 1/ln3)
    let expect = [0.06543663353283434, 0.14377897945648702, 0.07188948972824351, 0.7188948972824352];
    for (a, b) in p.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn stationary_error_expansion() {
    let n = 5;
    let mut last = f64::INFINITY;
    for loss in [1e-1, 1e-2, 1e-3, 1e-4] {
        let e = build_4compartment(n, asymptotic_bundle(n, loss)).unwrap().stationary_error().unwrap();
        let gap = (e.exact / e.approximate - 1.0).abs();
        assert!(gap < last);
        last = gap;
    }
    assert!(last < 1e-3);
    let e = build_3compartment_strong(asymptotic_bundle(n, 1e-4)).unwrap().stationary_error().unwrap();
    assert!((e.exact / e.approximate - 1.0).abs() < 1e-3);
}

#[test]
fn b_factor_reproduces_table() {
    for (n, b) in B_TABLE {
        let got = b_factor(n).unwrap();
        assert!((got - b).abs() <= 1.0, "N={n}: {got} vs {b}");
    }
}

#[test]
fn kappa_factor_reproduces_table() {
    for (n, k) in KAPPA_TABLE {
        let got = kappa_factor(n).unwrap();
        assert!((got - k).abs() <= 0.01, "N={n}: {got} vs {k}");
    }
}

#[test]
fn b_factor_decreases_with_register_size() {
    let bs: Vec<f64> = [2, 3, 5, 10, 100, 1000].iter().map(|&n| b_factor(n).unwrap()).collect();
    assert!(bs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn uniform_drive_gives_harmonic_time() {
    let p = SystemParams::symmetric(4, 0.02, 0.02).unwrap();
    let om = 0.001;
    let t = pumping_time(3, 0, &uniform_schedule(4, om), &p, None).unwrap();
    let expect = 0.02 / (om * om) * (1.0 + 0.5 + 1.0 / 3.0);
    assert!((t - expect).abs() < 1e-9 * expect);
    assert!((ghz_pumping_time(&uniform_schedule(4, om), &p, None).unwrap() - 2.0 * expect).abs() < 1e-9 * expect);
}

#[test]
fn broadened_rate_saturates() {
    let p = SystemParams::symmetric(3, 0.02, 0.02).unwrap();
    let r = sector_transfer_rate(2, &uniform_schedule(3, 1e4), &p, Some(2.0)).unwrap();
    assert!((r - p.gamma_0e()).abs() < 1e-9 * p.gamma_0e());
    let weak = sector_transfer_rate(2, &uniform_schedule(3, 1e-3), &p, Some(2.0)).unwrap();
    let bare = sector_transfer_rate(2, &uniform_schedule(3, 1e-3), &p, None).unwrap();
    assert!(weak < bare && (weak / bare - 1.0).abs() < 1e-2);
}

#[test]
fn zero_drive_gives_zero_rates() {
    let p = SystemParams::symmetric(4, 0.02, 0.02).unwrap();
    let s = DriveSchedule::zero(4, 1.0).unwrap();
    assert_eq!(sector_transfer_rate(2, &s, &p, None).unwrap(), 0.0);
    assert_eq!(x_depumping_rate(&s, &p, Some(2.0)), 0.0);
    let loss = ghz_loss_rates(&s, &p, None).unwrap();
    assert_eq!((loss.z_minus, loss.x_minus, loss.x_toss), (0.0, 0.0, 0.0));
    assert!(pumping_time(3, 0, &s, &p, None).unwrap().is_infinite());
    let bundle = weak_rate_bundle(&s, &p, None).unwrap();
    assert!(build_4compartment(4, bundle).is_err());
}

#[test]
fn asymmetric_branching_is_refused() {
    let p = SystemParams::new(3, 1.0, Branching { to_zero: 0.03, to_one: 0.01 }, Branching::symmetric(0.02), 0.0, 0.0)
        .unwrap();
    assert!(matches!(ghz_loss_rates(&uniform_schedule(3, 1e-3), &p, None), Err(Error::AsymmetricBranching)));
}

#[test]
fn sector_range_is_checked() {
    let p = SystemParams::symmetric(3, 0.02, 0.02).unwrap();
    let s = uniform_schedule(3, 1e-3);
    assert!(matches!(sector_transfer_rate(0, &s, &p, None), Err(Error::Sector { .. })));
    assert!(matches!(sector_transfer_rate(3, &s, &p, None), Err(Error::Sector { .. })));
    assert!(pumping_time(1, 2, &s, &p, None).is_err());
}

#[test]
fn toss_is_half_the_depumping() {
    let w = weak_drive_params(6, 0.05, 0.25).unwrap();
    let (s, p) = (w.schedule().unwrap(), w.system_params().unwrap());
    let bundle = weak_rate_bundle(&s, &p, Some(2.0)).unwrap();
    assert!((bundle.x_toss - 0.5 * bundle.x_plus).abs() < 1e-15 * bundle.x_plus);
    assert_eq!(bundle.provenance, Provenance::PowerBroadened);
}

#[test]
fn weak_parameters_balance_x_and_z() {
    // the X amplitude is chosen so that depumping matches pumping
    for n in [3, 5, 8] {
        let w = weak_drive_params(n, 0.05, 0.25).unwrap();
        let b = weak_rate_bundle(&w.schedule().unwrap(), &w.system_params().unwrap(), None).unwrap();
        let ratio = b.x_plus / b.z_plus;
        assert!((0.5..2.0).contains(&ratio), "N={n}: {ratio}");
    }
}

#[test]
fn weak_parameters_meet_error_target() {
    for n in [3, 5, 10] {
        let w = weak_drive_params(n, 0.05, 0.05).unwrap();
        let b = weak_rate_bundle(&w.schedule().unwrap(), &w.system_params().unwrap(), None).unwrap();
        let e = build_4compartment(n, b).unwrap().stationary_error().unwrap();
        assert!(e.exact < 2.0 * 0.05 && e.exact > 0.05 / 2.0, "N={n}: {}", e.exact);
    }
}

#[test]
fn strong_ratio_is_stable_under_long_times() {
    let r = strong_rate_ratio().unwrap();
    assert!((r - 0.21574).abs() < 1e-4);
    let m = build_3compartment_strong(asymptotic_bundle(3, 0.0)).unwrap();
    // at long times the rate settles on the slowest decay mode (3.5 − √8.25)/2
    let slowest = (3.5 - 8.25f64.sqrt()) / 2.0;
    let late = m.effective_rate(true, 100.0).unwrap();
    assert!(late > r && (late - slowest).abs() < 0.02 * slowest, "{late}");
}

#[test]
fn evolve_checks_length() {
    let m = build_4compartment(3, asymptotic_bundle(3, 0.0)).unwrap();
    assert!(matches!(m.evolve(1.0, &[1.0, 0.0, 0.0]), Err(Error::Dimension { .. })));
    assert!(m.effective_rate(true, 0.0).is_err());
    let mixed = mixed_populations_4(6);
    assert!((mixed.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn evolution_conserves_probability(
        n in 2usize..40,
        loss in 0.0f64..0.3,
        toss in 0.0f64..2.0,
        t in 0.0f64..20.0,
        raw in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let bundle = RateBundle { x_toss: toss, ..asymptotic_bundle(n, loss) };
        let m = build_4compartment(n, bundle).unwrap();
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 1e-3);
        let p0: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let p = m.evolve(t, &p0).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x > -1e-12));
    }
}
