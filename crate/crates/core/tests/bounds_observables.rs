use monostat::bounds::{
    coefficient_gap, delta, delta_d1, delta_d2, delta_d2_at1_exact, delta_d2_at1_numerator, delta_d2_log, fit_delta2,
    ratio_zm_z0, region_path_point, region_r, sandwich_check, EXACT_QUARTIC,
};
use monostat::observables::{
    avg_number_monotone_approx, avg_number_series, compare_statistics, monotone_number_correction, Statistics,
};
use monostat::series::{z_monotone_ho, Truncation};
use monostat::spectrum::{harmonic_spectrum, iso_oscillator_spectrum, EnergyLevel, Tail};
use monostat::{ModeOrder, Spectrum, StatisticsKind, ThermoPoint};
use num_rational::Ratio;
use proptest::prelude::*;
use serde::Deserialize;

type Q = Ratio<i128>;

/// `Δ″ₙ(1)/2` from `L′ = Σ (k−1)/2` and `L″ = Σ [(k−1)(k−2)/3 − (k−1)²/4]`,
/// the values of `S′ₖ/Sₖ` and `S″ₖ/Sₖ` at `x = 1`.
fn half_second_derivative_rational(n: i128) -> Q {
    let mut l1 = Q::from_integer(0);
    let mut l2 = Q::from_integer(0);
    for k in 2..=n {
        let r1 = Q::new(k - 1, 2);
        let r2 = Q::new((k - 1) * (k - 2), 3);
        l1 += r1;
        l2 += r2 - r1 * r1;
    }
    (l2 - l1 * l1) / Q::from_integer(2)
}

#[test]
fn exact_second_derivative_matches_rational_oracle() {
    for n in 1..=60i128 {
        let q = half_second_derivative_rational(n);
        assert_eq!(q, Q::new(delta_d2_at1_numerator(n as u64), 288), "n={n}");
    }
    // b₂ as a fraction.
    assert!((EXACT_QUARTIC[2] + 0.135_416_666_666_666_66).abs() < 1e-16);
}

#[test]
fn values_at_one() {
    for n in 1..=40usize {
        assert!(delta(n, 1.0).unwrap().abs() <= 1e-12);
        let want = (n * (n - 1)) as f64 / 4.0;
        assert!((delta_d1(n, 1.0).unwrap() - want).abs() <= 1e-10);
        let exact = delta_d2_at1_exact(n);
        assert!((delta_d2(n, 1.0).unwrap() / 2.0 - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }
}

#[test]
fn fit_is_within_printed_rounding() {
    let fit = fit_delta2(1, 20).unwrap();
    let printed = [0.0, 0.09028, -0.13542, 0.07639, -0.03125];
    for i in 0..5 {
        assert!((fit.b[i] - printed[i]).abs() <= 1e-4);
        assert!((fit.b[i] - EXACT_QUARTIC[i]).abs() <= 1e-9);
    }
    assert!(fit.max_residual <= 1e-9);
    assert!((fit.eval(7.0) - delta_d2_at1_exact(7)).abs() < 1e-9);
}

#[test]
fn sandwich_on_a_coarse_grid() {
    for u in [0.05, 0.3, 1.0, 2.5, 5.0] {
        for z in [0.0, 0.4, 1.0, 1.9] {
            let r = sandwich_check(u, z, None).unwrap();
            assert!(r.holds_with_certainty, "{r:?}");
        }
    }
}

#[test]
fn region_and_low_density_path() {
    assert!(region_r(0.3, 0.5, 0.5).unwrap());
    assert!(!region_r(0.25, 0.5, 0.5).unwrap());
    let mut last_gap = f64::INFINITY;
    for k in 1..=12u32 {
        let (u, z) = region_path_point(k, 0.5).unwrap();
        assert!(region_r(u, z, 0.5).unwrap());
        let r = ratio_zm_z0(u, z, None).unwrap();
        assert!(r.lo >= 1.0 - z / 2.0 && r.hi <= 1.0 + 1e-15);
        let gap = 1.0 - r.value;
        assert!(gap < last_gap);
        last_gap = gap;
    }
}

#[test]
fn coefficient_gap_examples() {
    let g = coefficient_gap(2, 3.0).unwrap();
    // a⁽⁰⁾₂ Δ₂(3) = a⁽⁰⁾₂/2 and the bound is a⁽⁰⁾₂.
    assert!((g.gap - g.bound / 2.0).abs() < 1e-15 * g.bound);
    assert!((g.gap - (g.boltzmann - g.monotone)).abs() < 1e-15 * g.boltzmann);
    let g = coefficient_gap(1, 2.0).unwrap();
    assert_eq!((g.gap, g.bound), (0.0, 0.0));
    assert!((g.boltzmann - g.monotone).abs() < 1e-15);
    assert!(coefficient_gap(3, 1.0).is_err());
}

#[derive(Deserialize)]
struct Calibration {
    z: Vec<f64>,
    tolerance: f64,
    rows: Vec<CalibrationRow>,
}

#[derive(Deserialize)]
struct CalibrationRow {
    u: f64,
    max_rel_error: f64,
}

fn max_relative_error(u: f64, zs: &[f64]) -> f64 {
    zs.iter()
        .map(|&z| {
            let exact = avg_number_series(&z_monotone_ho(u, z, Some(80)).unwrap()).value;
            (avg_number_monotone_approx(u, z).unwrap() - exact).abs() / exact
        })
        .fold(0.0, f64::max)
}

#[test]
fn number_approximation_calibration_is_reproduced() {
    let cal: Calibration = serde_json::from_str(include_str!("fixtures/number_approx_calibration.json")).unwrap();
    assert_eq!(cal.tolerance, 0.10);
    for row in &cal.rows {
        let observed = max_relative_error(row.u, &cal.z);
        assert!((observed - row.max_rel_error).abs() <= 1e-6 * row.max_rel_error, "u={}", row.u);
        for &z in &cal.z {
            assert!(monotone_number_correction(row.u, z).unwrap() < 0.0);
        }
    }
    // The recorded rows cross the default tolerance just above u = 1.
    let crossing = cal.rows.iter().find(|r| r.max_rel_error > cal.tolerance).unwrap();
    assert_eq!(crossing.u, 1.25);
}

fn two_level() -> Spectrum {
    Spectrum::new(
        vec![EnergyLevel { energy: 0.5, degeneracy: 2 }, EnergyLevel { energy: 1.5, degeneracy: 1 }],
        Some(Tail::Empty),
        1.0,
    )
    .unwrap()
}

#[test]
fn comparison_table_shape_and_order() {
    let s = two_level();
    let total = ModeOrder::total(3);
    let stats = [Statistics::Boltzmann, Statistics::Fock(StatisticsKind::Monotone)];
    let grid = [ThermoPoint::new(1.0, 0.0).unwrap(), ThermoPoint::new(1.0, 0.4).unwrap()];
    let rows = compare_statistics(&s, &total, &stats, &grid, Truncation::new(4, 3)).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().map(|r| r.kind).collect::<Vec<_>>(), ["boltzmann", "monotone", "boltzmann", "monotone"]);
    assert!(rows[..2].iter().all(|r| r.z_value == 1.0 && r.n.value == 0.0));
    assert!(rows[3].z_value <= rows[2].z_value);
    assert!(rows[3].n.value <= rows[2].n.value);
}

#[test]
fn block_monotone_number_is_capped_by_block_count() {
    let s = iso_oscillator_spectrum(2, 1.0, 8).unwrap();
    let cutoff = 1 + 2 + 3 + 4;
    let order = ModeOrder::from_spectrum(&s, cutoff).unwrap();
    let grid: Vec<ThermoPoint> = [0.2, 1.0, 5.0, 50.0].iter().map(|&z| ThermoPoint::new(0.3, z).unwrap()).collect();
    let rows = compare_statistics(
        &s,
        &order,
        &[Statistics::Fock(StatisticsKind::BlockMonotone)],
        &grid,
        Truncation::new(6, cutoff),
    )
    .unwrap();
    let mut last = 0.0;
    for r in rows {
        assert!(r.n.value <= 4.0 + 1e-12);
        assert!(r.n.value >= last);
        last = r.n.value;
    }
}

#[test]
fn monotone_rows_stay_below_boltzmann_on_the_oscillator() {
    let s = harmonic_spectrum(1.0, 200).unwrap();
    let order = ModeOrder::total(30);
    let grid: Vec<ThermoPoint> =
        [(0.5, 0.1), (1.0, 0.3), (2.0, 0.5)].iter().map(|&(b, z)| ThermoPoint::new(b, z).unwrap()).collect();
    let rows = compare_statistics(
        &s,
        &order,
        &[Statistics::Boltzmann, Statistics::Fock(StatisticsKind::Monotone)],
        &grid,
        Truncation::new(5, 30),
    )
    .unwrap();
    for pair in rows.chunks(2) {
        assert!(pair[1].z_value <= pair[0].z_value);
        assert!(pair[1].n.lo <= pair[0].n.hi);
    }
}

proptest! {
    #[test]
    fn second_derivative_is_negative_above_one(n in 2usize..20, t in 1e-3f64..9.0) {
        prop_assert!(delta_d2(n, 1.0 + t).unwrap() < 0.0);
    }

    #[test]
    fn second_derivative_sign_survives_underflow(n in 2usize..60, t in 1e-3f64..50.0) {
        let (sign, ln_abs) = delta_d2_log(n, 1.0 + t).unwrap();
        prop_assert_eq!(sign, -1.0);
        let direct = delta_d2(n, 1.0 + t).unwrap();
        // Subnormal values keep too few bits to compare against.
        if direct.is_normal() {
            prop_assert!((direct.abs().ln() - ln_abs).abs() < 1e-9 * ln_abs.abs().max(1.0));
        }
    }

    #[test]
    fn delta_lies_in_unit_interval_above_one(n in 1usize..40, t in 1e-6f64..50.0) {
        let d = delta(n, 1.0 + t).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn coefficient_gap_is_bounded(n in 1usize..50, t in 1e-3f64..9.0) {
        let g = coefficient_gap(n, 1.0 + t).unwrap();
        prop_assert!(g.gap <= g.bound);
        prop_assert!((g.gap - (g.boltzmann - g.monotone)).abs() <= 1e-12 * g.boltzmann);
    }

    #[test]
    fn sandwich_holds(u in 0.05f64..5.0, z in 0.0f64..1.9) {
        prop_assert!(sandwich_check(u, z, None).unwrap().holds_with_certainty);
    }

    #[test]
    fn number_grows_with_activity(u in 0.1f64..5.0, z in 0.0f64..1.5, dz in 1e-3f64..0.5) {
        let lo = avg_number_series(&z_monotone_ho(u, z, Some(60)).unwrap()).value;
        let hi = avg_number_series(&z_monotone_ho(u, z + dz, Some(60)).unwrap()).value;
        prop_assert!(hi >= lo);
    }
}
