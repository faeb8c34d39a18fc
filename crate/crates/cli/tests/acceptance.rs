//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are always shown; exits non-zero if any fails.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use monostat::bounds::{
    asym_high_beta, asym_low_beta, coefficient_gap, delta, delta2_scan, delta_d1, fit_delta2, ratio_zm_z0,
    region_path_point, sandwich_grid, EXACT_QUARTIC,
};
use monostat::numeric::{lin_space, log_space};
use monostat::observables::{avg_number_monotone_approx, avg_number_series, monotone_number_correction};
use monostat::series::{
    boltzmann_corrected_from_enumeration, coeff_monotone_ho, grand_partition_enumerated, z_monotone_ho, Truncation,
};
use monostat::spectrum::{harmonic_spectrum, zeta_ho_closed, EnergyLevel, Tail};
use monostat::{ModeOrder, Spectrum, StatisticsKind};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Values printed with the quartic fit, to five decimals.
const PRINTED_FIT: [f64; 5] = [0.0, 0.09028, -0.13542, 0.07639, -0.03125];

fn appendix_fit() -> Outcome {
    let fit = fit_delta2(1, 20).map_err(|e| e.to_string())?;
    let printed = (0..5).map(|i| (fit.b[i] - PRINTED_FIT[i]).abs()).fold(0.0, f64::max);
    let exact = (0..5).map(|i| (fit.b[i] - EXACT_QUARTIC[i]).abs()).fold(0.0, f64::max);
    check(
        printed <= 1e-4 && exact <= 1e-9 && fit.max_residual <= 1e-9,
        format!("max |b - printed| = {printed:.2e}, max |b - exact| = {exact:.2e}, residual {:.2e}", fit.max_residual),
    )
}

fn second_derivative_sign() -> Outcome {
    let xs = log_space(10f64.powf(1e-3), 10.0, 1000);
    let ns: Vec<usize> = (2..=20).collect();
    let scan = delta2_scan(&ns, &xs).map_err(|e| e.to_string())?;
    let violations = scan.iter().filter(|&&(_, _, d2)| d2.is_nan() || d2 >= 0.0).count();
    check(violations == 0, format!("{} points, {violations} violations", scan.len()))
}

fn values_at_one() -> Outcome {
    let mut worst_d1: f64 = 0.0;
    let mut worst_d0: f64 = 0.0;
    for n in 1..=40usize {
        let want = (n * (n - 1)) as f64 / 4.0;
        worst_d1 = worst_d1.max((delta_d1(n, 1.0).map_err(|e| e.to_string())? - want).abs());
        worst_d0 = worst_d0.max(delta(n, 1.0).map_err(|e| e.to_string())?.abs());
    }
    check(
        worst_d1 <= 1e-10 && worst_d0 <= 1e-12,
        format!("max deviation: first derivative {worst_d1:.2e}, value {worst_d0:.2e}"),
    )
}

fn sandwich() -> Outcome {
    let us = lin_space(0.05, 5.0, 25);
    let zs = lin_space(0.0, 1.9, 20);
    let reports = sandwich_grid(&us, &zs, None).map_err(|e| e.to_string())?;
    let failed = reports.iter().filter(|r| !r.holds_with_certainty).count();

    let xs: Vec<f64> = log_space(1e-3, 9.0, 200).into_iter().map(|t| 1.0 + t).collect();
    let mut gap_violations = 0;
    let mut identity_violations = 0;
    let mut checked = 0;
    for n in 1..=50usize {
        for &x in &xs {
            let g = coefficient_gap(n, x).map_err(|e| e.to_string())?;
            checked += 1;
            if g.gap > g.bound {
                gap_violations += 1;
            }
            // The gap is a⁽⁰⁾Δ; it must agree with the direct difference.
            if (g.gap - (g.boltzmann - g.monotone)).abs() > 1e-12 * g.boltzmann {
                identity_violations += 1;
            }
        }
    }
    check(
        failed == 0 && gap_violations == 0 && identity_violations == 0,
        format!(
            "{} grid points, {failed} uncertified or violated; {checked} coefficient checks, {gap_violations} violations, {identity_violations} identity mismatches",
            reports.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let s = harmonic_spectrum(1.0, 200).map_err(|e| e.to_string())?;
    let order = ModeOrder::total(60);
    // binom(60, 6) ≈ 5·10⁷ states exceeds the default cap.
    let t = Truncation::new(6, 60).with_capacity(60_000_000);
    let r =
        grand_partition_enumerated(&s, &order, StatisticsKind::Monotone, LN_2, 0.1, t).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut within_mode_bound = true;
    for n in 0..=6 {
        let exact = coeff_monotone_ho(n, LN_2).map_err(|e| e.to_string())?;
        let gap = exact - r.coefficients[n];
        worst = worst.max(gap.abs());
        within_mode_bound &= gap.abs() <= r.mode_tail_bounds[n] + 4.0 * f64::EPSILON * exact;
    }
    check(
        worst <= 1e-9 && within_mode_bound,
        format!("max |enumerated - product| = {worst:.2e}, within mode-tail bound: {within_mode_bound}"),
    )
}

fn degenerate_examples() -> Outcome {
    let (h, k) = (0.4, 1.1);
    let s = Spectrum::new(
        vec![EnergyLevel { energy: h, degeneracy: 2 }, EnergyLevel { energy: k, degeneracy: 1 }],
        Some(Tail::Empty),
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let blocks = ModeOrder::from_block_sizes(&[2, 1]).map_err(|e| e.to_string())?;
    let total = ModeOrder::total(3);
    let mut worst: f64 = 0.0;
    let mut exact_zeros = true;
    for beta in [0.3, 1.0, 2.7] {
        let e = |x: f64| (-beta * x).exp();
        let t = Truncation::new(5, 3);
        let run = |order: &ModeOrder, kind| {
            grand_partition_enumerated(&s, order, kind, beta, 0.5, t).map_err(|e| e.to_string())
        };
        let bm = run(&blocks, StatisticsKind::BlockMonotone)?;
        let want = [1.0, 2.0 * e(h) + e(k), 2.0 * e(h + k)];
        for (a, w) in bm.coefficients.iter().zip(want) {
            worst = worst.max((a - w).abs() / w);
        }
        exact_zeros &= bm.coefficients[3..].iter().all(|&a| a == 0.0);
        let bw = run(&blocks, StatisticsKind::BlockWeaklyMonotone)?;
        let w2 = 4.0 * e(2.0 * h) + 2.0 * e(h + k) + e(2.0 * k);
        worst = worst.max((bw.coefficients[2] - w2).abs() / w2);
        let m = run(&total, StatisticsKind::Monotone)?;
        let (a2, a3) = (e(2.0 * h) + 2.0 * e(h + k), e(2.0 * h + k));
        worst = worst.max((m.coefficients[2] - a2).abs() / a2).max((m.coefficients[3] - a3).abs() / a3);
        exact_zeros &= m.coefficients[4..].iter().all(|&a| a == 0.0);
    }
    check(worst <= 1e-12 && exact_zeros, format!("max relative deviation {worst:.2e} over three temperatures"))
}

fn operator_relations() -> Outcome {
    let report = monostat::fock::verify_relations(&ModeOrder::total(8), StatisticsKind::Monotone, 8, 3, 10_000_000)
        .map_err(|e| e.to_string())?;
    check(
        report.all_pass(),
        format!(
            "interior deviations: creation {}, annihilation {}, mixed {}, commutation {}",
            report.creation_pairs.interior,
            report.annihilation_pairs.interior,
            report.mixed_pairs.interior,
            report.commutation.interior
        ),
    )
}

fn low_density_limit() -> Outcome {
    let mut last_gap = f64::INFINITY;
    let mut ok = true;
    let mut gaps = Vec::new();
    for k in 1..=12u32 {
        let (u, z) = region_path_point(k, 0.5).map_err(|e| e.to_string())?;
        let expected_u = 2.0 * -(-(z / 2.0)).ln_1p();
        let r = ratio_zm_z0(u, z, None).map_err(|e| e.to_string())?;
        let lower = 1.0 - (z * z / 4.0).sqrt();
        ok &= (u - expected_u).abs() <= 1e-15 * expected_u;
        ok &= r.lo >= lower && r.value <= 1.0;
        let gap = 1.0 - r.value;
        ok &= gap < last_gap;
        last_gap = gap;
        gaps.push(gap);
    }
    check(ok, format!("1 - Zm/Z0 from {:.3e} (k=1) to {:.3e} (k=12)", gaps[0], gaps[11]))
}

fn asymptotics() -> Outcome {
    let mut low: f64 = 0.0;
    for n in 1..=5 {
        low = low.max((asym_low_beta(n, 1e-3).map_err(|e| e.to_string())? - 1.0).abs());
    }
    let mut high: f64 = 0.0;
    for n in 1..=4 {
        high = high.max((asym_high_beta(n, 20.0).map_err(|e| e.to_string())? - 1.0).abs());
    }
    check(low <= 1e-2 && high <= 1e-8, format!("low-u deviation {low:.2e}, high-u deviation {high:.2e}"))
}

#[derive(serde::Deserialize)]
struct Calibration {
    u: Vec<f64>,
    z: Vec<f64>,
    tolerance: f64,
}

fn average_numbers() -> Outcome {
    let s = harmonic_spectrum(1.0, 4000).map_err(|e| e.to_string())?;
    let mut boltzmann_worst: f64 = 0.0;
    for &u in &lin_space(0.05, 5.0, 25) {
        let zeta = zeta_ho_closed(u).map_err(|e| e.to_string())?;
        for &z in &lin_space(0.0, 1.9, 20) {
            let n_max = monostat::series::default_n_max(zeta, z);
            let r = boltzmann_corrected_from_enumeration(&s, u, z, n_max, 4000).map_err(|e| e.to_string())?;
            boltzmann_worst = boltzmann_worst.max((avg_number_series(&r).value - zeta * z).abs());
        }
    }

    let cal: Calibration =
        serde_json::from_str(include_str!("../../core/tests/fixtures/number_approx_calibration.json"))
            .map_err(|e| e.to_string())?;
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut first_excess: Option<f64> = None;
    let mut correction_negative = true;
    for &u in &cal.u {
        for &z in &cal.z {
            let exact = avg_number_series(&z_monotone_ho(u, z, Some(80)).map_err(|e| e.to_string())?).value;
            let approx = avg_number_monotone_approx(u, z).map_err(|e| e.to_string())?;
            let rel = (approx - exact).abs() / exact;
            if rel > worst.0 {
                worst = (rel, u, z);
            }
            if rel > cal.tolerance && first_excess.is_none() {
                first_excess = Some(u);
            }
            correction_negative &= monotone_number_correction(u, z).map_err(|e| e.to_string())? < 0.0;
        }
    }
    let detail = format!(
        "Boltzmann |N - zeta z| <= {boltzmann_worst:.2e}; approximation max rel. error {:.4} at u={}, z={} (tolerance {}, first exceeded at u={}); correction negative everywhere: {correction_negative}",
        worst.0,
        worst.1,
        worst.2,
        cal.tolerance,
        first_excess.map_or("never".to_string(), |u| u.to_string()),
    );
    check(boltzmann_worst <= 1e-10 && worst.0 <= cal.tolerance && correction_negative, detail)
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out =
        Command::new(env!("CARGO_BIN_EXE_monostat")).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = r#"{"u": "lin:0.5:2:4", "z": [0, 0.1, 0.5], "nmax": 4, "mode-cutoff": 20, "both-engines": true}"#;
    std::fs::write(dir.path().join("run.json"), config).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 4] = [
        &["grand", "--config", "run.json"],
        &["scan", "--config", "run.json", "--kind", "boltzmann,monotone,weakly-monotone"],
        &["bounds", "--u", "lin:0.05:5:25", "--z", "lin:0:1.9:20"],
        &["fock-check"],
    ];
    let mut bytes = 0;
    for args in runs {
        let first = run_cli(args, dir.path())?;
        let second = run_cli(args, dir.path())?;
        if first != second || first.is_empty() {
            return Err(format!("{args:?} produced differing output"));
        }
        bytes += first.len();
    }
    let files = ["delta2_scan.csv", "delta2_fit.csv", "config.json"];
    let out = dir.path().join("appendix");
    let mut rounds = Vec::new();
    for _ in 0..2 {
        std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
        run_cli(&["appendix", "--out", "appendix"], dir.path())?;
        let contents: Result<Vec<_>, _> = files.iter().map(|f| std::fs::read(out.join(f))).collect();
        rounds.push(contents.map_err(|e| e.to_string())?);
        std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    }
    for (i, file) in files.iter().enumerate() {
        if rounds[0][i] != rounds[1][i] {
            return Err(format!("appendix {file} differs between runs"));
        }
        bytes += rounds[0][i].len();
    }
    Ok(format!("five subcommands, {bytes} bytes compared"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("quartic fit of the second derivative at x=1", appendix_fit),
        ("second derivative negative for x>1", second_derivative_sign),
        ("value and first derivative at x=1", values_at_one),
        ("sandwich bound and coefficient inequality", sandwich),
        ("enumerated monotone series equals the product formula", oracle_equivalence),
        ("degenerate two-level examples", degenerate_examples),
        ("monotone operator relations", operator_relations),
        ("low-density limit along region R", low_density_limit),
        ("high- and low-temperature asymptotics", asymptotics),
        ("average particle numbers", average_numbers),
        ("deterministic CLI output", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({detail}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
