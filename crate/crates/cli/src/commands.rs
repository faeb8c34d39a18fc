use std::path::Path;

use anyhow::{bail, Context};
use monostat::bounds::{
    delta2_scan, fit_delta2, ratio_zm_z0, region_path_point, region_r, sandwich_grid, EXACT_QUARTIC,
};
use monostat::fock::{admissible, count_states, enumerate_basis, verify_relations, AlignedModes};
use monostat::numeric::{binomial, log_space};
use monostat::observables::{compare_statistics, ObservableRow, Statistics};
use monostat::series::{
    boltzmann_corrected_from_enumeration, default_n_max, generating_product, grand_partition_enumerated, z_boltzmann,
    z_monotone_ho, SeriesResult, Truncation,
};
use monostat::spectrum::partition_function;
use monostat::{BasisState, ModeOrder, StatisticsKind, ThermoPoint};
use rayon::prelude::*;

use crate::config::{betas, resolve_spectrum, thermo_grid, Axis, RunConfig, SpectrumChoice};
use crate::output::{num, Failure, Table};

/// Enumerated particle number used when `--nmax` is absent.
const DEFAULT_ENUMERATED_NMAX: usize = 6;
const DEFAULT_CUTOFF: usize = 30;

fn mode_cutoff(cfg: &RunConfig, choice: &SpectrumChoice) -> usize {
    let available = usize::try_from(choice.spectrum.num_modes()).unwrap_or(usize::MAX);
    cfg.mode_cutoff.unwrap_or(DEFAULT_CUTOFF.min(available))
}

/// Total order for totally ordered kinds, level blocks otherwise.
fn order_for(kind: StatisticsKind, choice: &SpectrumChoice, cutoff: usize) -> anyhow::Result<ModeOrder> {
    if kind.requires_total_order() {
        Ok(ModeOrder::total(cutoff))
    } else {
        Ok(ModeOrder::from_spectrum(&choice.spectrum, cutoff)?)
    }
}

fn truncation(cfg: &RunConfig, cutoff: usize) -> Truncation {
    Truncation::new(cfg.nmax.unwrap_or(DEFAULT_ENUMERATED_NMAX), cutoff).with_capacity(cfg.capacity())
}

pub fn zeta(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let choice = resolve_spectrum(cfg)?;
    let scale = choice.spectrum.scale();
    let betas = betas(cfg, scale, "lin:0.05:5:25")?;
    let values = betas.par_iter().map(|&b| partition_function(&choice.spectrum, b)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::create(cfg.out.as_deref(), &["beta", "u", "zeta", "tail_bound", "uncertified"])?;
    for (b, v) in betas.iter().zip(values) {
        let tail = v.tail_bound.map(num).unwrap_or_default();
        table.row([num(*b), num(b * scale), num(v.value), tail, (!v.certified()).to_string()])?;
    }
    table.finish()?;
    Ok(Vec::new())
}

/// One engine's evaluation of `Z` at a point.
struct Evaluation {
    engine: &'static str,
    value: f64,
    error: f64,
    certified: bool,
}

impl Evaluation {
    fn from_series(engine: &'static str, r: &SeriesResult) -> Self {
        Self { engine, value: r.value, error: r.error_bound(), certified: r.certified() }
    }
}

fn boltzmann_closed(choice: &SpectrumChoice, p: ThermoPoint) -> anyhow::Result<Evaluation> {
    let zeta = partition_function(&choice.spectrum, p.beta)?;
    let value = z_boltzmann(zeta.value, p.z);
    let error = if zeta.certified() { z_boltzmann(zeta.upper(), p.z) - value } else { f64::INFINITY };
    Ok(Evaluation { engine: "closed-form", value, error, certified: zeta.certified() })
}

fn boltzmann_series(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    p: ThermoPoint,
    cutoff: usize,
) -> anyhow::Result<SeriesResult> {
    let zeta = partition_function(&choice.spectrum, p.beta)?;
    let n_max = cfg.nmax.unwrap_or_else(|| default_n_max(zeta.value, p.z));
    Ok(boltzmann_corrected_from_enumeration(&choice.spectrum, p.beta, p.z, n_max, cutoff)?)
}

fn enumerated(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    kind: StatisticsKind,
    p: ThermoPoint,
    cutoff: usize,
) -> anyhow::Result<SeriesResult> {
    let order = order_for(kind, choice, cutoff)?;
    Ok(grand_partition_enumerated(&choice.spectrum, &order, kind, p.beta, p.z, truncation(cfg, cutoff))?)
}

/// The series behind the primary engine of `grand` and `coeffs`.
fn primary_series(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    stats: Statistics,
    p: ThermoPoint,
    cutoff: usize,
) -> anyhow::Result<(&'static str, SeriesResult)> {
    match stats {
        Statistics::Boltzmann => Ok(("enumerated-zeta", boltzmann_series(cfg, choice, p, cutoff)?)),
        Statistics::Fock(StatisticsKind::Monotone) if choice.harmonic => {
            let u = p.beta * choice.spectrum.scale();
            Ok(("product-formula", z_monotone_ho(u, p.z, cfg.nmax)?))
        }
        Statistics::Fock(kind) => Ok(("enumerated", enumerated(cfg, choice, kind, p, cutoff)?)),
    }
}

fn grand_primary(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    stats: Statistics,
    p: ThermoPoint,
    cutoff: usize,
) -> anyhow::Result<Evaluation> {
    match stats {
        Statistics::Boltzmann => boltzmann_closed(choice, p),
        _ => {
            let (engine, r) = primary_series(cfg, choice, stats, p, cutoff)?;
            Ok(Evaluation::from_series(engine, &r))
        }
    }
}

fn grand_cross(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    stats: Statistics,
    p: ThermoPoint,
    cutoff: usize,
) -> anyhow::Result<Evaluation> {
    match stats {
        Statistics::Boltzmann => {
            Ok(Evaluation::from_series("enumerated-zeta", &boltzmann_series(cfg, choice, p, cutoff)?))
        }
        Statistics::Fock(StatisticsKind::Monotone) if choice.harmonic => {
            let r = enumerated(cfg, choice, StatisticsKind::Monotone, p, cutoff)?;
            Ok(Evaluation::from_series("enumerated", &r))
        }
        Statistics::Fock(kind) => {
            // Exact over the retained modes, summed to all particle numbers.
            let order = order_for(kind, choice, cutoff)?;
            let value = generating_product(&choice.spectrum, &order, kind, p.beta, p.z, cutoff)?;
            Ok(Evaluation { engine: "generating-product", value, error: 0.0, certified: true })
        }
    }
}

pub fn grand(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let choice = resolve_spectrum(cfg)?;
    let stats = cfg.single_statistics()?;
    let cutoff = mode_cutoff(cfg, &choice);
    let scale = choice.spectrum.scale();
    let points = thermo_grid(cfg, &betas(cfg, scale, "1")?, "0.1")?;

    let rows = points
        .par_iter()
        .map(|&p| {
            let primary = grand_primary(cfg, &choice, stats, p, cutoff)?;
            let cross = if cfg.both_engines { Some(grand_cross(cfg, &choice, stats, p, cutoff)?) } else { None };
            Ok((p, primary, cross))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut header = vec!["beta", "u", "z", "kind", "engine", "value", "error_bound", "certified"];
    if cfg.both_engines {
        header.extend(["cross_engine", "cross_value", "cross_error_bound", "abs_gap", "consistent"]);
    }
    let mut table = Table::create(cfg.out.as_deref(), &header)?;
    let mut failures = Vec::new();
    for (p, primary, cross) in rows {
        let mut fields = vec![
            num(p.beta),
            num(p.beta * scale),
            num(p.z),
            stats.label().to_string(),
            primary.engine.to_string(),
            num(primary.value),
            num(primary.error),
            primary.certified.to_string(),
        ];
        if let Some(cross) = cross {
            let gap = (primary.value - cross.value).abs();
            let slack = 1e-12 * primary.value.abs().max(1.0);
            let consistent = gap <= primary.error + cross.error + slack;
            if !consistent {
                failures.push(Failure::new(
                    "engine-consistency",
                    format!("beta={} z={}: gap {gap:e} exceeds the combined bounds", p.beta, p.z),
                ));
            }
            fields.extend([
                cross.engine.to_string(),
                num(cross.value),
                num(cross.error),
                num(gap),
                consistent.to_string(),
            ]);
        }
        table.row(fields)?;
    }
    table.finish()?;
    Ok(failures)
}

pub fn coeffs(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let choice = resolve_spectrum(cfg)?;
    let stats = cfg.single_statistics()?;
    let cutoff = mode_cutoff(cfg, &choice);
    let points = thermo_grid(cfg, &betas(cfg, choice.spectrum.scale(), "1")?, "0.1")?;
    let [p] = points.as_slice() else {
        bail!("coeffs needs exactly one (temperature, activity) point, got {}", points.len());
    };
    let (_, r) = primary_series(cfg, &choice, stats, *p, cutoff)?;

    let mut table = Table::create(cfg.out.as_deref(), &["n", "a_n", "partial_sum", "tail_bound"])?;
    for (n, (a, s)) in r.coefficients.iter().zip(r.partial_sums()).enumerate() {
        // Everything the partial sum up to n can be missing.
        let remainder = (r.value - s).max(0.0) + r.error_bound();
        table.row([n.to_string(), num(*a), num(s), num(remainder)])?;
    }
    table.finish()?;

    if let Some(path) = &cfg.dump_basis {
        let Statistics::Fock(kind) = stats else {
            bail!("--dump-basis needs a Fock-space kind");
        };
        dump_basis(cfg, &choice, kind, cutoff, r.n_max, path)?;
    }
    Ok(Vec::new())
}

fn dump_basis(
    cfg: &RunConfig,
    choice: &SpectrumChoice,
    kind: StatisticsKind,
    cutoff: usize,
    n_max: usize,
    path: &Path,
) -> anyhow::Result<()> {
    let order = order_for(kind, choice, cutoff)?;
    let aligned = AlignedModes::new(&choice.spectrum, &order)?;
    let mut table = Table::create(Some(path), &["n", "modes", "energy"])?;
    for n in 0..=n_max {
        for state in enumerate_basis(&order, kind, n, cutoff, cfg.capacity())? {
            table.row([n.to_string(), state.to_string(), num(aligned.energy(&state)?)])?;
        }
    }
    table.finish()
}

pub fn bounds(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let gamma = cfg.gamma.unwrap_or(0.5);
    if let Some(k_max) = cfg.r_path {
        return low_density_path(cfg, gamma, k_max);
    }
    let hw = cfg.hbar_omega();
    let us = match (&cfg.u, &cfg.beta) {
        (_, Some(b)) => b.0.iter().map(|b| b * hw).collect(),
        (Some(u), None) => u.0.clone(),
        (None, None) => "lin:0.05:5:25".parse::<Axis>().map_err(anyhow::Error::msg)?.0,
    };
    let zs = match &cfg.z {
        Some(z) => z.0.clone(),
        None => "lin:0:1.9:20".parse::<Axis>().map_err(anyhow::Error::msg)?.0,
    };
    if cfg.mu.is_some() {
        bail!("bounds takes activities through --z");
    }
    let reports = sandwich_grid(&us, &zs, cfg.nmax)?;
    let mut table = Table::create(
        cfg.out.as_deref(),
        &["u", "z", "f", "lower", "zm", "zm_tail", "upper", "in_region", "holds_with_certainty"],
    )?;
    let mut failures = Vec::new();
    for r in &reports {
        let in_region = if r.z < 2.0 { region_r(r.u, r.z, gamma)?.to_string() } else { String::new() };
        table.row([
            num(r.u),
            num(r.z),
            num(r.f),
            num(r.lower),
            num(r.zm),
            num(r.zm_tail),
            num(r.upper),
            in_region,
            r.holds_with_certainty.to_string(),
        ])?;
        if !r.holds_with_certainty {
            failures.push(Failure::new("sandwich", format!("u={} z={}", r.u, r.z)));
        }
    }
    table.finish()?;
    Ok(failures)
}

/// `(u_k, z_k)` with `z_k = 2^{−k}` inside region R, where
/// `1 − (z/2)^{2(1−γ)} ≤ Z_m/Z₀ ≤ 1`.
fn low_density_path(cfg: &RunConfig, gamma: f64, k_max: u32) -> anyhow::Result<Vec<Failure>> {
    let mut table =
        Table::create(cfg.out.as_deref(), &["k", "z", "u", "ratio", "ratio_hi", "lower_limit", "in_region"])?;
    let mut failures = Vec::new();
    let mut last_gap = f64::INFINITY;
    for k in 1..=k_max {
        let (u, z) = region_path_point(k, gamma)?;
        let r = ratio_zm_z0(u, z, cfg.nmax)?;
        let lower_limit = 1.0 - (z / 2.0).powf(2.0 * (1.0 - gamma));
        let in_region = region_r(u, z, gamma)?;
        table.row([k.to_string(), num(z), num(u), num(r.value), num(r.hi), num(lower_limit), in_region.to_string()])?;
        if !(r.lo >= lower_limit && r.value <= 1.0) {
            failures
                .push(Failure::new("ratio-interval", format!("k={k}: ratio {} outside [{lower_limit}, 1]", r.value)));
        }
        let gap = 1.0 - r.value;
        if gap >= last_gap {
            failures.push(Failure::new("ratio-monotone", format!("k={k}: distance from 1 did not decrease")));
        }
        last_gap = gap;
    }
    table.finish()?;
    Ok(failures)
}

pub fn scan(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let choice = resolve_spectrum(cfg)?;
    let stats = match &cfg.kind {
        Some(_) => cfg.statistics()?,
        None => vec![Statistics::Boltzmann, Statistics::Fock(StatisticsKind::Monotone)],
    };
    let cutoff = mode_cutoff(cfg, &choice);
    let scale = choice.spectrum.scale();
    let points = thermo_grid(cfg, &betas(cfg, scale, "0.5,1,2")?, "0.1,0.5")?;

    // Each statistics uses the order it needs; rows are then interleaved by point.
    let mut columns: Vec<Vec<ObservableRow>> = Vec::with_capacity(stats.len());
    for &s in &stats {
        let kind = match s {
            Statistics::Fock(kind) => kind,
            Statistics::Boltzmann => StatisticsKind::BlockMonotone,
        };
        let order = order_for(kind, &choice, cutoff)?;
        columns.push(compare_statistics(&choice.spectrum, &order, &[s], &points, truncation(cfg, cutoff))?);
    }
    let mut table = Table::create(cfg.out.as_deref(), &["u", "z", "kind", "Z", "Z_err", "N", "N_err"])?;
    for i in 0..points.len() {
        for column in &columns {
            let r = &column[i];
            table.row([
                num(r.u),
                num(r.z),
                r.kind.to_string(),
                num(r.z_value),
                num(r.z_err),
                num(r.n.value),
                num(r.n_err()),
            ])?;
        }
    }
    table.finish()?;
    Ok(Vec::new())
}

pub fn appendix(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let Some(dir) = &cfg.out else {
        bail!("appendix writes two files and needs --out <directory>");
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let n_max = cfg.nmax.unwrap_or(20);
    let points = cfg.points.unwrap_or(1000);
    if points == 0 {
        bail!("--points must be positive");
    }
    // Equal steps in log x over (1, 10].
    let xs = log_space(10f64.powf(1.0 / points as f64), 10.0, points);
    let ns: Vec<usize> = (1..=n_max).collect();
    let scan = delta2_scan(&ns, &xs)?;

    let mut failures = Vec::new();
    let mut table = Table::create(Some(&dir.join("delta2_scan.csv")), &["n", "x", "d2"])?;
    let mut violations = 0usize;
    for &(n, x, d2) in &scan {
        table.row([n.to_string(), num(x), num(d2)])?;
        if (n >= 2 && (d2.is_nan() || d2 >= 0.0)) || (n == 1 && d2 != 0.0) {
            violations += 1;
        }
    }
    table.finish()?;
    if violations > 0 {
        failures.push(Failure::new("second-derivative-sign", format!("{violations} scan points violate the sign")));
    }

    let fit = fit_delta2(1, n_max)?;
    let mut table = Table::create(Some(&dir.join("delta2_fit.csv")), &["term", "fitted", "exact", "abs_error"])?;
    for power in (0..5).rev() {
        let err = (fit.b[power] - EXACT_QUARTIC[power]).abs();
        table.row([format!("b{power}"), num(fit.b[power]), num(EXACT_QUARTIC[power]), num(err)])?;
        if err > 1e-9 {
            failures.push(Failure::new("fit-coefficient", format!("b{power} off by {err:e}")));
        }
    }
    table.row(["max_residual".to_string(), num(fit.max_residual), num(0.0), num(fit.max_residual)])?;
    table.finish()?;
    if fit.max_residual > 1e-9 {
        failures.push(Failure::new("fit-residual", format!("{:e}", fit.max_residual)));
    }
    Ok(failures)
}

/// `e_n(g₀, g₁, …)`: number of ways to pick `n` distinct blocks, one mode each.
fn elementary_symmetric(sizes: &[usize], n: usize) -> u128 {
    let mut e = vec![0u128; n + 1];
    e[0] = 1;
    for &g in sizes {
        for k in (1..=n).rev() {
            e[k] = e[k].saturating_add(e[k - 1].saturating_mul(g as u128));
        }
    }
    e[n]
}

pub fn fock_check(cfg: &RunConfig) -> anyhow::Result<Vec<Failure>> {
    let cutoff = cfg.mode_cutoff.unwrap_or(8);
    let n_max = cfg.nmax.unwrap_or(3);
    let capacity = cfg.capacity();
    let total = ModeOrder::total(cutoff);
    let mut rows: Vec<(String, bool, String)> = Vec::new();

    let report = verify_relations(&total, StatisticsKind::Monotone, cutoff, n_max, capacity)?;
    for (name, d) in [
        ("creation-pairs", report.creation_pairs),
        ("annihilation-pairs", report.annihilation_pairs),
        ("mixed-pairs", report.mixed_pairs),
        ("commutation", report.commutation),
    ] {
        let detail = format!("interior={} boundary={} checked={}", d.interior, d.boundary, d.checked);
        rows.push((name.into(), d.interior == 0, detail));
    }
    rows.push(("adjoint".into(), report.adjoint_ok, "annihilation is the transpose of creation".into()));
    rows.push(("norms".into(), report.norms_ok, "nonzero operators have norm 1".into()));

    let m = cutoff as u64;
    for n in 0..=n_max {
        let expected = [
            (StatisticsKind::Monotone, binomial(m, n as u64)),
            (StatisticsKind::WeaklyMonotoneTotal, if n == 0 { Some(1) } else { binomial(m + n as u64 - 1, n as u64) }),
            (StatisticsKind::FullDistinguishable, (cutoff as u128).checked_pow(n as u32)),
        ];
        for (kind, want) in expected {
            let got = enumerate_basis(&total, kind, n, cutoff, capacity)?.len() as u128;
            let ok = want == Some(got) && count_states(&total, kind, n, cutoff) == got;
            let want = want.map_or_else(|| "overflow".to_string(), |w| w.to_string());
            rows.push((format!("count-{kind}"), ok, format!("n={n} enumerated={got} expected={want}")));
        }
    }

    // Degenerate levels make the block count non-trivial.
    let choice = match cfg.spectrum {
        Some(_) => resolve_spectrum(cfg)?,
        None => resolve_spectrum(&RunConfig { spectrum: Some("iso:3".into()), ..cfg.clone() })?,
    };
    let spectrum_cutoff = mode_cutoff(cfg, &choice).min(cutoff.max(1));
    let blocks = ModeOrder::from_spectrum(&choice.spectrum, spectrum_cutoff)?;
    let sizes = blocks.block_sizes_below(spectrum_cutoff);
    for n in 0..=n_max {
        let got = enumerate_basis(&blocks, StatisticsKind::BlockMonotone, n, spectrum_cutoff, capacity)?.len() as u128;
        let want = elementary_symmetric(&sizes, n);
        rows.push(("count-block-monotone".into(), got == want, format!("n={n} enumerated={got} expected={want}")));
    }

    // Singleton blocks: block rules coincide with the total-order rules.
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for n in 0..=n_max {
        for state in enumerate_basis(&total, StatisticsKind::FullDistinguishable, n, cutoff, capacity)? {
            let state: BasisState = state;
            checked += 1;
            let strict = admissible(&state, StatisticsKind::BlockMonotone, &total)?
                == admissible(&state, StatisticsKind::Monotone, &total)?;
            let weak = admissible(&state, StatisticsKind::BlockWeaklyMonotone, &total)?
                == admissible(&state, StatisticsKind::WeaklyMonotoneTotal, &total)?;
            if !(strict && weak) {
                mismatches += 1;
            }
        }
    }
    rows.push(("singleton-blocks".into(), mismatches == 0, format!("checked={checked} mismatches={mismatches}")));

    let mut table = Table::create(cfg.out.as_deref(), &["check", "passed", "detail"])?;
    let mut failures = Vec::new();
    for (check, passed, detail) in rows {
        table.row([check.as_str(), if passed { "true" } else { "false" }, detail.as_str()])?;
        if !passed {
            failures.push(Failure::new(check, detail));
        }
    }
    table.finish()?;
    Ok(failures)
}
