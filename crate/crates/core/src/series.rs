//! Grand-partition functions `Z = Σ aₙ zⁿ`.
//!
//! Three families of engines live here:
//!
//! * closed forms: Boltzmann `e^{ζz}` and the uncorrected full-Fock trace
//!   `1/(1−ζz)`;
//! * the harmonic-oscillator monotone coefficients
//!   `aₙ = e^{nu/2} ∏_{k=1}^{n} 1/(e^{ku}−1)`, evaluated in log space;
//! * a brute-force engine that sums `e^{−β·energy}` over every admissible
//!   Fock basis state of a truncated spectrum.
//!
//! Every engine reports a [`SeriesResult`] with rigorous bounds on what the
//! truncation in `n` and in the mode index may have dropped.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, AlignedModes, ModeOrder, StatisticsKind};
use crate::numeric::{
    compensated_sum, exp_series_moment_remainder, exp_series_remainder, geometric_moment_remainder,
    geometric_remainder, ln_expm1, ln_factorial, CompensatedSum,
};
use crate::spectrum::{zeta_ho_closed, Spectrum};

/// Largest truncation order chosen automatically.
pub const MAX_AUTO_N: usize = 512;
/// Absolute target for the automatic truncation order.
pub const AUTO_N_TOLERANCE: f64 = 1e-12;

/// Which parts of a [`SeriesResult`] carry a rigorous bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certification {
    /// The bound on `Σ_{n>N} aₙ zⁿ` is finite and rigorous.
    pub coeff_tail: bool,
    /// The bound on coefficients lost to the mode cutoff is rigorous.
    pub mode_tail: bool,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.coeff_tail && self.mode_tail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesResult {
    pub coefficients: Vec<f64>,
    pub z: f64,
    /// `Σ_{n≤N} aₙ zⁿ`, a lower bound of the full series.
    pub value: f64,
    pub n_max: usize,
    /// Bound on `Σ_{n>N} aₙ zⁿ`.
    pub coeff_tail_bound: f64,
    /// Bound on `Σ_{n>N} n·aₙ zⁿ`.
    pub moment_tail_bound: f64,
    /// Bound on `Σ_{n≤N} δₙ zⁿ`, `δₙ` the mode-cutoff deficit of `aₙ`.
    pub mode_tail_bound: f64,
    /// Per-coefficient `δₙ` bounds; all zero for closed-form engines.
    pub mode_tail_bounds: Vec<f64>,
    pub certification: Certification,
}

impl SeriesResult {
    fn from_coefficients(
        coefficients: Vec<f64>,
        z: f64,
        coeff_tail_bound: f64,
        moment_tail_bound: f64,
        mode_tail_bounds: Vec<f64>,
        certification: Certification,
    ) -> Self {
        let value = weighted_sum(&coefficients, z, 0);
        let mode_tail_bound = if mode_tail_bounds.iter().any(|b| !b.is_finite()) {
            f64::INFINITY
        } else {
            weighted_sum(&mode_tail_bounds, z, 0)
        };
        Self {
            n_max: coefficients.len() - 1,
            coefficients,
            z,
            value,
            coeff_tail_bound,
            moment_tail_bound,
            mode_tail_bound,
            mode_tail_bounds,
            certification,
        }
    }

    /// Partial sums `Σ_{m≤n} aₘ zᵐ` for `n = 0..=N`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = CompensatedSum::new();
        let mut zn = 1.0;
        self.coefficients
            .iter()
            .map(|a| {
                acc.add(a * zn);
                zn *= self.z;
                acc.value()
            })
            .collect()
    }

    /// `Σ n·aₙ zⁿ` over the retained coefficients.
    pub fn first_moment(&self) -> f64 {
        weighted_sum(&self.coefficients, self.z, 1)
    }

    /// Total certified uncertainty on `value` (`∞` when uncertified).
    pub fn error_bound(&self) -> f64 {
        self.coeff_tail_bound + self.mode_tail_bound
    }

    /// Upper end of the interval containing the untruncated series.
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound()
    }

    pub fn certified(&self) -> bool {
        self.certification.certified() && self.error_bound().is_finite()
    }
}

/// `Σ n^power · cₙ zⁿ` with compensated summation.
fn weighted_sum(coefficients: &[f64], z: f64, power: i32) -> f64 {
    let mut zn = 1.0;
    compensated_sum(coefficients.iter().enumerate().map(|(n, c)| {
        let term = if power == 0 { c * zn } else { (n as f64).powi(power) * c * zn };
        zn *= z;
        term
    }))
}

/// `ζⁿ/n!`, in log space for `n > 20`.
pub fn coeff_boltzmann(n: usize, zeta: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if zeta <= 0.0 {
        return 0.0;
    }
    if n <= 20 {
        (1..=n).fold(1.0, |acc, k| acc * zeta / k as f64)
    } else {
        (n as f64 * zeta.ln() - ln_factorial(n)).exp()
    }
}

/// Boltzmann grand-partition function `e^{ζz}`.
pub fn z_boltzmann(zeta: f64, z: f64) -> f64 {
    (zeta * z).exp()
}

/// Trace over the uncorrected full Fock space, `1/(1−ζz)`.
pub fn z_full_uncorrected(zeta: f64, z: f64) -> Result<f64> {
    let y = zeta * z;
    if y >= 1.0 {
        return Err(Error::Domain(format!(
            "full Fock trace diverges for zeta*z = {y} >= 1 (requires mu < min sigma(H))"
        )));
    }
    Ok(1.0 / (1.0 - y))
}

fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta*hbar_omega must be > 0, got {u}")));
    }
    Ok(())
}

/// `ln aₙ` for the monotone harmonic oscillator: `nu/2 − Σ_{k≤n} ln(e^{ku}−1)`.
pub fn ln_coeff_monotone_ho(n: usize, u: f64) -> Result<f64> {
    check_u(u)?;
    let log_denominator = compensated_sum((1..=n).map(|k| ln_expm1(k as f64 * u)));
    Ok(n as f64 * u / 2.0 - log_denominator)
}

/// Monotone harmonic-oscillator coefficient `e^{nu/2} ∏_{k=1}^{n} 1/(e^{ku}−1)`.
pub fn coeff_monotone_ho(n: usize, u: f64) -> Result<f64> {
    Ok(ln_coeff_monotone_ho(n, u)?.exp())
}

/// Smallest `N` with `(ζz)^{N+1}/(N+1)!·e^{ζz} < 10⁻¹²`, capped at 512.
pub fn default_n_max(zeta: f64, z: f64) -> usize {
    let x = zeta * z;
    (1..MAX_AUTO_N).find(|&n| exp_series_remainder(x, n) < AUTO_N_TOLERANCE).unwrap_or(MAX_AUTO_N)
}

/// Monotone harmonic-oscillator grand-partition series at `u = βħω`.
///
/// Since `aₙ ≤ ζⁿ/n!`, the Boltzmann remainder bounds the dropped terms.
pub fn z_monotone_ho(u: f64, z: f64, n_max: Option<usize>) -> Result<SeriesResult> {
    check_u(u)?;
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
    }
    let zeta = zeta_ho_closed(u)?;
    let n_max = n_max.unwrap_or_else(|| default_n_max(zeta, z));
    let coefficients = (0..=n_max).map(|n| coeff_monotone_ho(n, u)).collect::<Result<Vec<_>>>()?;
    let x = zeta * z;
    Ok(SeriesResult::from_coefficients(
        coefficients,
        z,
        exp_series_remainder(x, n_max),
        exp_series_moment_remainder(x, n_max),
        vec![0.0; n_max + 1],
        Certification { coeff_tail: true, mode_tail: true },
    ))
}

/// Truncation parameters of the enumerated engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub n_max: usize,
    pub mode_cutoff: usize,
    pub capacity: u64,
}

impl Truncation {
    pub fn new(n_max: usize, mode_cutoff: usize) -> Self {
        Self { n_max, mode_cutoff, capacity: crate::DEFAULT_CAPACITY }
    }

    pub fn with_capacity(mut self, capacity: u64) -> Self {
        self.capacity = capacity;
        self
    }
}

fn check_point(beta: f64, z: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
    }
    Ok(())
}

/// Mode weights `e^{−βε}` below the cutoff, aligned with `order`.
fn mode_weights(spectrum: &Spectrum, order: &ModeOrder, beta: f64, mode_cutoff: usize) -> Result<Vec<f64>> {
    if mode_cutoff > order.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode cutoff {mode_cutoff} exceeds the {} modes of the order",
            order.num_modes()
        )));
    }
    let aligned = AlignedModes::new(spectrum, order)?;
    Ok(aligned.energies()[..mode_cutoff].iter().map(|e| (-beta * e).exp()).collect())
}

/// Largest particle number with a nonzero coefficient on the truncated mode
/// set, if the kind caps it.
fn max_occupation(order: &ModeOrder, kind: StatisticsKind, mode_cutoff: usize) -> Option<usize> {
    match kind {
        StatisticsKind::Monotone => Some(mode_cutoff),
        StatisticsKind::BlockMonotone => Some(order.block_sizes_below(mode_cutoff).len()),
        _ => None,
    }
}

/// Bound on the deficit of `aₙ` caused by dropping modes of total weight
/// `tail`, given the full one-particle sum is at most `zeta_up`.
fn mode_deficit_bound(kind: StatisticsKind, n: usize, zeta_trunc: f64, zeta_up: f64, tail: f64) -> f64 {
    if n == 0 || tail == 0.0 {
        return 0.0;
    }
    if !tail.is_finite() {
        return f64::INFINITY;
    }
    let m = n - 1;
    match kind {
        StatisticsKind::FullDistinguishable => zeta_up.powi(n as i32) - zeta_trunc.powi(n as i32),
        // Drop the last (largest) mode: the rest is an (n−1)-state.
        StatisticsKind::Monotone | StatisticsKind::BlockMonotone => tail * coeff_boltzmann(m, zeta_up),
        StatisticsKind::WeaklyMonotoneTotal => tail * zeta_up.powi(m as i32),
        // Drop the first mode beyond the cutoff, at any of n positions.
        StatisticsKind::BlockWeaklyMonotone => n as f64 * tail * zeta_up.powi(m as i32),
    }
}

/// Brute-force grand-partition series: `aₙ = Σ e^{−β·energy}` over the
/// admissible `n`-particle states with modes below the cutoff.
///
/// `order` must be aligned with `spectrum` (see [`AlignedModes`]). The
/// per-`n` sums run concurrently; each uses a fixed visiting order and
/// compensated summation, so results are reproducible bit-for-bit.
pub fn grand_partition_enumerated(
    spectrum: &Spectrum,
    order: &ModeOrder,
    kind: StatisticsKind,
    beta: f64,
    z: f64,
    truncation: Truncation,
) -> Result<SeriesResult> {
    check_point(beta, z)?;
    let Truncation { n_max, mode_cutoff, capacity } = truncation;
    let weights = mode_weights(spectrum, order, beta, mode_cutoff)?;
    // Report the smallest offending n regardless of scheduling.
    for n in 0..=n_max {
        fock::check_capacity(order, kind, n, mode_cutoff, capacity)?;
    }

    let coefficients = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut acc = CompensatedSum::new();
            fock::for_each_state(order, kind, n, mode_cutoff, capacity, |modes| {
                acc.add(modes.iter().fold(1.0, |p, &m| p * weights[m]));
            })?;
            Ok(acc.value())
        })
        .collect::<Result<Vec<f64>>>()?;

    let zeta_trunc = compensated_sum(weights.iter().copied());
    let tail = spectrum.mode_tail_weight(beta, mode_cutoff);
    let mode_certified = tail.is_some_and(f64::is_finite);
    let tail_weight = tail.unwrap_or(f64::INFINITY);
    let zeta_up = if mode_certified { zeta_trunc + tail_weight } else { zeta_trunc };

    let mode_tail_bounds = (0..=n_max).map(|n| mode_deficit_bound(kind, n, zeta_trunc, zeta_up, tail_weight)).collect();

    let x = zeta_up * z;
    let terminates = tail_weight == 0.0 && max_occupation(order, kind, mode_cutoff).is_some_and(|m| m <= n_max);
    let (coeff_tail, moment_tail) = if terminates {
        (0.0, 0.0)
    } else {
        match kind {
            StatisticsKind::Monotone | StatisticsKind::BlockMonotone => {
                (exp_series_remainder(x, n_max), exp_series_moment_remainder(x, n_max))
            }
            _ => (geometric_remainder(x, n_max), geometric_moment_remainder(x, n_max)),
        }
    };
    Ok(SeriesResult::from_coefficients(
        coefficients,
        z,
        coeff_tail,
        moment_tail,
        mode_tail_bounds,
        Certification { coeff_tail: coeff_tail.is_finite(), mode_tail: mode_certified },
    ))
}

/// Boltzmann series rebuilt from the enumerated one-particle sum:
/// `aₙ = ζ_truncⁿ/n!`.
pub fn boltzmann_corrected_from_enumeration(
    spectrum: &Spectrum,
    beta: f64,
    z: f64,
    n_max: usize,
    mode_cutoff: usize,
) -> Result<SeriesResult> {
    check_point(beta, z)?;
    let order = ModeOrder::from_spectrum(spectrum, mode_cutoff)?;
    let weights = mode_weights(spectrum, &order, beta, mode_cutoff)?;
    let zeta_trunc = compensated_sum(weights.iter().copied());
    let tail = spectrum.mode_tail_weight(beta, mode_cutoff);
    let mode_certified = tail.is_some_and(f64::is_finite);
    let zeta_up = zeta_trunc + tail.filter(|t| t.is_finite()).unwrap_or(0.0);

    let coefficients: Vec<f64> = (0..=n_max).map(|n| coeff_boltzmann(n, zeta_trunc)).collect();
    let mode_tail_bounds =
        (0..=n_max)
            .map(|n| {
                if !mode_certified {
                    f64::INFINITY
                } else {
                    coeff_boltzmann(n, zeta_up) - coeff_boltzmann(n, zeta_trunc)
                }
            })
            .collect();
    let x = zeta_up * z;
    Ok(SeriesResult::from_coefficients(
        coefficients,
        z,
        exp_series_remainder(x, n_max),
        exp_series_moment_remainder(x, n_max),
        mode_tail_bounds,
        Certification { coeff_tail: true, mode_tail: mode_certified },
    ))
}

/// Generating-function closed form of the truncated enumerated series:
/// products `∏(1+zw)` for exclusive kinds, `∏ 1/(1−zw)` for weak kinds,
/// `1/(1−zζ)` for the full Fock space. Weights are per mode for totally
/// ordered kinds and per block for block kinds.
pub fn generating_product(
    spectrum: &Spectrum,
    order: &ModeOrder,
    kind: StatisticsKind,
    beta: f64,
    z: f64,
    mode_cutoff: usize,
) -> Result<f64> {
    check_point(beta, z)?;
    if kind.requires_total_order() && !order.is_total() {
        return Err(Error::KindOrderMismatch { kind: kind.name().into() });
    }
    let weights = mode_weights(spectrum, order, beta, mode_cutoff)?;
    let factors: Vec<f64> = match kind {
        StatisticsKind::BlockMonotone | StatisticsKind::BlockWeaklyMonotone => order
            .block_sizes_below(mode_cutoff)
            .iter()
            .enumerate()
            .map(|(b, _)| {
                let range = order.block_range(b);
                compensated_sum(weights[range.start..range.end.min(mode_cutoff)].iter().copied())
            })
            .collect(),
        _ => weights,
    };
    let ln_product = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let logs = factors.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
        Ok(compensated_sum(logs).exp())
    };
    match kind {
        StatisticsKind::FullDistinguishable => z_full_uncorrected(compensated_sum(factors.iter().copied()), z),
        StatisticsKind::Monotone | StatisticsKind::BlockMonotone => ln_product(&|w| Ok((z * w).ln_1p())),
        StatisticsKind::WeaklyMonotoneTotal | StatisticsKind::BlockWeaklyMonotone => ln_product(&|w| {
            if z * w >= 1.0 {
                Err(Error::Domain(format!("geometric factor diverges: z*w = {} >= 1", z * w)))
            } else {
                Ok(-(-z * w).ln_1p())
            }
        }),
    }
}
