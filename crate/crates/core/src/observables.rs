//! Average particle numbers and side-by-side comparisons of statistics.
//!
//! `N = z ∂ln Z/∂z` is evaluated on the truncated series as
//! `Σ n aₙ zⁿ / Σ aₙ zⁿ`, so no numerical differentiation is involved.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{check_capacity, ModeOrder, StatisticsKind};
use crate::numeric::compensated_sum;
use crate::series::{grand_partition_enumerated, z_boltzmann, SeriesResult, Truncation};
use crate::spectrum::{partition_function, Spectrum, ThermoPoint};

/// A value with a certified enclosing interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, lo: value, hi: value }
    }

    /// Largest distance from `value` to an end of the interval.
    pub fn half_width(&self) -> f64 {
        (self.value - self.lo).max(self.hi - self.value)
    }
}

/// Average particle number from a truncated series.
///
/// The interval accounts for both the dropped orders and the mode-cutoff
/// deficits: `S₁/(S₀ + T₀) ≤ N ≤ (S₁ + T₁)/S₀`.
pub fn avg_number_series(r: &SeriesResult) -> Estimate {
    let s0 = r.value;
    let s1 = r.first_moment();
    let mut zn = 1.0;
    let mode_moment = compensated_sum(r.mode_tail_bounds.iter().enumerate().map(|(n, d)| {
        let term = if *d == 0.0 { 0.0 } else { n as f64 * d * zn };
        zn *= r.z;
        term
    }));
    let t0 = r.error_bound();
    let t1 = r.moment_tail_bound + mode_moment;
    let hi = if t1.is_finite() { (s1 + t1) / s0 } else { f64::INFINITY };
    let lo = if t0.is_finite() { s1 / (s0 + t0) } else { 0.0 };
    Estimate { value: s1 / s0, lo, hi }
}

/// `N₀ = ζz`, since `ln Z₀ = ζz`.
pub fn avg_number_boltzmann(zeta: f64, z: f64) -> Result<f64> {
    if !(zeta >= 0.0 && z >= 0.0) {
        return Err(Error::InvalidArgument(format!("zeta and z must be >= 0, got ({zeta}, {z})")));
    }
    Ok(zeta * z)
}

/// Low-density correction to `N₀` for the monotone oscillator,
/// `−z²e^u / (2((e^u − 1) − (z/2)²e^u))`. Always negative where defined.
pub fn monotone_number_correction(u: f64, z: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite() && z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("need u > 0 and z >= 0, got ({u}, {z})")));
    }
    // Divided through by e^u.
    let denom = -(-u).exp_m1() - (z / 2.0).powi(2);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "low-density approximation is undefined at u={u}, z={z}: (e^u-1) - (z/2)^2 e^u <= 0"
        )));
    }
    Ok(-z * z / (2.0 * denom))
}

/// Low-density approximation `N₀ + correction` of the monotone average
/// number for the harmonic oscillator.
pub fn avg_number_monotone_approx(u: f64, z: f64) -> Result<f64> {
    let correction = monotone_number_correction(u, z)?;
    let zeta = crate::spectrum::zeta_ho_closed(u)?;
    Ok(avg_number_boltzmann(zeta, z)? + correction)
}

/// A column of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistics {
    /// `Z₀ = e^{ζz}` from the spectrum's partition function.
    Boltzmann,
    /// Enumerated series for a Fock-space kind.
    Fock(StatisticsKind),
}

impl Statistics {
    pub fn label(&self) -> &'static str {
        match self {
            Statistics::Boltzmann => "boltzmann",
            Statistics::Fock(kind) => kind.name(),
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "boltzmann" {
            Ok(Statistics::Boltzmann)
        } else {
            s.parse().map(Statistics::Fock)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRow {
    pub u: f64,
    pub z: f64,
    pub kind: &'static str,
    pub z_value: f64,
    pub z_err: f64,
    pub n: Estimate,
    pub certified: bool,
}

impl ObservableRow {
    pub fn n_err(&self) -> f64 {
        self.n.half_width()
    }
}

fn boltzmann_row(spectrum: &Spectrum, point: ThermoPoint) -> Result<ObservableRow> {
    let zeta = partition_function(spectrum, point.beta)?;
    let z_value = z_boltzmann(zeta.value, point.z);
    let (z_err, n) = if zeta.certified() {
        let upper = zeta.upper();
        let z_err = z_boltzmann(upper, point.z) - z_value;
        (z_err, Estimate { value: zeta.value * point.z, lo: zeta.value * point.z, hi: upper * point.z })
    } else {
        (f64::INFINITY, Estimate { value: zeta.value * point.z, lo: zeta.value * point.z, hi: f64::INFINITY })
    };
    Ok(ObservableRow {
        u: point.beta * spectrum.scale(),
        z: point.z,
        kind: Statistics::Boltzmann.label(),
        z_value,
        z_err,
        n,
        certified: zeta.certified(),
    })
}

/// One row per `(point, statistics)`, points outermost, in input order.
///
/// Capacity is checked for every Fock kind before any work starts, so the
/// reported error does not depend on scheduling.
pub fn compare_statistics(
    spectrum: &Spectrum,
    order: &ModeOrder,
    statistics: &[Statistics],
    grid: &[ThermoPoint],
    truncation: Truncation,
) -> Result<Vec<ObservableRow>> {
    for s in statistics {
        if let Statistics::Fock(kind) = s {
            for n in 0..=truncation.n_max {
                check_capacity(order, *kind, n, truncation.mode_cutoff, truncation.capacity)?;
            }
        }
    }
    let tasks: Vec<(ThermoPoint, Statistics)> =
        grid.iter().flat_map(|p| statistics.iter().map(move |s| (*p, *s))).collect();
    tasks
        .par_iter()
        .map(|&(point, stats)| match stats {
            Statistics::Boltzmann => boltzmann_row(spectrum, point),
            Statistics::Fock(kind) => {
                let r = grand_partition_enumerated(spectrum, order, kind, point.beta, point.z, truncation)?;
                Ok(ObservableRow {
                    u: point.beta * spectrum.scale(),
                    z: point.z,
                    kind: stats.label(),
                    z_value: r.value,
                    z_err: r.error_bound(),
                    n: avg_number_series(&r),
                    certified: r.certified(),
                })
            }
        })
        .collect()
}
