//! One-particle spectra and the canonical partition function `ζ = Tr e^{−βH}`.
//!
//! A [`Spectrum`] is a finite list of retained levels plus an optional
//! description of what was cut off. Built-in spectra always know their tail;
//! user-supplied spectra may not, in which case every derived quantity is
//! flagged as uncertified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Eigenvalue `ε ≥ 0` together with its multiplicity `g(ε) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub energy: f64,
    pub degeneracy: u64,
}

/// Geometric domination of the omitted levels.
///
/// The `m`-th omitted level (`m = 0, 1, …`) has energy at least
/// `first_energy + m·spacing` and degeneracy at most
/// `first_degeneracy · degeneracy_growth^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricTail {
    pub first_energy: f64,
    pub first_degeneracy: f64,
    pub spacing: f64,
    pub degeneracy_growth: f64,
}

impl GeometricTail {
    /// Upper bound on `Σ_omitted g·e^{−βε}`; infinite when the dominating
    /// series diverges.
    pub fn bound(&self, beta: f64) -> f64 {
        let ratio = self.degeneracy_growth * (-beta * self.spacing).exp();
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        self.first_degeneracy * (-beta * self.first_energy).exp() / (1.0 - ratio)
    }
}

/// What is known about the levels beyond the retained ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Nothing was omitted: the one-particle space is finite-dimensional.
    Empty,
    Geometric(GeometricTail),
}

impl Tail {
    pub fn bound(&self, beta: f64) -> f64 {
        match self {
            Tail::Empty => 0.0,
            Tail::Geometric(g) => g.bound(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    levels: Vec<EnergyLevel>,
    tail: Option<Tail>,
    /// Natural energy scale (`ħω` for oscillators, 1 otherwise); `u = β·scale`.
    scale: f64,
}

/// Inverse temperature and activity. `z = e^{βμ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub z: f64,
}

impl ThermoPoint {
    pub fn new(beta: f64, z: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
        }
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
        }
        Ok(Self { beta, z })
    }

    /// Activity from the chemical potential, `z = e^{βμ}`.
    pub fn from_mu(beta: f64, mu: f64) -> Result<Self> {
        Self::new(beta, (beta * mu).exp())
    }

    pub fn mu(&self) -> f64 {
        self.z.ln() / self.beta
    }
}

/// Partition function over the retained levels and a bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValue {
    pub value: f64,
    /// `None` when the spectrum carries no tail descriptor.
    pub tail_bound: Option<f64>,
}

impl PartitionValue {
    pub fn certified(&self) -> bool {
        matches!(self.tail_bound, Some(b) if b.is_finite())
    }

    /// Upper end of the certified interval (`∞` if uncertified).
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound.unwrap_or(f64::INFINITY)
    }
}

impl Spectrum {
    /// Builds a spectrum, checking level invariants and tail consistency.
    pub fn new(levels: Vec<EnergyLevel>, tail: Option<Tail>, scale: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("spectrum needs at least one level".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("energy scale must be > 0, got {scale}")));
        }
        for (i, level) in levels.iter().enumerate() {
            if !(level.energy >= 0.0 && level.energy.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "levels[{i}].energy must be finite and >= 0, got {}",
                    level.energy
                )));
            }
            if level.degeneracy == 0 {
                return Err(Error::InvalidArgument(format!("levels[{i}].degeneracy must be >= 1")));
            }
            if i > 0 && level.energy <= levels[i - 1].energy {
                return Err(Error::InvalidArgument(format!(
                    "levels[{i}].energy = {} is not strictly above levels[{}].energy = {}",
                    level.energy,
                    i - 1,
                    levels[i - 1].energy
                )));
            }
        }
        if let Some(Tail::Geometric(g)) = &tail {
            let last = levels[levels.len() - 1].energy;
            if !(g.first_energy > last) || !(g.spacing > 0.0) || g.first_degeneracy < 0.0 || g.degeneracy_growth < 0.0 {
                return Err(Error::InvalidArgument(
                    "tail must start above the last retained level with positive spacing".into(),
                ));
            }
        }
        Ok(Self { levels, tail, scale })
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Total number of one-particle modes among the retained levels
    /// (saturating).
    pub fn num_modes(&self) -> u64 {
        self.levels.iter().fold(0u64, |acc, l| acc.saturating_add(l.degeneracy))
    }

    /// Level index and energy for each of the first `cutoff` modes.
    pub fn mode_levels(&self, cutoff: usize) -> Result<Vec<(usize, f64)>> {
        if (cutoff as u64) > self.num_modes() {
            return Err(Error::InvalidArgument(format!(
                "mode cutoff {cutoff} exceeds the {} retained modes",
                self.num_modes()
            )));
        }
        let mut out = Vec::with_capacity(cutoff);
        'outer: for (j, level) in self.levels.iter().enumerate() {
            for _ in 0..level.degeneracy {
                if out.len() == cutoff {
                    break 'outer;
                }
                out.push((j, level.energy));
            }
        }
        Ok(out)
    }

    /// Upper bound on `Σ e^{−βε}` over all modes with index `≥ cutoff`:
    /// the retained modes beyond the cutoff are summed exactly, the omitted
    /// levels through the tail descriptor. `None` without a descriptor.
    pub fn mode_tail_weight(&self, beta: f64, cutoff: usize) -> Option<f64> {
        let tail = self.tail.as_ref()?.bound(beta);
        let mut acc = CompensatedSum::new();
        let mut seen: u64 = 0;
        for level in &self.levels {
            let end = seen.saturating_add(level.degeneracy);
            let beyond = end.saturating_sub((cutoff as u64).max(seen));
            if beyond > 0 {
                acc.add(beyond as f64 * (-beta * level.energy).exp());
            }
            seen = end;
        }
        Some(acc.value() + tail)
    }
}

/// Non-degenerate levels `ħω(n+½)`, `n = 0..num_levels−1`, with the exact
/// geometric tail attached.
pub fn harmonic_spectrum(hbar_omega: f64, num_levels: usize) -> Result<Spectrum> {
    if !(hbar_omega > 0.0 && hbar_omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("hbar_omega must be > 0, got {hbar_omega}")));
    }
    if num_levels == 0 {
        return Err(Error::InvalidArgument("num_levels must be >= 1".into()));
    }
    let levels =
        (0..num_levels).map(|n| EnergyLevel { energy: hbar_omega * (n as f64 + 0.5), degeneracy: 1 }).collect();
    let tail = Tail::Geometric(GeometricTail {
        first_energy: hbar_omega * (num_levels as f64 + 0.5),
        first_degeneracy: 1.0,
        spacing: hbar_omega,
        degeneracy_growth: 1.0,
    });
    Spectrum::new(levels, Some(tail), hbar_omega)
}

/// Shells `ħω(n + d/2)` of the isotropic `d`-dimensional oscillator with
/// degeneracy `binom(d+n−1, n)`.
pub fn iso_oscillator_spectrum(dimension: u32, hbar_omega: f64, num_shells: usize) -> Result<Spectrum> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if !(hbar_omega > 0.0 && hbar_omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("hbar_omega must be > 0, got {hbar_omega}")));
    }
    if num_shells == 0 {
        return Err(Error::InvalidArgument("num_shells must be >= 1".into()));
    }
    let d = dimension as u128;
    let half_d = dimension as f64 / 2.0;
    let mut levels = Vec::with_capacity(num_shells);
    let mut g: u128 = 1;
    for n in 0..num_shells {
        if n > 0 {
            // g_d(n) = g_d(n−1)·(d+n−1)/n, exact in integers.
            g = g.checked_mul(d + n as u128 - 1).ok_or(Error::DegeneracyOverflow { dimension, shell: n })? / n as u128;
        }
        let degeneracy = u64::try_from(g).map_err(|_| Error::DegeneracyOverflow { dimension, shell: n })?;
        levels.push(EnergyLevel { energy: hbar_omega * (n as f64 + half_d), degeneracy });
    }
    // Beyond shell M the ratio g(n+1)/g(n) = (d+n)/(n+1) is largest at n = M.
    let m = num_shells as f64;
    let next_g = g as f64 * (d as f64 + m - 1.0) / m;
    let tail = Tail::Geometric(GeometricTail {
        first_energy: hbar_omega * (m + half_d),
        first_degeneracy: next_g,
        spacing: hbar_omega,
        degeneracy_growth: (d as f64 + m) / (m + 1.0),
    });
    Spectrum::new(levels, Some(tail), hbar_omega)
}

/// `ζ = Σ g·e^{−βε}` over the retained levels with the tail bound.
pub fn partition_function(spectrum: &Spectrum, beta: f64) -> Result<PartitionValue> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    let value = spectrum
        .levels
        .iter()
        .map(|l| l.degeneracy as f64 * (-beta * l.energy).exp())
        .collect::<CompensatedSum>()
        .value();
    let tail_bound = spectrum.tail.as_ref().map(|t| t.bound(beta));
    Ok(PartitionValue { value, tail_bound })
}

/// Closed-form oscillator partition function `1/(2 sinh(u/2))`, `u = βħω`.
pub fn zeta_ho_closed(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("beta*hbar_omega must be > 0, got {u}")));
    }
    if u < 1e-8 {
        return Ok(1.0 / u - u / 24.0);
    }
    // e^{−u/2}/(1−e^{−u}) stays finite for large u where sinh overflows.
    Ok((-0.5 * u).exp() / -(-u).exp_m1())
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    energy: f64,
    degeneracy: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailDoc {
    ratio_energy: f64,
    #[serde(default)]
    degeneracy_growth: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumDoc {
    levels: Vec<LevelDoc>,
    #[serde(default)]
    tail: Option<TailDoc>,
    #[serde(default)]
    finite: bool,
    #[serde(default)]
    scale: Option<f64>,
}

impl Spectrum {
    /// Parses the JSON spectrum document
    /// `{"levels":[{"energy":…,"degeneracy":…},…],"tail":{"ratio_energy":…}|null}`.
    ///
    /// A tail `{"ratio_energy": E}` declares that omitted levels are spaced by
    /// at least `E` above the last retained one, each no more degenerate than
    /// it (override with `"degeneracy_growth"`). `"finite": true` declares
    /// that nothing was omitted.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectrumDoc = serde_json::from_str(text).map_err(|e| Error::SpectrumDocument {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let field_err = |location: String, message: String| Error::SpectrumDocument { location, message };
        if doc.levels.is_empty() {
            return Err(field_err("levels".into(), "at least one level is required".into()));
        }
        for (i, l) in doc.levels.iter().enumerate() {
            if !(l.energy >= 0.0 && l.energy.is_finite()) {
                return Err(field_err(format!("levels[{i}].energy"), format!("must be >= 0, got {}", l.energy)));
            }
            if l.degeneracy == 0 {
                return Err(field_err(format!("levels[{i}].degeneracy"), "must be >= 1".into()));
            }
            if i > 0 && l.energy <= doc.levels[i - 1].energy {
                return Err(field_err(
                    format!("levels[{i}].energy"),
                    format!("{} is not strictly above the previous energy {}", l.energy, doc.levels[i - 1].energy),
                ));
            }
        }
        let last = doc.levels[doc.levels.len() - 1];
        let last = EnergyLevel { energy: last.energy, degeneracy: last.degeneracy };
        let tail = match (doc.tail, doc.finite) {
            (Some(_), true) => {
                return Err(field_err("tail".into(), "a finite spectrum cannot carry a tail".into()));
            }
            (Some(t), false) => {
                if !(t.ratio_energy > 0.0 && t.ratio_energy.is_finite()) {
                    return Err(field_err("tail.ratio_energy".into(), format!("must be > 0, got {}", t.ratio_energy)));
                }
                let growth = t.degeneracy_growth.unwrap_or(1.0);
                if !(growth >= 0.0 && growth.is_finite()) {
                    return Err(field_err("tail.degeneracy_growth".into(), format!("must be >= 0, got {growth}")));
                }
                Some(Tail::Geometric(GeometricTail {
                    first_energy: last.energy + t.ratio_energy,
                    first_degeneracy: last.degeneracy as f64 * growth,
                    spacing: t.ratio_energy,
                    degeneracy_growth: growth,
                }))
            }
            (None, true) => Some(Tail::Empty),
            (None, false) => None,
        };
        let levels =
            doc.levels.into_iter().map(|l| EnergyLevel { energy: l.energy, degeneracy: l.degeneracy }).collect();
        Spectrum::new(levels, tail, doc.scale.unwrap_or(1.0))
    }
}
