use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::Args;
use monostat::numeric::{lin_space, log_space};
use monostat::observables::Statistics;
use monostat::spectrum::{harmonic_spectrum, iso_oscillator_spectrum, EnergyLevel, Tail};
use monostat::{Spectrum, ThermoPoint, DEFAULT_CAPACITY};
use serde::{Deserialize, Deserializer, Serialize};

/// A list of grid values. On the command line and in config files it is
/// written as `a,b,c`, `lin:lo:hi:n` or `log:lo:hi:n`; JSON arrays are
/// accepted too.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Axis(pub Vec<f64>);

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Axis(Vec::new()));
        }
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"));
        if let Some(rest) = s.strip_prefix("lin:").or_else(|| s.strip_prefix("log:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("expected {}lo:hi:n, got '{s}'", &s[..4]));
            }
            let (lo, hi) = (parse(parts[0])?, parse(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|e| format!("bad count '{}': {e}", parts[2]))?;
            if s.starts_with("log:") {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(format!("log grid needs positive ends, got '{s}'"));
                }
                return Ok(Axis(log_space(lo, hi, n)));
            }
            return Ok(Axis(lin_space(lo, hi, n)));
        }
        s.split(',').map(parse).collect::<Result<_, _>>().map(Axis)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&items.join(","))
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Axis(v)),
            Raw::Number(x) => Ok(Axis(vec![x])),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Grid axes read from a `--grid` JSON file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub u: Option<Axis>,
    pub beta: Option<Axis>,
    pub z: Option<Axis>,
    pub mu: Option<Axis>,
}

/// Every run parameter. Flags override values from `--config`; the merged
/// result is written next to the output.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// `harmonic`, `iso:D`, `two-level:H:K` or a spectrum JSON file.
    #[arg(long)]
    pub spectrum: Option<String>,
    /// Retained levels (shells for `iso:D`).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Energy scale of the built-in oscillators (default 1)
    #[arg(long)]
    pub hbar_omega: Option<f64>,
    /// `boltzmann` or a Fock-space statistics kind. `scan` takes a list.
    #[arg(long, value_delimiter = ',')]
    pub kind: Option<Vec<String>>,
    /// Dimensionless inverse temperature `β·ħω` (uses the spectrum scale).
    #[arg(long, conflicts_with = "beta")]
    pub u: Option<Axis>,
    /// Inverse temperature in units of 1/energy
    #[arg(long)]
    pub beta: Option<Axis>,
    /// Activity `e^{βμ}`.
    #[arg(long, conflicts_with = "mu")]
    pub z: Option<Axis>,
    /// Chemical potential, converted per temperature to `z = e^{βμ}`.
    #[arg(long)]
    pub mu: Option<Axis>,
    /// JSON file with `u`, `beta`, `z`, `mu` axes.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Highest particle number kept in the series (default from the tail bound)
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Number of one-particle modes used by enumeration
    #[arg(long)]
    pub mode_cutoff: Option<usize>,
    /// Exponent of the low-density region (default 0.5)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Evaluate the primary and the cross-check engine side by side.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub both_engines: bool,
    /// Number of points along the low-density path (`bounds` only).
    #[arg(long)]
    pub r_path: Option<u32>,
    /// Number of `x` points in the appendix scan.
    #[arg(long)]
    pub points: Option<usize>,
    /// Write the enumerated basis of `coeffs` to this CSV file.
    #[arg(long)]
    pub dump_basis: Option<PathBuf>,
    /// Cap on enumerated states per particle number.
    #[arg(long, env = "MONOSTAT_CAPACITY")]
    pub capacity: Option<u64>,
    /// Output file (a directory for `appendix`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field),)* both_engines: $top.both_engines || $base.both_engines }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `self` with every value set in `top` replaced.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; spectrum, levels, hbar_omega, kind, u, beta, z, mu, grid, nmax, mode_cutoff,
                 gamma, r_path, points, dump_basis, capacity, out)
    }

    /// Folds a `--grid` file into the axes that were not set explicitly.
    pub fn absorb_grid_file(mut self) -> anyhow::Result<Self> {
        if let Some(path) = self.grid.take() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading grid {}", path.display()))?;
            let grid: GridFile =
                serde_json::from_str(&text).with_context(|| format!("parsing grid {}", path.display()))?;
            if self.u.is_none() && self.beta.is_none() {
                self.u = grid.u;
                self.beta = grid.beta;
            }
            if self.z.is_none() && self.mu.is_none() {
                self.z = grid.z;
                self.mu = grid.mu;
            }
            if (self.u.is_some() && self.beta.is_some()) || (self.z.is_some() && self.mu.is_some()) {
                bail!("grid {} sets both u and beta, or both z and mu", path.display());
            }
        }
        Ok(self)
    }

    pub fn capacity(&self) -> u64 {
        self.capacity.unwrap_or(DEFAULT_CAPACITY)
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar_omega.unwrap_or(1.0)
    }

    pub fn statistics(&self) -> anyhow::Result<Vec<Statistics>> {
        let names = self.kind.clone().unwrap_or_else(|| vec!["monotone".into()]);
        names.iter().map(|k| k.parse::<Statistics>().map_err(anyhow::Error::from)).collect()
    }

    pub fn single_statistics(&self) -> anyhow::Result<Statistics> {
        match self.statistics()?.as_slice() {
            [s] => Ok(*s),
            other => bail!("this subcommand takes one --kind, got {}", other.len()),
        }
    }
}

/// The resolved one-particle spectrum.
pub struct SpectrumChoice {
    pub spectrum: Spectrum,
    /// Whether this is the 1-D oscillator, for which closed forms exist.
    pub harmonic: bool,
}

pub fn resolve_spectrum(cfg: &RunConfig) -> anyhow::Result<SpectrumChoice> {
    let name = cfg.spectrum.as_deref().unwrap_or("harmonic");
    let levels = cfg.levels.unwrap_or(200);
    let hw = cfg.hbar_omega();
    if name == "harmonic" {
        return Ok(SpectrumChoice { spectrum: harmonic_spectrum(hw, levels)?, harmonic: true });
    }
    if let Some(d) = name.strip_prefix("iso:") {
        let d: u32 = d.parse().with_context(|| format!("bad dimension in '{name}'"))?;
        return Ok(SpectrumChoice { spectrum: iso_oscillator_spectrum(d, hw, levels)?, harmonic: false });
    }
    if let Some(rest) = name.strip_prefix("two-level:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [h, k] = parts.as_slice() else {
            bail!("expected two-level:H:K, got '{name}'");
        };
        let h: f64 = h.parse().with_context(|| format!("bad energy '{h}'"))?;
        let k: f64 = k.parse().with_context(|| format!("bad energy '{k}'"))?;
        let spectrum = Spectrum::new(
            vec![EnergyLevel { energy: h, degeneracy: 2 }, EnergyLevel { energy: k, degeneracy: 1 }],
            Some(Tail::Empty),
            1.0,
        )?;
        return Ok(SpectrumChoice { spectrum, harmonic: false });
    }
    let text = std::fs::read_to_string(name).with_context(|| format!("reading spectrum file {name}"))?;
    let spectrum = Spectrum::from_json(&text).with_context(|| format!("in spectrum file {name}"))?;
    Ok(SpectrumChoice { spectrum, harmonic: false })
}

/// Inverse temperatures from `--u` (scaled by the spectrum) or `--beta`.
pub fn betas(cfg: &RunConfig, scale: f64, default_u: &str) -> anyhow::Result<Vec<f64>> {
    let values = match (&cfg.u, &cfg.beta) {
        (_, Some(b)) => b.0.clone(),
        (Some(u), None) => u.0.iter().map(|u| u / scale).collect(),
        (None, None) => default_u.parse::<Axis>().map_err(anyhow::Error::msg)?.0.iter().map(|u| u / scale).collect(),
    };
    Ok(values)
}

/// Cartesian product of temperatures and activities, temperature outermost.
pub fn thermo_grid(cfg: &RunConfig, betas: &[f64], default_z: &str) -> anyhow::Result<Vec<ThermoPoint>> {
    let mut points = Vec::new();
    for &beta in betas {
        match (&cfg.z, &cfg.mu) {
            (_, Some(mu)) => {
                for &m in &mu.0 {
                    points.push(ThermoPoint::from_mu(beta, m)?);
                }
            }
            (z, None) => {
                let zs = match z {
                    Some(z) => z.clone(),
                    None => default_z.parse::<Axis>().map_err(anyhow::Error::msg)?,
                };
                for &z in &zs.0 {
                    points.push(ThermoPoint::new(beta, z)?);
                }
            }
        }
    }
    Ok(points)
}
