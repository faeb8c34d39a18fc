//! Comparison between the monotone and Boltzmann grand-partition functions of
//! the harmonic oscillator.
//!
//! With `x = e^{u}` the coefficient gap is `a⁽⁰⁾ₙ − a⁽ᵐ⁾ₙ = a⁽⁰⁾ₙ·Δₙ(x)`, where
//!
//! ```text
//! Δₙ(x) = 1 − n! / ∏_{k=2}^{n} Sₖ(x),   Sₖ(x) = 1 + x + ⋯ + x^{k−1}.
//! ```
//!
//! `Δₙ(1) = 0`, `Δ′ₙ(1) = n(n−1)/4` and `Δ″ₙ < 0` on `x > 1` give the sandwich
//! `(1 − f)·Z₀ ≤ Z_m ≤ Z₀` with `f = z²e^u / (4(e^u − 1))`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::fit_polynomial;
use crate::numeric::{compensated_sum, ln_expm1, ln_factorial};
use crate::series::{coeff_boltzmann, coeff_monotone_ho, ln_coeff_monotone_ho, z_boltzmann, z_monotone_ho};
use crate::spectrum::zeta_ho_closed;

fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta*hbar_omega must be > 0, got {u}")));
    }
    Ok(())
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
    }
    Ok(())
}

/// `f(u, z) = z²e^u / (4(e^u − 1))`, written as `z² / (4(1 − e^{−u}))`.
pub fn f_lower(u: f64, z: f64) -> Result<f64> {
    check_u(u)?;
    check_z(z)?;
    Ok(z * z / (4.0 * -(-u).exp_m1()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub u: f64,
    pub z: f64,
    pub f: f64,
    /// `(1 − f)·Z₀`
    pub lower: f64,
    /// Partial sum of `Z_m`.
    pub zm: f64,
    /// Certified bound on the dropped terms of `Z_m`.
    pub zm_tail: f64,
    /// `Z₀ = e^{ζz}`
    pub upper: f64,
    /// Both inequalities hold over the whole certified interval of `Z_m`.
    pub holds_with_certainty: bool,
}

pub fn sandwich_check(u: f64, z: f64, n_max: Option<usize>) -> Result<SandwichReport> {
    let f = f_lower(u, z)?;
    let zm = z_monotone_ho(u, z, n_max)?;
    let upper = z_boltzmann(zeta_ho_closed(u)?, z);
    let lower = (1.0 - f) * upper;
    let holds_with_certainty = zm.certified() && lower <= zm.value && zm.upper() <= upper;
    Ok(SandwichReport { u, z, f, lower, zm: zm.value, zm_tail: zm.error_bound(), upper, holds_with_certainty })
}

/// Sandwich reports on the Cartesian grid `us × zs`, row-major in `u`.
pub fn sandwich_grid(us: &[f64], zs: &[f64], n_max: Option<usize>) -> Result<Vec<SandwichReport>> {
    let points: Vec<(f64, f64)> = us.iter().flat_map(|&u| zs.iter().map(move |&z| (u, z))).collect();
    points.par_iter().map(|&(u, z)| sandwich_check(u, z, n_max)).collect()
}

fn check_delta_args(n: usize, x: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("x must be > 0, got {x}")));
    }
    Ok(())
}

/// `ln(Sₖ(x)/k)` without cancellation near `x = 1`.
fn ln_normalised_geometric_sum(k: usize, ln_x: f64) -> f64 {
    let t = k as f64 * ln_x;
    if t.abs() < 1.0 {
        // Sₖ/k − 1 = (1/k) Σ_j (x^j − 1)
        let excess = compensated_sum((1..k).map(|j| (j as f64 * ln_x).exp_m1())) / k as f64;
        excess.ln_1p()
    } else {
        // Sₖ = (x^k − 1)/(x − 1) with both factors of one sign.
        let ln_abs_expm1 = |s: f64| if s > 0.0 { ln_expm1(s) } else { (-s.exp_m1()).ln() };
        ln_abs_expm1(t) - ln_abs_expm1(ln_x) - (k as f64).ln()
    }
}

/// `D = Σ_{k=2}^{n} ln(Sₖ(x)/k)`, so that `n!/∏Sₖ = e^{−D}`.
fn log_product_excess(n: usize, x: f64) -> f64 {
    let ln_x = x.ln();
    compensated_sum((2..=n).map(|k| ln_normalised_geometric_sum(k, ln_x)))
}

/// `Δₙ(x) = 1 − n!/∏_{k=2}^{n} Sₖ(x)`.
pub fn delta(n: usize, x: f64) -> Result<f64> {
    check_delta_args(n, x)?;
    Ok(-(-log_product_excess(n, x)).exp_m1())
}

/// `(S′ₖ/Sₖ, S″ₖ/Sₖ)` at `x`, scaled to avoid overflow for `x > 1`.
fn geometric_log_derivatives(k: usize, x: f64) -> (f64, f64) {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    if x > 1.0 {
        // Sum over i = k−1−j of powers of 1/x.
        let q = 1.0 / x;
        let mut qi = 1.0;
        for i in 0..k {
            let j = (k - 1 - i) as f64;
            a += qi;
            b += j * qi;
            c += j * (j - 1.0) * qi;
            qi *= q;
        }
        (b / (a * x), c / (a * x * x))
    } else {
        let mut xj = 1.0;
        for j in 0..k {
            let jf = j as f64;
            a += xj;
            if j >= 1 {
                b += jf * xj / x;
            }
            if j >= 2 {
                c += jf * (jf - 1.0) * xj / (x * x);
            }
            xj *= x;
        }
        (b / a, c / a)
    }
}

/// `(g, L′, L″)` with `g = n!/∏Sₖ` and `L = Σ ln Sₖ`.
fn delta_parts(n: usize, x: f64) -> (f64, f64, f64) {
    let g = (-log_product_excess(n, x)).exp();
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for k in 2..=n {
        let (r1, r2) = geometric_log_derivatives(k, x);
        d1.push(r1);
        d2.push(r2 - r1 * r1);
    }
    (g, compensated_sum(d1), compensated_sum(d2))
}

/// `Δ′ₙ(x) = g·L′` by logarithmic differentiation.
pub fn delta_d1(n: usize, x: f64) -> Result<f64> {
    check_delta_args(n, x)?;
    let (g, l1, _) = delta_parts(n, x);
    Ok(g * l1)
}

/// `Δ″ₙ(x) = g·(L″ − L′²)` by logarithmic differentiation.
pub fn delta_d2(n: usize, x: f64) -> Result<f64> {
    check_delta_args(n, x)?;
    let (g, l1, l2) = delta_parts(n, x);
    Ok(g * (l2 - l1 * l1))
}

/// `(sign, ln|Δ″ₙ(x)|)`, usable where `Δ″ₙ(x)` itself underflows.
pub fn delta_d2_log(n: usize, x: f64) -> Result<(f64, f64)> {
    check_delta_args(n, x)?;
    let (_, l1, l2) = delta_parts(n, x);
    let inner = l2 - l1 * l1;
    Ok((inner.signum(), inner.abs().ln() - log_product_excess(n, x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaReport {
    pub n: usize,
    pub x: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl DeltaReport {
    /// Values for `x > 1`; the base point `x = 1` has dedicated exact
    /// operations.
    pub fn new(n: usize, x: f64) -> Result<Self> {
        if !(x > 1.0) {
            return Err(Error::Domain(format!("delta reports need x > 1, got {x}")));
        }
        check_delta_args(n, x)?;
        let (g, l1, l2) = delta_parts(n, x);
        Ok(Self { n, x, value: -(-log_product_excess(n, x)).exp_m1(), d1: g * l1, d2: g * (l2 - l1 * l1) })
    }
}

/// Numerator of `Δ″ₙ(1)/2` over the denominator 288:
/// `−9n²(n−1)² + 2n(n−1)(2n−1) − 24n(n−1)`.
pub fn delta_d2_at1_numerator(n: u64) -> i128 {
    let n = n as i128;
    let m = n - 1;
    -9 * n * n * m * m + 2 * n * m * (2 * n - 1) - 24 * n * m
}

/// Exact `Δ″ₙ(1)/2 = −n²(n−1)²/32 + n(n−1)(2n−1)/144 − n(n−1)/12`.
pub fn delta_d2_at1_exact(n: usize) -> f64 {
    delta_d2_at1_numerator(n as u64) as f64 / 288.0
}

/// Monomial coefficients `(b₀, …, b₄)` of the quartic `Δ″ₙ(1)/2`.
pub const EXACT_QUARTIC: [f64; 5] = [0.0, 13.0 / 144.0, -13.0 / 96.0, 11.0 / 144.0, -1.0 / 32.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticFit {
    pub n_min: usize,
    pub n_max: usize,
    /// `b₀ … b₄`, constant term first.
    pub b: [f64; 5],
    pub max_residual: f64,
}

impl QuarticFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.b.iter().rev().fold(0.0, |acc, c| acc * n + c)
    }
}

/// Degree-4 least-squares fit of `Δ″ₙ(1)/2` over `n = n_min..=n_max`.
pub fn fit_delta2(n_min: usize, n_max: usize) -> Result<QuarticFit> {
    if n_min == 0 || n_max < n_min + 5 {
        return Err(Error::InvalidArgument(format!(
            "fit range {n_min}..={n_max} needs n_min >= 1 and at least six points"
        )));
    }
    let ns: Vec<f64> = (n_min..=n_max).map(|n| n as f64).collect();
    let values = (n_min..=n_max).map(|n| Ok(delta_d2(n, 1.0)? / 2.0)).collect::<Result<Vec<f64>>>()?;
    let fit = fit_polynomial(&ns, &values, 4)?;
    let mut b = [0.0; 5];
    b.copy_from_slice(&fit.coefficients);
    Ok(QuarticFit { n_min, n_max, b, max_residual: fit.max_residual })
}

/// `Δ″ₙ(x)` on the grid `ns × xs`, row-major in `n`.
pub fn delta2_scan(ns: &[usize], xs: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let points: Vec<(usize, f64)> = ns.iter().flat_map(|&n| xs.iter().map(move |&x| (n, x))).collect();
    points.par_iter().map(|&(n, x)| Ok((n, x, delta_d2(n, x)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientGap {
    pub boltzmann: f64,
    pub monotone: f64,
    /// `a⁽⁰⁾ₙ − a⁽ᵐ⁾ₙ`, evaluated as `a⁽⁰⁾ₙ·Δₙ(x)` to avoid cancellation.
    pub gap: f64,
    /// `n(n−1)/4·(x−1)·a⁽⁰⁾ₙ`
    pub bound: f64,
}

/// Coefficient-level sandwich at `x = e^u`.
pub fn coefficient_gap(n: usize, x: f64) -> Result<CoefficientGap> {
    if !(x > 1.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("x must be > 1, got {x}")));
    }
    let u = x.ln();
    let boltzmann = coeff_boltzmann(n, zeta_ho_closed(u)?);
    let monotone = coeff_monotone_ho(n, u)?;
    let nf = n as f64;
    Ok(CoefficientGap {
        boltzmann,
        monotone,
        gap: boltzmann * delta(n.max(1), x)?,
        bound: nf * (nf - 1.0) / 4.0 * (x - 1.0) * boltzmann,
    })
}

/// `−ln(1 − (z/2)^{2γ})`, the lower edge of region R in `u`.
pub fn region_threshold(z: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(0.0..2.0).contains(&z) {
        return Err(Error::Domain(format!("region R requires 0 <= z < 2, got {z}")));
    }
    Ok(-(-(z / 2.0).powf(2.0 * gamma)).ln_1p())
}

/// Membership in region R: `u > −ln(1 − (z/2)^{2γ})`.
pub fn region_r(u: f64, z: f64, gamma: f64) -> Result<bool> {
    Ok(u > region_threshold(z, gamma)?)
}

/// `(u_k, z_k)` with `z_k = 2^{−k}` and `u_k` twice the region-R threshold.
pub fn region_path_point(k: u32, gamma: f64) -> Result<(f64, f64)> {
    let z = 0.5f64.powi(k as i32);
    Ok((2.0 * region_threshold(z, gamma)?, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `Z_m / Z₀` with the interval induced by the certified tail of `Z_m`.
pub fn ratio_zm_z0(u: f64, z: f64, n_max: Option<usize>) -> Result<RatioEstimate> {
    let zm = z_monotone_ho(u, z, n_max)?;
    let z0 = z_boltzmann(zeta_ho_closed(u)?, z);
    Ok(RatioEstimate { value: zm.value / z0, lo: zm.value / z0, hi: zm.upper() / z0 })
}

/// `aₙ⁽ᵐ⁾·n!·uⁿ`, which tends to 1 as `u ↓ 0`.
pub fn asym_low_beta(n: usize, u: f64) -> Result<f64> {
    Ok((ln_coeff_monotone_ho(n, u)? + ln_factorial(n) + n as f64 * u.ln()).exp())
}

/// `ln aₙ⁽ᵐ⁾ / (−n²u/2)`, which tends to 1 as `u → ∞`.
pub fn asym_high_beta(n: usize, u: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let nf = n as f64;
    Ok(ln_coeff_monotone_ho(n, u)? / (-nf * nf * u / 2.0))
}

/// `ln aₙ⁽⁰⁾ / (−n(u/2 + ln n))` for the Boltzmann coefficients.
pub fn asym_high_beta_boltzmann(n: usize, u: f64) -> Result<f64> {
    check_u(u)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let nf = n as f64;
    let ln_a0 = nf * zeta_ho_closed(u)?.ln() - ln_factorial(n);
    Ok(ln_a0 / (-nf * (u / 2.0 + nf.ln())))
}
