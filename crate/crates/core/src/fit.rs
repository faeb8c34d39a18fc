//! Least-squares polynomial fitting through a Householder QR factorisation.
//!
//! The abscissae are centred and scaled to `[-1, 1]` before the Vandermonde
//! matrix is built, and the coefficients are mapped back to the monomial basis
//! in `x` afterwards.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::binomial;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Monomial coefficients, constant term first.
    pub coefficients: Vec<f64>,
    /// `max |p(xᵢ) − yᵢ|` over the samples.
    pub max_residual: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("abscissae and ordinates differ in length".into()));
    }
    let cols = degree + 1;
    if xs.len() < cols {
        return Err(Error::RankDeficient(format!("{} samples for {cols} unknowns", xs.len())));
    }
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let centre = 0.5 * (lo + hi);
    let half_width = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    let design = DMatrix::from_fn(xs.len(), cols, |i, j| ((xs[i] - centre) / half_width).powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let qr = design.qr();
    let r = qr.r();
    let largest = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(i) = (0..cols).find(|&i| r[(i, i)].abs() <= largest * 1e-13) {
        return Err(Error::RankDeficient(format!("pivot {i} vanishes")));
    }
    let qt_b = qr.q().transpose() * rhs;
    let scaled =
        r.solve_upper_triangular(&qt_b).ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;

    // p(x) = Σ_k c_k ((x − centre)/w)^k expanded into powers of x.
    let mut coefficients = vec![0.0; cols];
    for (k, &c) in scaled.iter().enumerate() {
        let scale = c / half_width.powi(k as i32);
        for (j, slot) in coefficients.iter_mut().enumerate().take(k + 1) {
            let binom = binomial(k as u64, j as u64).unwrap_or(0) as f64;
            *slot += scale * binom * (-centre).powi((k - j) as i32);
        }
    }
    let mut fit = PolyFit { coefficients, max_residual: 0.0 };
    fit.max_residual = xs.iter().zip(ys).map(|(&x, &y)| (fit.eval(x) - y).abs()).fold(0.0, f64::max);
    Ok(fit)
}
