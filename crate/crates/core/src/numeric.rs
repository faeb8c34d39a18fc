//! Small numerical kernels shared by the engines.

/// Neumaier-compensated running sum. Summation order is the insertion order,
/// so identical inputs give bit-identical results.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// `ln(n!)`, exact summation of logarithms up to 170 and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 170 {
        return compensated_sum((2..=n).map(|k| (k as f64).ln()));
    }
    let x = n as f64;
    // Stirling series; the next omitted term is below 1e-16 for x > 170.
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// `ln(e^t − 1)` for `t > 0` without overflow or cancellation.
pub fn ln_expm1(t: f64) -> f64 {
    debug_assert!(t > 0.0);
    if t > 1.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

/// `(x^(N+1)/(N+1)!)·e^x`, the Lagrange bound on `Σ_{n>N} x^n/n!`.
pub fn exp_series_remainder(x: f64, n_max: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let m = n_max + 1;
    (m as f64 * x.ln() - ln_factorial(m) + x).exp()
}

/// `(x^(N+1)/N!)·e^x`, which bounds `Σ_{n>N} n·x^n/n!`.
pub fn exp_series_moment_remainder(x: f64, n_max: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((n_max + 1) as f64 * x.ln() - ln_factorial(n_max) + x).exp()
}

/// `Σ_{n>N} yⁿ` for `0 ≤ y < 1`, infinite otherwise.
pub fn geometric_remainder(y: f64, n_max: usize) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        f64::INFINITY
    } else {
        y.powi(n_max as i32 + 1) / (1.0 - y)
    }
}

/// `Σ_{n>N} n·yⁿ` for `0 ≤ y < 1`, infinite otherwise.
pub fn geometric_moment_remainder(y: f64, n_max: usize) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        f64::INFINITY
    } else {
        let n = n_max as f64;
        y.powi(n_max as i32 + 1) * ((n + 1.0) - n * y) / ((1.0 - y) * (1.0 - y))
    }
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i)/(i+1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `n` values log-spaced on `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| if i == n - 1 { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
        }
    }
}

/// `n` values linearly spaced on `[lo, hi]`, endpoints included.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}
