//! Streaming moments and Kolmogorov-Smirnov machinery for the Monte Carlo
//! cross-checks.

/// Welford accumulator for mean and variance.
///
/// Identical inputs yield a variance of exactly zero (the update adds an
/// exact zero), which the identity estimators rely on for constant
/// integrands.
#[derive(Debug, Clone, Default)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (denominator n − 1).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// One-sample KS statistic of sorted data against a reference CDF.
pub fn ks_statistic_against_cdf<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

/// Two-sample KS statistic of two sorted samples.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS p-value with the Stephens small-sample correction.
pub fn ks_two_sample_p_value(a: &[f64], b: &[f64]) -> f64 {
    let d = ks_two_sample_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sqrt_ne = ne.sqrt();
    kolmogorov_q(d * (sqrt_ne + 0.12 + 0.11 / sqrt_ne))
}

/// One-sample KS p-value.
pub fn ks_one_sample_p_value<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let d = ks_statistic_against_cdf(sorted, cdf);
    let sqrt_n = (sorted.len() as f64).sqrt();
    kolmogorov_q(d * (sqrt_n + 0.12 + 0.11 / sqrt_n))
}
