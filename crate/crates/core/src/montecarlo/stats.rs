//! Confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Half-width of the 95% Wilson score interval for `k` successes in `n`.
pub fn wilson_halfwidth(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.5;
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

/// Half-width of the 95% normal interval for a sample mean.
pub fn mean_halfwidth(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Z95 * (var / nf).sqrt()
}
