//! Gamma-distributed MRC output SNR and numerical fading averages.

use super::special::{ln_factorial, q_func};
use crate::error::{Error, Result};

/// Absolute tolerance of the adaptive Simpson rule used for fading averages.
pub const QUAD_TOL: f64 = 1e-10;

/// Density of `γ ~ Gamma(N_r, γ̄)`.
pub fn chi2_pdf(gamma: f64, n_r: usize, gamma_bar: f64) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    let x = gamma / gamma_bar;
    if gamma == 0.0 {
        return if n_r == 1 { 1.0 / gamma_bar } else { 0.0 };
    }
    let nm1 = (n_r - 1) as f64;
    (nm1 * x.ln() - x - ln_factorial(n_r as u64 - 1)).exp() / gamma_bar
}

/// Distribution function of `γ ~ Gamma(N_r, γ̄)`.
///
/// Below the mean the tail series `e^{-x} Σ_{k>=N} x^k/k!` is summed
/// directly so small probabilities keep full relative precision.
pub fn chi2_cdf(gamma: f64, n_r: usize, gamma_bar: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    if gamma.is_infinite() {
        return 1.0;
    }
    let x = gamma / gamma_bar;
    let n = n_r as u64;
    if x < n as f64 {
        let mut term = (n as f64 * x.ln() - x - ln_factorial(n)).exp();
        let mut sum = 0.0;
        let mut k = n;
        while term > sum * 1e-17 && k < n + 10_000 {
            sum += term;
            k += 1;
            term *= x / k as f64;
        }
        sum.min(1.0)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..n {
            term *= x / k as f64;
            sum += term;
        }
        (1.0 - (-x).exp() * sum).max(0.0)
    }
}

/// [`chi2_cdf`] with a domain check on the argument.
pub fn chi2_cdf_checked(gamma: f64, n_r: usize, gamma_bar: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain(format!("SNR must be non-negative, got {gamma}")));
    }
    Ok(chi2_cdf(gamma, n_r, gamma_bar))
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature over `[a, b]`, split first into `panels`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let mid = 0.5 * (lo + hi);
            let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(&f, lo, flo, hi, fhi, mid, fmid, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Upper end of the fading integration range: mean plus 40 standard deviations.
pub fn fading_cap(n_r: usize, gamma_bar: f64) -> f64 {
    let n = n_r as f64;
    gamma_bar * (n + 40.0 * n.sqrt())
}

/// `∫_0^upper g(γ) f_γ(γ) dγ` with the substitution `γ = t²`.
pub fn fading_integral<F: Fn(f64) -> f64>(g: F, n_r: usize, gamma_bar: f64, upper: f64) -> f64 {
    let upper = upper.min(fading_cap(n_r, gamma_bar));
    if upper <= 0.0 {
        return 0.0;
    }
    let integrand = |t: f64| {
        let gamma = t * t;
        g(gamma) * chi2_pdf(gamma, n_r, gamma_bar) * 2.0 * t
    };
    integrate(integrand, 0.0, upper.sqrt(), QUAD_TOL, 32)
}

/// `E[g(γ)]` over the Gamma fading law.
pub fn fading_average<F: Fn(f64) -> f64>(g: F, n_r: usize, gamma_bar: f64) -> f64 {
    fading_integral(g, n_r, gamma_bar, f64::INFINITY)
}

/// Numerical `E[Q(√(cγ))]`, the quadrature counterpart of
/// [`super::special::mrc_q_average`].
pub fn q_average_numeric(c: f64, n_r: usize, gamma_bar: f64) -> f64 {
    fading_average(|g| q_func((c * g).sqrt()), n_r, gamma_bar)
}
