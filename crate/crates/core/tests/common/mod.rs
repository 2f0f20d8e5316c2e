//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite 20-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let part: f64 = rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * part;
    }
    total
}

/// `Q(x)` for `x >= 0` as `φ(x) ∫_0^∞ exp(-xu - u²/2) du`.
pub fn q_oracle(x: f64) -> f64 {
    let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    phi * integrate(|u| (-x * u - 0.5 * u * u).exp(), 0.0, 40.0, 800)
}

/// `E_1(z)` for `z > 0` as `∫_0^∞ exp(-z e^s) ds`.
pub fn e1_oracle(z: f64) -> f64 {
    let upper = (800.0 / z).ln();
    integrate(|s| (-z * s.exp()).exp(), 0.0, upper, 4000)
}

/// Gamma(N, γ̄) density written out directly.
pub fn chi2_pdf_oracle(g: f64, n: usize, gamma_bar: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    let fact: f64 = (1..n).map(|k| k as f64).product();
    g.powi(n as i32 - 1) * (-g / gamma_bar).exp() / (fact * gamma_bar.powi(n as i32))
}

/// `E[f(γ)]` for `γ ~ Gamma(N, γ̄)` by quadrature in `t = √(γ / γ̄)`, which
/// removes the square-root kink of `Q(√(cγ))` at the origin.
pub fn fading_expectation<F: Fn(f64) -> f64>(f: F, n: usize, gamma_bar: f64) -> f64 {
    let upper = (n as f64 + 60.0 + 20.0 * (n as f64).sqrt()).sqrt();
    integrate(
        |t| f(t * t * gamma_bar) * chi2_pdf_oracle(t * t, n, 1.0) * 2.0 * t,
        0.0,
        upper,
        2000,
    )
}

/// Single-antenna Rayleigh rate `log2(1 + η1 Y) - log2(1 + η2 Y)`,
/// `Y ~ Exp(1)`, via `E[ln(1 + ηY)] = e^{1/η} E_1(1/η)`.
pub fn rayleigh_rate(eta1: f64, eta2: f64) -> f64 {
    let term = |eta: f64| {
        if eta <= 0.0 {
            0.0
        } else {
            (1.0 / eta).exp() * e1_oracle(1.0 / eta)
        }
    };
    (term(eta1) - term(eta2)) * std::f64::consts::LOG2_E
}

/// Two-point log-log slope in decades of error per decade of SNR.
pub fn slope(snr_lo_db: f64, p_lo: f64, snr_hi_db: f64, p_hi: f64) -> f64 {
    (p_hi.log10() - p_lo.log10()) / ((snr_hi_db - snr_lo_db) / 10.0)
}
