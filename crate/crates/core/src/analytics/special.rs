//! Gaussian tail, exponential integrals and small combinatorial helpers.

use crate::error::{Error, Result};

const EULER: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Gaussian tail probability `Q(x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `e^z E_n(z)` for `n >= 1`, `z >= 0`.
///
/// Uses the power series for `z <= 1` and a modified Lentz continued
/// fraction otherwise; the scaled form stays finite for large `z`.
pub fn expint_scaled(n: u32, z: f64) -> f64 {
    assert!(n >= 1, "E_n needs n >= 1");
    if z == 0.0 {
        return if n == 1 { f64::INFINITY } else { 1.0 / (n - 1) as f64 };
    }
    if z.is_infinite() {
        return 0.0;
    }
    let nm1 = (n - 1) as f64;
    if z > 1.0 {
        let mut b = z + n as f64;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let a = -(i as f64) * (nm1 + i as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    } else {
        let mut ans = if n == 1 { -z.ln() - EULER } else { 1.0 / nm1 };
        let mut fact = 1.0;
        for i in 1..10_000 {
            let fi = i as f64;
            fact *= -z / fi;
            let del = if i as u32 != n - 1 {
                -fact / (fi - nm1)
            } else {
                let psi = -EULER + (1..n).map(|k| 1.0 / k as f64).sum::<f64>();
                fact * (-z.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                break;
            }
        }
        ans * z.exp()
    }
}

/// Generalised exponential integral `E_n(z)`.
pub fn expint(n: u32, z: f64) -> f64 {
    expint_scaled(n, z) * (-z).exp()
}

/// `E_1(z) = -Ei(-z)`.
pub fn expint_e1(z: f64) -> f64 {
    expint(1, z)
}

/// Exponential integral `Ei(x)` for negative arguments.
pub fn exp_integral(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!(
            "Ei(x) is only implemented for x < 0, got {x}"
        )));
    }
    Ok(-expint_e1(-x))
}

/// Binomial coefficient as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `p^N Σ_{λ<N} C(N-1+λ, λ) q^λ` with `q = 1 - p`, written in terms of
/// `p` and `q` separately so both can be supplied without cancellation.
pub fn diversity_sum(p: f64, q: f64, n_r: usize) -> f64 {
    let n = n_r as u64;
    let mut term = 1.0;
    let mut sum = 0.0;
    for lambda in 0..n {
        if lambda > 0 {
            term *= q * (n - 1 + lambda) as f64 / lambda as f64;
        }
        sum += term;
    }
    p.powi(n_r as i32) * sum
}

/// `E[Q(√(cγ))]` for `γ ~ Gamma(N_r, γ̄)`, with `x = cγ̄ >= 0`.
pub fn mrc_q_average(x: f64, n_r: usize) -> f64 {
    if x <= 0.0 {
        return diversity_sum(0.5, 0.5, n_r);
    }
    if x.is_infinite() {
        return 0.0;
    }
    let mu = (x / (2.0 + x)).sqrt();
    let one_minus_mu = (2.0 / (2.0 + x)) / (1.0 + mu);
    diversity_sum(0.5 * one_minus_mu, 0.5 * (1.0 + mu), n_r)
}
