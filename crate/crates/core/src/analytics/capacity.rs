//! Ergodic capacities and sum rate.
//!
//! A NOMA user decoding layer `d` gets `log2(1 + η1 Y) - log2(1 + η2 Y)`
//! with `Y = ‖h‖²/σ² ~ Gamma(N_r, 1)`, `η1 = Σ_{p>=d} a_p ρσ²` and
//! `η2 = Σ_{p>d} a_p ρσ²`. Each expectation has the closed form
//! `E[ln(1 + ηY)] = Σ_{k=1}^{N_r} e^{1/η} E_k(1/η)`, a sum of positive terms
//! that is evaluated without cancellation. The equivalent expansion in
//! `Ei(-1/η)` and powers of `η` is kept as [`log_gain_expectation_ei`]; it
//! loses digits when `η` is small or `N_r` is large.

use super::abep::LinkParams;
use super::special::{exp_integral, expint_scaled, ln_factorial};
use crate::constellation::PowerAllocation;
use crate::error::{input, Result};

/// `E[ln(1 + ηY)]` for `Y ~ Gamma(N_r, 1)`, in nats.
pub fn log_gain_expectation(eta: f64, n_r: usize) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    let z = 1.0 / eta;
    (1..=n_r as u32).map(|k| expint_scaled(k, z)).sum()
}

/// Same expectation through the `Ei`-and-polynomial expansion, in nats.
pub fn log_gain_expectation_ei(eta: f64, n_r: usize) -> Result<f64> {
    if eta <= 0.0 {
        return Ok(0.0);
    }
    let n = n_r as i32;
    let ei_term = (1.0 / eta).exp() * exp_integral(-1.0 / eta)?;
    let mut total = 0.0;
    for lambda in 0..n {
        let k = n - 1 - lambda;
        let sign = if (n - lambda - 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let mut bracket = sign / eta.powi(k) * ei_term;
        for s in 1..=k {
            bracket += (ln_factorial(s as u64 - 1)).exp() / (-eta).powi(k - s);
        }
        let ratio = (ln_factorial(n_r as u64 - 1) - ln_factorial(k as u64)).exp();
        total += ratio * bracket;
    }
    Ok(total / (ln_factorial(n_r as u64 - 1)).exp())
}

/// `(η1, η2)` of power-domain layer `layer` (0 is the strongest).
pub fn sinr_gains(layer: usize, pa: &PowerAllocation, link: &LinkParams) -> (f64, f64) {
    let scale = link.rho * link.sigma_sq;
    let eta2 = pa.residual_after(layer) * scale;
    let eta1 = pa.coefficient(layer) * scale + eta2;
    (eta1, eta2)
}

/// Ergodic capacity of a NOMA user decoding `layer`, in bits per channel use.
pub fn ergodic_capacity_noma_user(
    layer: usize,
    pa: &PowerAllocation,
    link: &LinkParams,
) -> Result<f64> {
    if layer >= pa.len() {
        return input(format!("layer {layer} out of range for {} layers", pa.len()));
    }
    let (eta1, eta2) = sinr_gains(layer, pa, link);
    let nats = log_gain_expectation(eta1, link.n_r) - log_gain_expectation(eta2, link.n_r);
    Ok((nats * std::f64::consts::LOG2_E).max(0.0))
}

/// Rate carried by the active-antenna index: `log2(N_t) (1 - P_e)`.
pub fn ergodic_capacity_u1(n_t: usize, abep1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&abep1) {
        return input(format!("bit error probability must lie in [0, 1], got {abep1}"));
    }
    Ok((n_t as f64).log2() * (1.0 - abep1))
}

pub fn sum_rate(rates: &[f64]) -> f64 {
    rates.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_agree() {
        for n in [1, 2, 3, 4] {
            for eta in [0.5, 1.0, 10.0, 100.0] {
                let a = log_gain_expectation(eta, n);
                let b = log_gain_expectation_ei(eta, n).unwrap();
                assert!((a - b).abs() < 1e-8 * a.max(1.0), "n={n} eta={eta}: {a} {b}");
            }
        }
    }

    #[test]
    fn u1_rates() {
        assert_eq!(ergodic_capacity_u1(4, 0.0).unwrap(), 2.0);
        assert_eq!(ergodic_capacity_u1(4, 0.5).unwrap(), 1.0);
        assert!(ergodic_capacity_u1(4, 1.5).is_err());
        assert_eq!(sum_rate(&[1.0, 2.5, 0.25]), 3.75);
    }

    #[test]
    fn low_snr_vanishes() {
        let pa = PowerAllocation::new(vec![0.8, 0.2]).unwrap();
        let link = LinkParams::new(1e-8, 2.0, 2).unwrap();
        assert!(ergodic_capacity_noma_user(0, &pa, &link).unwrap() < 1e-6);
        assert!(ergodic_capacity_noma_user(1, &pa, &link).unwrap() < 1e-6);
    }
}
