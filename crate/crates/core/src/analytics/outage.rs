//! Outage thresholds and probabilities.
//!
//! A user decoding layer `d` is in outage when any SIC stage `m <= d` fails
//! its rate target, i.e. when `a_m γ / (1 + Σ_{p>m} a_p γ) < φ_m` for some
//! `m`. Solving each inequality for `γ` gives a single threshold `ψ_d`.

use serde::{Deserialize, Serialize};

use super::abep::{LinkParams, PairEnergySpectrum};
use super::fading::{chi2_cdf, fading_integral};
use crate::constellation::{PowerAllocation, ScAlphabet};
use crate::error::{config, Result};

/// Conversion from a target rate to an SINR threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule {
    /// `φ = 2^R - 1`.
    #[default]
    Shannon,
    /// `φ = 2^(R - 1)`, kept for comparison.
    Literal,
}

impl ThresholdRule {
    pub fn phi(self, rate: f64) -> f64 {
        match self {
            ThresholdRule::Shannon => rate.exp2() - 1.0,
            ThresholdRule::Literal => (rate - 1.0).exp2(),
        }
    }
}

/// Target rates, one per user in user order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageTargets {
    pub rates: Vec<f64>,
    pub rule: ThresholdRule,
}

impl OutageTargets {
    pub fn new(rates: Vec<f64>, rule: ThresholdRule) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return config(format!("target rates must be positive, got {r}"));
        }
        Ok(Self { rates, rule })
    }

    pub fn phis(&self) -> Vec<f64> {
        self.rates.iter().map(|r| self.rule.phi(*r)).collect()
    }
}

/// `ψ` for power-domain layer `layer`; `phis` holds one threshold per layer.
/// Returns `+∞` when some stage cannot meet its target at any SNR.
pub fn outage_threshold_psi(layer: usize, pa: &PowerAllocation, phis: &[f64]) -> f64 {
    let mut psi: f64 = 0.0;
    for m in 0..=layer {
        let denom = pa.coefficient(m) - pa.residual_after(m) * phis[m];
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        psi = psi.max(phis[m] / denom);
    }
    psi
}

/// Stage-by-stage SINR test equivalent to `γ < ψ`.
pub fn sinr_cascade_outage(gamma: f64, layer: usize, pa: &PowerAllocation, phis: &[f64]) -> bool {
    (0..=layer).any(|m| {
        let sinr = pa.coefficient(m) * gamma / (1.0 + pa.residual_after(m) * gamma);
        sinr < phis[m]
    })
}

pub fn outage_noma_user(layer: usize, pa: &PowerAllocation, phis: &[f64], link: &LinkParams) -> f64 {
    let psi = outage_threshold_psi(layer, pa, phis);
    if psi.is_infinite() {
        1.0
    } else {
        chi2_cdf(psi, link.n_r, link.gamma_bar())
    }
}

/// `1 - R'_1 / log2(N_t)`, the error-rate level at which the SSK user's
/// achievable rate drops below its target.
pub fn u1_threshold(target: f64, n_t: usize) -> Result<f64> {
    let bits = (n_t as f64).log2();
    if target > bits + 1e-12 {
        return config(format!(
            "SSK user target rate {target} exceeds log2(N_t) = {bits}"
        ));
    }
    Ok((1.0 - target / bits).max(0.0))
}

/// SSK-user outage: the average conditional bit error bound over the whole
/// fading range minus its integral over `[0, ψ1]`.
pub fn outage_u1(target: f64, n_t: usize, alphabet: &ScAlphabet, link: &LinkParams) -> Result<f64> {
    let psi1 = u1_threshold(target, n_t)?;
    let spectrum = PairEnergySpectrum::new(alphabet, n_t);
    let f = |g: f64| spectrum.conditional(g);
    let full = fading_integral(f, link.n_r, link.gamma_bar(), f64::INFINITY);
    let partial = fading_integral(f, link.n_r, link.gamma_bar(), psi1);
    Ok((full - partial).clamp(0.0, 1.0))
}
