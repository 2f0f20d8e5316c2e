//! Bit error probabilities of the SSK user and of the two NOMA users of the
//! three-user QPSK configuration.
//!
//! The SSK user's figure is a union bound over antenna-pair errors averaged
//! over every ordered pair of superposed symbols. The NOMA users' figures are
//! exact: with QPSK each quadrature axis carries one bit of every layer, so
//! the SIC receiver reduces to two independent sign decisions per axis.

use super::fading::fading_average;
use super::special::{mrc_q_average, q_func};
use crate::constellation::ScAlphabet;
use crate::error::{config, Result};

/// Average SNR parameters of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub rho: f64,
    pub sigma_sq: f64,
    pub n_r: usize,
}

impl LinkParams {
    pub fn new(rho: f64, sigma_sq: f64, n_r: usize) -> Result<Self> {
        if !(rho >= 0.0 && sigma_sq > 0.0 && n_r >= 1) {
            return config(format!(
                "link needs rho >= 0, sigma^2 > 0 and N_r >= 1 (rho={rho}, sigma^2={sigma_sq}, N_r={n_r})"
            ));
        }
        Ok(Self { rho, sigma_sq, n_r })
    }

    pub fn gamma_bar(&self) -> f64 {
        self.rho * self.sigma_sq
    }
}

/// Pairwise antenna-error probability of the SSK user for the superposed
/// symbols `chi` and `chi_hat`, scaled by `log2(M_T)`.
pub fn pep_u1_pair(
    chi: crate::C64,
    chi_hat: crate::C64,
    link: &LinkParams,
    m_total: usize,
) -> f64 {
    let sigma_a = link.gamma_bar() * (chi.norm_sqr() + chi_hat.norm_sqr()) / 4.0;
    (m_total as f64).log2() * mrc_q_average(sigma_a, link.n_r)
}

/// Distinct values of `|χ_k|² + |χ_k̂|²` over all ordered symbol pairs,
/// with their relative frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergySpectrum {
    n_t: usize,
    log2_m_total: f64,
    entries: Vec<(f64, f64)>,
}

impl PairEnergySpectrum {
    pub fn new(alphabet: &ScAlphabet, n_t: usize) -> Self {
        let mut energies: Vec<f64> = alphabet.values().iter().map(|v| v.norm_sqr()).collect();
        energies.sort_by(f64::total_cmp);
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for e in energies {
            match distinct.last_mut() {
                Some((v, w)) if (e - *v).abs() <= 1e-12 * v.abs().max(1.0) => *w += 1.0,
                _ => distinct.push((e, 1.0)),
            }
        }
        let total = (alphabet.len() * alphabet.len()) as f64;
        let mut entries: Vec<(f64, f64)> = Vec::new();
        for (ei, wi) in &distinct {
            for (ej, wj) in &distinct {
                entries.push((ei + ej, wi * wj / total));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, w) in entries {
            match merged.last_mut() {
                Some((v, mw)) if (s - *v).abs() <= 1e-12 * v.abs().max(1.0) => *mw += w,
                _ => merged.push((s, w)),
            }
        }
        Self {
            n_t,
            log2_m_total: (alphabet.len() as f64).log2(),
            entries: merged,
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    fn prefactor(&self) -> f64 {
        if self.n_t < 2 {
            0.0
        } else {
            self.n_t as f64 / 2.0 * self.log2_m_total
        }
    }

    /// Conditional bound before clamping; may exceed one at low SNR.
    pub fn conditional_raw(&self, gamma: f64) -> f64 {
        let pre = self.prefactor();
        if pre == 0.0 {
            return 0.0;
        }
        pre * self
            .entries
            .iter()
            .map(|(s, w)| w * q_func((gamma * s / 4.0).sqrt()))
            .sum::<f64>()
    }

    pub fn conditional(&self, gamma: f64) -> f64 {
        self.conditional_raw(gamma).clamp(0.0, 1.0)
    }

    /// Fading-averaged bound before clamping.
    pub fn average_raw(&self, link: &LinkParams) -> f64 {
        let pre = self.prefactor();
        if pre == 0.0 {
            return 0.0;
        }
        pre * self
            .entries
            .iter()
            .map(|(s, w)| w * mrc_q_average(link.gamma_bar() * s / 4.0, link.n_r))
            .sum::<f64>()
    }
}

/// Bit error bound of the SSK user, clamped to `[0, 1]`.
pub fn abep_u1(alphabet: &ScAlphabet, n_t: usize, link: &LinkParams) -> f64 {
    abep_u1_raw(alphabet, n_t, link).clamp(0.0, 1.0)
}

/// Unclamped bound: `(N_t/2)` times the mean pairwise error over all ordered
/// superposed-symbol pairs.
pub fn abep_u1_raw(alphabet: &ScAlphabet, n_t: usize, link: &LinkParams) -> f64 {
    PairEnergySpectrum::new(alphabet, n_t).average_raw(link)
}

pub fn conditional_bep_u1(gamma: f64, alphabet: &ScAlphabet, n_t: usize) -> f64 {
    PairEnergySpectrum::new(alphabet, n_t).conditional(gamma)
}

pub fn conditional_bep_u1_raw(gamma: f64, alphabet: &ScAlphabet, n_t: usize) -> f64 {
    PairEnergySpectrum::new(alphabet, n_t).conditional_raw(gamma)
}

/// Per-axis energy levels of the three-user QPSK configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaSet {
    pub values: [f64; 5],
}

impl ZetaSet {
    /// Requires `a2 + a3 = 1` and `a2 > a3 > 0`.
    pub fn new(a2: f64, a3: f64) -> Result<Self> {
        if !(a3 > 0.0 && a2 > a3) || (a2 + a3 - 1.0).abs() > 1e-9 {
            return config(format!(
                "exact BEP needs a2 + a3 = 1 and a2 > a3 > 0, got a2={a2}, a3={a3}"
            ));
        }
        let (s2, s3) = (a2.sqrt(), a3.sqrt());
        Ok(Self {
            values: [
                (s2 - s3).powi(2),
                (s2 + s3).powi(2),
                a3,
                (2.0 * s2 - s3).powi(2),
                (2.0 * s2 + s3).powi(2),
            ],
        })
    }

    pub fn zeta(&self, c: usize) -> f64 {
        self.values[c - 1]
    }
}

fn qz(z: &ZetaSet, c: usize, gamma: f64) -> f64 {
    q_func((z.zeta(c) * gamma).sqrt())
}

fn az(z: &ZetaSet, c: usize, link: &LinkParams) -> f64 {
    mrc_q_average(z.zeta(c) * link.gamma_bar(), link.n_r)
}

pub fn conditional_bep_u2(gamma: f64, a2: f64, a3: f64) -> Result<f64> {
    let z = ZetaSet::new(a2, a3)?;
    Ok(0.5 * (qz(&z, 1, gamma) + qz(&z, 2, gamma)))
}

/// Conditional error probability of the third user split by whether the
/// second user's bit on the same axis was cancelled correctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U3Split {
    /// Error and correct cancellation, jointly.
    pub correct_sic: f64,
    /// Error and wrong cancellation, jointly.
    pub wrong_sic: f64,
}

impl U3Split {
    pub fn total(&self) -> f64 {
        self.correct_sic + self.wrong_sic
    }
}

pub fn conditional_bep_u3_split(gamma: f64, a2: f64, a3: f64) -> Result<U3Split> {
    let z = ZetaSet::new(a2, a3)?;
    let q = |c| qz(&z, c, gamma);
    Ok(U3Split {
        correct_sic: 0.5 * (2.0 * q(3) - q(2)),
        wrong_sic: 0.5 * (q(5) + q(1) - q(4)),
    })
}

pub fn conditional_bep_u3(gamma: f64, a2: f64, a3: f64) -> Result<f64> {
    Ok(conditional_bep_u3_split(gamma, a2, a3)?.total())
}

/// Exact average bit error probability of the stronger NOMA user.
pub fn abep_u2(a2: f64, a3: f64, link: &LinkParams) -> Result<f64> {
    let z = ZetaSet::new(a2, a3)?;
    Ok((0.5 * (az(&z, 1, link) + az(&z, 2, link))).clamp(0.0, 1.0))
}

/// Exact average bit error probability of the weaker NOMA user.
pub fn abep_u3(a2: f64, a3: f64, link: &LinkParams) -> Result<f64> {
    let z = ZetaSet::new(a2, a3)?;
    let a = |c| az(&z, c, link);
    Ok((0.5 * (2.0 * a(3) + a(1) - a(2) - a(4) + a(5))).clamp(0.0, 1.0))
}

/// Quadrature of a conditional error probability over the fading law.
pub fn average_conditional<F: Fn(f64) -> f64>(conditional: F, link: &LinkParams) -> f64 {
    fading_average(conditional, link.n_r, link.gamma_bar())
}
