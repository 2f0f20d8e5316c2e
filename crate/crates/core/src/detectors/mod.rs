//! Receivers: joint antenna/superposed-symbol ML detection for the SSK user,
//! MRC followed by successive interference cancellation for the NOMA users,
//! and the single-antenna NOMA baseline.
//!
//! All SIC stages work on the combined scalar `z = h^H r` with gain `‖h‖²`.
//! Minimising `‖r - √(aP) h s‖²` over `s` is the same as minimising
//! `aP‖h‖²|s|² - 2√(aP) Re(s* z)`, so no information is lost.

pub mod complexity;

pub use complexity::{complexity_noma, complexity_ssk_noma, op_counts, OpCounts};

use crate::channel::{mrc_combine, norm_sqr, ChannelMatrix, SnrConfig};
use crate::constellation::{PowerAllocation, ScAlphabet, UserConstellation};
use crate::error::{config, input, Result};
use crate::C64;

/// Antenna and superposed-symbol decision of the joint ML search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmDecision {
    pub antenna: usize,
    pub sc_index: usize,
    pub metric: f64,
}

/// Joint ML detector over every (antenna, superposed symbol) pair.
#[derive(Debug, Clone)]
pub struct SmDetector {
    values: Vec<C64>,
    energies: Vec<f64>,
}

impl SmDetector {
    pub fn new(alphabet: &ScAlphabet) -> Result<Self> {
        if alphabet.is_empty() {
            return config("superposed alphabet is empty");
        }
        Ok(Self {
            values: alphabet.values().to_vec(),
            energies: alphabet.values().iter().map(|v| v.norm_sqr()).collect(),
        })
    }

    /// Ties resolve to the lowest antenna, then the lowest symbol index.
    pub fn detect(&self, r: &[C64], h: &ChannelMatrix, snr: SnrConfig) -> SmDecision {
        let p = snr.tx_power();
        let sp = p.sqrt();
        let mut best = SmDecision {
            antenna: 0,
            sc_index: 0,
            metric: f64::INFINITY,
        };
        for v in 0..h.n_t() {
            let col = h.column(v);
            let z = mrc_combine(col, r) * (2.0 * sp);
            let g = p * norm_sqr(col);
            for (k, (x, e)) in self.values.iter().zip(&self.energies).enumerate() {
                let m = g * e - (x.re * z.re + x.im * z.im);
                if m < best.metric {
                    best = SmDecision {
                        antenna: v,
                        sc_index: k,
                        metric: m,
                    };
                }
            }
        }
        best
    }
}

pub fn detect_sm(
    r: &[C64],
    h: &ChannelMatrix,
    alphabet: &ScAlphabet,
    snr: SnrConfig,
) -> Result<SmDecision> {
    if r.len() != h.n_r() {
        return input(format!(
            "received vector has {} entries for {} receive antennas",
            r.len(),
            h.n_r()
        ));
    }
    Ok(SmDetector::new(alphabet)?.detect(r, h, snr))
}

/// ML symbol decision in the combined domain; `amp` is `√(aP)`.
#[inline]
pub fn detect_symbol(z: C64, gain: f64, amp: f64, constellation: &UserConstellation) -> usize {
    let g = amp * amp * gain;
    let mut best = 0;
    let mut best_m = f64::INFINITY;
    for (k, s) in constellation.symbols().iter().enumerate() {
        let m = g * s.norm_sqr() - 2.0 * amp * (s.re * z.re + s.im * z.im);
        if m < best_m {
            best_m = m;
            best = k;
        }
    }
    best
}

/// Direct decision of the strongest layer, treating weaker layers as noise.
pub fn detect_u2(
    r: &[C64],
    h: &[C64],
    coefficient: f64,
    snr: SnrConfig,
    constellation: &UserConstellation,
) -> usize {
    let amp = (coefficient * snr.tx_power()).sqrt();
    detect_symbol(mrc_combine(h, r), norm_sqr(h), amp, constellation)
}

/// Runs SIC stages `0..=layer` on the combined scalar, writing the decisions
/// into `out`. A `Some` entry in `forced` replaces that stage's decision.
#[inline]
pub fn sic_decisions(
    mut z: C64,
    gain: f64,
    amps: &[f64],
    constellations: &[UserConstellation],
    layer: usize,
    forced: Option<&[Option<usize>]>,
    out: &mut [usize],
) {
    for l in 0..=layer {
        let k = match forced.and_then(|f| f.get(l).copied().flatten()) {
            Some(k) => k,
            None => detect_symbol(z, gain, amps[l], &constellations[l]),
        };
        out[l] = k;
        if l < layer {
            z -= constellations[l].symbol(k) * (amps[l] * gain);
        }
    }
}

/// Decisions of every SIC stage and the received vector left after each
/// cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct SicOutput {
    pub decisions: Vec<usize>,
    /// `residuals[l]` is the received vector after cancelling stages `0..=l`;
    /// a chain for layer `n` performs `n` cancellations.
    pub residuals: Vec<Vec<C64>>,
}

impl SicOutput {
    pub fn own_decision(&self) -> usize {
        *self.decisions.last().expect("chain has at least one stage")
    }
}

fn check_chain(
    r: &[C64],
    h: &[C64],
    pa: &PowerAllocation,
    constellations: &[UserConstellation],
    layer: usize,
) -> Result<()> {
    if r.len() != h.len() || r.is_empty() {
        return input("received vector and channel must have equal, non-zero length");
    }
    if constellations.len() != pa.len() {
        return config(format!(
            "{} constellations for {} power coefficients",
            constellations.len(),
            pa.len()
        ));
    }
    if layer >= pa.len() {
        return input(format!("layer {layer} out of range for {} layers", pa.len()));
    }
    Ok(())
}

/// SIC receiver for power-domain layer `layer` (0 is the strongest).
pub fn sic_detect_chain(
    r: &[C64],
    h: &[C64],
    pa: &PowerAllocation,
    snr: SnrConfig,
    constellations: &[UserConstellation],
    layer: usize,
) -> Result<SicOutput> {
    sic_detect_chain_forced(r, h, pa, snr, constellations, layer, &[])
}

/// [`sic_detect_chain`] with optional forced decisions per stage.
pub fn sic_detect_chain_forced(
    r: &[C64],
    h: &[C64],
    pa: &PowerAllocation,
    snr: SnrConfig,
    constellations: &[UserConstellation],
    layer: usize,
    forced: &[Option<usize>],
) -> Result<SicOutput> {
    check_chain(r, h, pa, constellations, layer)?;
    let gain = norm_sqr(h);
    let mut residual = r.to_vec();
    let mut decisions = Vec::with_capacity(layer + 1);
    let mut residuals = Vec::with_capacity(layer + 1);
    for l in 0..=layer {
        let amp = (pa.coefficient(l) * snr.tx_power()).sqrt();
        let k = match forced.get(l).copied().flatten() {
            Some(k) if k < constellations[l].order() => k,
            Some(k) => return input(format!("forced label {k} out of range at stage {l}")),
            None => detect_symbol(mrc_combine(h, &residual), gain, amp, &constellations[l]),
        };
        decisions.push(k);
        if l < layer {
            let s = constellations[l].symbol(k) * amp;
            for (x, hr) in residual.iter_mut().zip(h) {
                *x -= hr * s;
            }
            residuals.push(residual.clone());
        }
    }
    Ok(SicOutput {
        decisions,
        residuals,
    })
}

/// Conventional NOMA receiver of user `user` (1-based, strongest layer first).
pub fn detect_noma_baseline(
    r: &[C64],
    h: &[C64],
    pa: &PowerAllocation,
    snr: SnrConfig,
    constellations: &[UserConstellation],
    user: usize,
) -> Result<usize> {
    if user == 0 {
        return input("baseline users are numbered from 1");
    }
    Ok(sic_detect_chain(r, h, pa, snr, constellations, user - 1)?.own_decision())
}
