//! Pairwise error probabilities of SIC receivers and a union bound on the
//! bit error rate of any power-domain layer.
//!
//! For a stage that decides layer `d` after earlier stages left errors
//! `Δ_q`, the pairwise error `s -> ŝ` conditioned on `‖h‖² = g` is
//! `Q(β√g/ϑ)` with `Δ = s - ŝ`, `ϑ = √2|Δ|` and
//! `β = √ρ (√a_d |Δ|² + 2 Re(Δ* (Σ_q √a_q Δ_q + Σ_{p>d} √a_p s_p)))`.
//! A negative `β` means interference pushes the decision across the
//! boundary, and the averaged probability exceeds one half.
//!
//! The bound walks the tree of SIC decision paths. A path that contains an
//! error at stage `q` cannot be more likely than that stage's pairwise error,
//! so every subtree is capped by the smallest pairwise error on its path.
//! Leaves sum own-symbol pairwise errors per bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::abep::LinkParams;
use super::special::mrc_q_average;
use crate::constellation::{PowerAllocation, UserConstellation};
use crate::error::{config, input, Error, Result};
use crate::C64;

/// Number of transmitted symbol tuples enumerated exhaustively.
pub const ENUMERATION_BUDGET: usize = 4096;
/// Tuples drawn when the budget is exceeded.
pub const SAMPLED_DRAWS: usize = 100_000;

/// Pairwise error of one decision stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepTerm {
    pub delta: C64,
    pub beta: f64,
    pub vartheta: f64,
}

impl PepTerm {
    /// `interferers` are the true symbols of the weaker layers `d+1..`;
    /// `sic_deltas` are the cancellation errors of layers `0..d`.
    pub fn new(
        layer: usize,
        own: C64,
        own_hat: C64,
        interferers: &[C64],
        sic_deltas: &[C64],
        pa: &PowerAllocation,
        rho: f64,
    ) -> Result<Self> {
        let delta = own - own_hat;
        if delta.norm_sqr() == 0.0 {
            return Err(Error::Domain("pairwise error needs s != ŝ".into()));
        }
        if sic_deltas.len() != layer || layer + 1 + interferers.len() != pa.len() {
            return input(format!(
                "layer {layer} needs {layer} SIC deltas and {} interferers",
                pa.len() - layer - 1
            ));
        }
        let c = pa.coefficients();
        let mut interference = C64::new(0.0, 0.0);
        for (q, d) in sic_deltas.iter().enumerate() {
            interference += d * c[q].sqrt();
        }
        for (p, s) in interferers.iter().enumerate() {
            interference += s * c[layer + 1 + p].sqrt();
        }
        let beta = rho.sqrt()
            * (c[layer].sqrt() * delta.norm_sqr() + 2.0 * (delta.conj() * interference).re);
        Ok(Self {
            delta,
            beta,
            vartheta: std::f64::consts::SQRT_2 * delta.norm(),
        })
    }

    /// Signed correlation `ξ`; its magnitude is the `μ` of the diversity sum.
    pub fn xi(&self, sigma_sq: f64) -> f64 {
        let b2 = self.beta * self.beta * sigma_sq;
        self.beta.signum() * (b2 / (2.0 * self.vartheta * self.vartheta + b2)).sqrt()
    }

    /// `Q(β√g/ϑ)` for channel gain `g = ‖h‖²`.
    pub fn conditional(&self, gain: f64) -> f64 {
        super::special::q_func(self.beta * gain.sqrt() / self.vartheta)
    }

    /// Average over `‖h‖² ~ Gamma(N_r, σ²)`.
    pub fn average(&self, sigma_sq: f64, n_r: usize) -> f64 {
        let x = self.beta * self.beta * sigma_sq / (self.vartheta * self.vartheta);
        let p = mrc_q_average(x, n_r);
        if self.beta >= 0.0 {
            p
        } else {
            1.0 - p
        }
    }
}

/// Average pairwise error probability of one SIC stage.
#[allow(clippy::too_many_arguments)]
pub fn noma_pep(
    layer: usize,
    own: C64,
    own_hat: C64,
    interferers: &[C64],
    sic_deltas: &[C64],
    pa: &PowerAllocation,
    link: &LinkParams,
) -> Result<f64> {
    let t = PepTerm::new(layer, own, own_hat, interferers, sic_deltas, pa, link.rho)?;
    Ok(t.average(link.sigma_sq, link.n_r).clamp(0.0, 1.0))
}

/// How transmitted symbol tuples are covered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumeration {
    /// Exhaustive up to [`ENUMERATION_BUDGET`] tuples, sampled above.
    Auto,
    Exhaustive,
    Sampled { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionBound {
    pub value: f64,
    /// Zero for exhaustive enumeration.
    pub ci_halfwidth: f64,
    pub sampled: bool,
    pub tuples: usize,
}

struct Ctx<'a> {
    layer: usize,
    consts: &'a [UserConstellation],
    pa: &'a PowerAllocation,
    link: &'a LinkParams,
}

impl Ctx<'_> {
    fn pep(&self, d: usize, s: &[C64], hat: C64, deltas: &[C64]) -> f64 {
        PepTerm::new(d, s[d], hat, &s[d + 1..], deltas, self.pa, self.link.rho)
            .map(|t| t.average(self.link.sigma_sq, self.link.n_r))
            .unwrap_or(0.0)
    }

    fn node(&self, d: usize, s: &[C64], labels: &[usize], deltas: &mut Vec<C64>, cap: f64, out: &mut [f64]) {
        let c = &self.consts[d];
        out.iter_mut().for_each(|x| *x = 0.0);
        if d == self.layer {
            for hat in 0..c.order() {
                if hat == labels[d] {
                    continue;
                }
                let p = self.pep(d, s, c.symbol(hat), deltas);
                let diff = hat ^ labels[d];
                for (b, acc) in out.iter_mut().enumerate() {
                    if (diff >> b) & 1 == 1 {
                        *acc += p;
                    }
                }
            }
        } else {
            let mut child = vec![0.0; out.len()];
            deltas.push(C64::new(0.0, 0.0));
            self.node(d + 1, s, labels, deltas, cap, &mut child);
            deltas.pop();
            out.iter_mut().zip(&child).for_each(|(o, x)| *o += x);
            for hat in 0..c.order() {
                if hat == labels[d] {
                    continue;
                }
                let h = c.symbol(hat);
                let child_cap = cap.min(self.pep(d, s, h, deltas));
                deltas.push(s[d] - h);
                self.node(d + 1, s, labels, deltas, child_cap, &mut child);
                deltas.pop();
                out.iter_mut().zip(&child).for_each(|(o, x)| *o += x);
            }
        }
        out.iter_mut().for_each(|x| *x = x.min(cap));
    }

    fn tuple_bound(&self, labels: &[usize]) -> f64 {
        let s: Vec<C64> = labels
            .iter()
            .zip(self.consts)
            .map(|(k, c)| c.symbol(*k))
            .collect();
        let nb = self.consts[self.layer].bits_per_symbol() as usize;
        let mut out = vec![0.0; nb];
        self.node(0, &s, labels, &mut Vec::with_capacity(self.layer), 1.0, &mut out);
        out.iter().sum::<f64>() / nb as f64
    }
}

/// Union bound on the bit error rate of power-domain layer `layer`
/// (0 is the strongest) with automatic enumeration.
pub fn union_bound_ber(
    layer: usize,
    constellations: &[UserConstellation],
    pa: &PowerAllocation,
    link: &LinkParams,
) -> Result<UnionBound> {
    union_bound_ber_with(layer, constellations, pa, link, Enumeration::Auto)
}

pub fn union_bound_ber_with(
    layer: usize,
    constellations: &[UserConstellation],
    pa: &PowerAllocation,
    link: &LinkParams,
    mode: Enumeration,
) -> Result<UnionBound> {
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
    let orders: Vec<usize> = constellations.iter().map(|c| c.order()).collect();
    let tuples = orders
        .iter()
        .try_fold(1usize, |a, m| a.checked_mul(*m))
        .unwrap_or(usize::MAX);
    let ctx = Ctx {
        layer,
        consts: constellations,
        pa,
        link,
    };
    let sampled = match mode {
        Enumeration::Exhaustive if tuples > ENUMERATION_BUDGET => {
            return config(format!(
                "union bound needs {tuples} tuples, above the enumeration budget of {ENUMERATION_BUDGET}; enable sampling"
            ))
        }
        Enumeration::Exhaustive => None,
        Enumeration::Auto if tuples <= ENUMERATION_BUDGET => None,
        Enumeration::Auto => Some((SAMPLED_DRAWS, 0u64)),
        Enumeration::Sampled { draws, seed } => Some((draws.max(2), seed)),
    };
    let mut labels = vec![0usize; orders.len()];
    match sampled {
        None => {
            let mut sum = 0.0;
            for idx in 0..tuples {
                let mut rem = idx;
                for (slot, m) in labels.iter_mut().zip(&orders).rev() {
                    *slot = rem % m;
                    rem /= m;
                }
                sum += ctx.tuple_bound(&labels);
            }
            Ok(UnionBound {
                value: (sum / tuples as f64).clamp(0.0, 1.0),
                ci_halfwidth: 0.0,
                sampled: false,
                tuples,
            })
        }
        Some((draws, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..draws {
                for (slot, m) in labels.iter_mut().zip(&orders) {
                    *slot = rng.random_range(0..*m);
                }
                let v = ctx.tuple_bound(&labels);
                sum += v;
                sum_sq += v * v;
            }
            let n = draws as f64;
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            Ok(UnionBound {
                value: mean.clamp(0.0, 1.0),
                ci_halfwidth: 1.959_963_984_540_054 * (var / n).sqrt(),
                sampled: true,
                tuples: draws,
            })
        }
    }
}
