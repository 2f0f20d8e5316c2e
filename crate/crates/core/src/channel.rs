//! Rayleigh fading, AWGN and the MRC output SNR.
//!
//! Noise power is fixed at one, so the transmit power equals the linear SNR
//! `ρ`. A user with channel variance `σ²` and `N_r` receive antennas sees an
//! MRC output SNR `γ = ρ‖h‖²` that is Gamma distributed with shape `N_r` and
//! scale `ρσ²`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::analytics::fading::chi2_cdf;
use crate::error::{config, input, Result};
use crate::C64;

/// Per-user channel variances, weakest user first.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FadingProfile {
    variances: Vec<f64>,
}

impl FadingProfile {
    /// Variances must be positive and non-decreasing.
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return config("fading profile needs at least one user");
        }
        if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return config(format!("channel variances must be positive, got {v}"));
        }
        if variances.windows(2).any(|w| w[1] < w[0]) {
            return config(format!(
                "channel variances must be in ascending order, got {variances:?}"
            ));
        }
        Ok(Self { variances })
    }

    /// `σ_1² = 1` and each further user doubles the previous variance.
    pub fn doubling(users: usize) -> Self {
        Self {
            variances: (0..users).map(|i| (1u64 << i) as f64).collect(),
        }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    /// Variance of user `user` (1-based).
    pub fn variance(&self, user: usize) -> f64 {
        self.variances[user - 1]
    }
}

impl TryFrom<Vec<f64>> for FadingProfile {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FadingProfile> for Vec<f64> {
    fn from(p: FadingProfile) -> Vec<f64> {
        p.variances
    }
}

/// Linear SNR with unit noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConfig {
    pub rho: f64,
}

impl SnrConfig {
    pub fn from_db(db: f64) -> Self {
        Self {
            rho: 10f64.powf(db / 10.0),
        }
    }

    pub fn tx_power(&self) -> f64 {
        self.rho
    }

    pub fn noise_power(&self) -> f64 {
        1.0
    }
}

/// Circularly symmetric complex Gaussian sample with the given variance.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Fills `out` with i.i.d. `CN(0, variance)` samples.
#[inline]
pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64, out: &mut [C64]) {
    for x in out {
        *x = complex_gaussian(rng, variance);
    }
}

/// One user's `N_r x N_t` channel, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_t: usize,
    n_r: usize,
    data: Vec<C64>,
}

impl ChannelMatrix {
    pub fn zeros(n_t: usize, n_r: usize) -> Self {
        Self {
            n_t,
            n_r,
            data: vec![C64::new(0.0, 0.0); n_t * n_r],
        }
    }

    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let n_r = columns.first().map_or(0, |c| c.len());
        if n_r == 0 || columns.iter().any(|c| c.len() != n_r) {
            return input("channel columns must be non-empty and equally long");
        }
        Ok(Self {
            n_t: columns.len(),
            n_r,
            data: columns.concat(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(n_t: usize, n_r: usize, variance: f64, rng: &mut R) -> Self {
        let mut h = Self::zeros(n_t, n_r);
        h.resample(variance, rng);
        h
    }

    pub fn resample<R: Rng + ?Sized>(&mut self, variance: f64, rng: &mut R) {
        fill_gaussian(rng, variance, &mut self.data);
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Column of antenna `v` (zero-based).
    pub fn column(&self, v: usize) -> &[C64] {
        &self.data[v * self.n_r..(v + 1) * self.n_r]
    }
}

/// Channels of every user for one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub users: Vec<ChannelMatrix>,
}

pub fn sample_channel<R: Rng + ?Sized>(
    profile: &FadingProfile,
    n_t: usize,
    n_r: usize,
    rng: &mut R,
) -> ChannelRealization {
    ChannelRealization {
        users: profile
            .variances()
            .iter()
            .map(|v| ChannelMatrix::sample(n_t, n_r, *v, rng))
            .collect(),
    }
}

/// `r = √P h χ + w` written into `out`.
#[inline]
pub fn transmit_into<R: Rng + ?Sized>(
    h: &[C64],
    chi: C64,
    snr: SnrConfig,
    rng: &mut R,
    out: &mut [C64],
) {
    let x = chi * snr.tx_power().sqrt();
    for (o, hr) in out.iter_mut().zip(h) {
        *o = hr * x + complex_gaussian(rng, snr.noise_power());
    }
}

pub fn transmit<R: Rng + ?Sized>(h: &[C64], chi: C64, snr: SnrConfig, rng: &mut R) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); h.len()];
    transmit_into(h, chi, snr, rng, &mut out);
    out
}

/// Noise-free received vector, used to check the detectors.
pub fn transmit_noiseless(h: &[C64], chi: C64, snr: SnrConfig) -> Vec<C64> {
    let x = chi * snr.tx_power().sqrt();
    h.iter().map(|hr| hr * x).collect()
}

pub fn norm_sqr(h: &[C64]) -> f64 {
    h.iter().map(|x| x.norm_sqr()).sum()
}

/// `h^H r`.
#[inline]
pub fn mrc_combine(h: &[C64], r: &[C64]) -> C64 {
    h.iter().zip(r).map(|(a, b)| a.conj() * b).sum()
}

pub fn mrc_snr(h: &[C64], rho: f64) -> f64 {
    rho * norm_sqr(h)
}

/// Sorted sample of MRC output SNRs with its Kolmogorov-Smirnov distance
/// to the Gamma law.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    pub samples: Vec<f64>,
    pub ks_statistic: f64,
    pub fitted_gamma_bar: f64,
}

impl EmpiricalCdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|s| *s <= x) as f64 / self.samples.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Draws `n_draws` MRC output SNRs for one user and compares them with the
/// Gamma(`N_r`, `ρσ²`) distribution.
pub fn chi2_sample_check<R: Rng + ?Sized>(
    variance: f64,
    n_r: usize,
    rho: f64,
    n_draws: usize,
    rng: &mut R,
) -> Result<EmpiricalCdf> {
    if n_draws < 10_000 {
        return input(format!("chi2 sample check needs at least 1e4 draws, got {n_draws}"));
    }
    let mut h = vec![C64::new(0.0, 0.0); n_r];
    let mut samples: Vec<f64> = (0..n_draws)
        .map(|_| {
            fill_gaussian(rng, variance, &mut h);
            mrc_snr(&h, rho)
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let gamma_bar = rho * variance;
    let n = n_draws as f64;
    let ks_statistic = samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = chi2_cdf(*x, n_r, gamma_bar);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    let fitted_gamma_bar = samples.iter().sum::<f64>() / n / n_r as f64;
    Ok(EmpiricalCdf {
        samples,
        ks_statistic,
        fitted_gamma_bar,
    })
}
