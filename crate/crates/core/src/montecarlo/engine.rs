//! Trial kernels and block scheduling.
//!
//! A point is simulated in blocks of [`BLOCK_TRIALS`] trials. Block `b` of a
//! point draws from a ChaCha8 generator seeded from (seed, scheme, metric,
//! SNR) and switched to stream `b`, so its outcome does not depend on which
//! worker runs it. Blocks run in rounds of [`ROUND_BLOCKS`]; the stopping
//! rule is checked between rounds and tallies are merged in block order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Metric, Scheme, SimConfig};
use crate::analytics::abep::PairEnergySpectrum;
use crate::analytics::outage::{outage_threshold_psi, sinr_cascade_outage, u1_threshold};
use crate::channel::{complex_gaussian, fill_gaussian, mrc_combine, norm_sqr, ChannelMatrix, SnrConfig};
use crate::constellation::UserConstellation;
use crate::detectors::{sic_decisions, SmDetector};
use crate::error::{config, Result};
use crate::C64;

pub const BLOCK_TRIALS: u64 = 4096;
pub const ROUND_BLOCKS: u64 = 16;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one (scheme, metric, SNR) point.
pub fn point_seed(seed: u64, scheme: Scheme, metric: Metric, snr_db: f64) -> u64 {
    let s = match scheme {
        Scheme::SskNoma => 1,
        Scheme::NomaBaseline => 2,
    };
    let m = match metric {
        Metric::Ber => 1,
        Metric::Outage => 2,
        Metric::Rate => 3,
    };
    [s, m, snr_db.to_bits()]
        .iter()
        .fold(splitmix(seed), |acc, x| splitmix(acc ^ x))
}

fn block_rng(point: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point);
    rng.set_stream(block);
    rng
}

/// Per-user event counts over a set of trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub trials: u64,
    /// Bit errors (BER) or outage events, per user.
    pub events: Vec<u64>,
    /// Bits compared (BER) or draws (outage), per user.
    pub opportunities: Vec<u64>,
    /// Per-user sums and sums of squares (rate).
    pub sums: Vec<f64>,
    pub sums_sq: Vec<f64>,
    /// Draws where the threshold and SINR-cascade outage tests disagreed.
    pub mismatches: u64,
}

impl Tally {
    fn new(users: usize) -> Self {
        Self {
            trials: 0,
            events: vec![0; users],
            opportunities: vec![0; users],
            sums: vec![0.0; users],
            sums_sq: vec![0.0; users],
            mismatches: 0,
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.mismatches += other.mismatches;
        for i in 0..self.events.len() {
            self.events[i] += other.events[i];
            self.opportunities[i] += other.opportunities[i];
            self.sums[i] += other.sums[i];
            self.sums_sq[i] += other.sums_sq[i];
        }
    }
}

/// Read-only state shared by all blocks of a point.
struct Kernel<'a> {
    cfg: &'a SimConfig,
    snr: SnrConfig,
    consts: Vec<UserConstellation>,
    unit_amps: Vec<f64>,
    amps: Vec<f64>,
    detector: Option<SmDetector>,
    spectrum: Option<PairEnergySpectrum>,
    users: Vec<usize>,
    u1_bits: u32,
    phis: Vec<f64>,
    psi: Vec<f64>,
    psi1: f64,
}

struct Scratch {
    h: ChannelMatrix,
    col: Vec<C64>,
    r: Vec<C64>,
    labels: Vec<usize>,
    decisions: Vec<usize>,
}

impl<'a> Kernel<'a> {
    fn new(cfg: &'a SimConfig, snr_db: f64, metric: Metric) -> Result<Self> {
        cfg.validate()?;
        let snr = SnrConfig::from_db(snr_db);
        let consts = cfg.constellations();
        let unit_amps = cfg.pa.amplitudes();
        let amps = unit_amps.iter().map(|a| a * snr.tx_power().sqrt()).collect();
        let ssk = cfg.scheme == Scheme::SskNoma;
        let needs_alphabet = ssk && (metric == Metric::Ber || cfg.simulated_users().contains(&1));
        let alphabet = if needs_alphabet { Some(cfg.sc_alphabet()?) } else { None };
        let detector = match (&alphabet, metric) {
            (Some(a), Metric::Ber) => Some(SmDetector::new(a)?),
            _ => None,
        };
        let spectrum = alphabet.as_ref().map(|a| PairEnergySpectrum::new(a, cfg.n_t));
        let (phis, psi, psi1) = if metric == Metric::Outage {
            let phis = match cfg.layer_phis() {
                Some(p) => p,
                None => return config("targets: outage needs one target rate per user"),
            };
            let psi = (0..cfg.layers())
                .map(|l| outage_threshold_psi(l, &cfg.pa, &phis))
                .collect();
            let psi1 = if ssk {
                u1_threshold(cfg.targets.as_ref().expect("validated")[0], cfg.n_t)?
            } else {
                0.0
            };
            (phis, psi, psi1)
        } else {
            (Vec::new(), Vec::new(), 0.0)
        };
        Ok(Self {
            cfg,
            snr,
            consts,
            unit_amps,
            amps,
            detector,
            spectrum,
            users: cfg.simulated_users(),
            u1_bits: cfg.n_t.trailing_zeros(),
            phis,
            psi,
            psi1,
        })
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            h: ChannelMatrix::zeros(self.cfg.n_t, self.cfg.n_r),
            col: vec![C64::new(0.0, 0.0); self.cfg.n_r],
            r: vec![C64::new(0.0, 0.0); self.cfg.n_r],
            labels: vec![0; self.cfg.layers()],
            decisions: vec![0; self.cfg.layers()],
        }
    }

    #[inline]
    fn receive<R: Rng>(&self, h: &[C64], chi: C64, rng: &mut R, out: &mut [C64]) {
        let x = chi * self.snr.tx_power().sqrt();
        if self.cfg.noiseless {
            for (o, hr) in out.iter_mut().zip(h) {
                *o = hr * x;
            }
        } else {
            for (o, hr) in out.iter_mut().zip(h) {
                *o = hr * x + complex_gaussian(rng, 1.0);
            }
        }
    }

    fn ber_block(&self, rng: &mut ChaCha8Rng, trials: u64) -> Tally {
        let cfg = self.cfg;
        let mut t = Tally::new(cfg.users);
        let mut s = self.scratch();
        let ssk = cfg.scheme == Scheme::SskNoma;
        for _ in 0..trials {
            let v = if ssk { rng.random_range(0..cfg.n_t) } else { 0 };
            let mut chi = C64::new(0.0, 0.0);
            for (l, c) in self.consts.iter().enumerate() {
                let k = rng.random_range(0..c.order());
                s.labels[l] = k;
                chi += c.symbol(k) * self.unit_amps[l];
            }
            for &user in &self.users {
                let var = cfg.fading.variance(user);
                let idx = user - 1;
                match cfg.layer_of(user) {
                    None => {
                        s.h.resample(var, rng);
                        self.receive(s.h.column(v), chi, rng, &mut s.r);
                        let d = self.detector.as_ref().expect("ber detector").detect(&s.r, &s.h, self.snr);
                        t.events[idx] += (v ^ d.antenna).count_ones() as u64;
                        t.opportunities[idx] += self.u1_bits as u64;
                    }
                    Some(layer) => {
                        let (z, g) = if ssk && !cfg.genie_antenna {
                            s.h.resample(var, rng);
                            self.receive(s.h.column(v), chi, rng, &mut s.r);
                            let d = self.detector.as_ref().expect("ber detector").detect(&s.r, &s.h, self.snr);
                            let col = s.h.column(d.antenna);
                            (mrc_combine(col, &s.r), norm_sqr(col))
                        } else {
                            fill_gaussian(rng, var, &mut s.col);
                            self.receive(&s.col, chi, rng, &mut s.r);
                            (mrc_combine(&s.col, &s.r), norm_sqr(&s.col))
                        };
                        sic_decisions(z, g, &self.amps, &self.consts, layer, None, &mut s.decisions);
                        t.events[idx] += (s.labels[layer] ^ s.decisions[layer]).count_ones() as u64;
                        t.opportunities[idx] += self.consts[layer].bits_per_symbol() as u64;
                    }
                }
            }
        }
        t.trials = trials;
        t
    }

    fn gamma<R: Rng>(&self, user: usize, rng: &mut R, col: &mut [C64]) -> f64 {
        fill_gaussian(rng, self.cfg.fading.variance(user), col);
        self.snr.rho * norm_sqr(col)
    }

    fn outage_block(&self, rng: &mut ChaCha8Rng, trials: u64) -> Tally {
        let cfg = self.cfg;
        let mut t = Tally::new(cfg.users);
        let mut col = vec![C64::new(0.0, 0.0); cfg.n_r];
        for _ in 0..trials {
            for &user in &self.users {
                let gamma = self.gamma(user, rng, &mut col);
                let idx = user - 1;
                let out = match cfg.layer_of(user) {
                    None => self.spectrum.as_ref().expect("spectrum").conditional(gamma) >= self.psi1,
                    Some(layer) => {
                        let by_threshold = gamma < self.psi[layer];
                        let by_cascade = sinr_cascade_outage(gamma, layer, &cfg.pa, &self.phis);
                        if by_threshold != by_cascade {
                            t.mismatches += 1;
                        }
                        by_threshold
                    }
                };
                t.events[idx] += out as u64;
                t.opportunities[idx] += 1;
            }
        }
        t.trials = trials;
        t
    }

    fn rate_block(&self, rng: &mut ChaCha8Rng, trials: u64) -> Tally {
        let cfg = self.cfg;
        let mut t = Tally::new(cfg.users);
        let mut col = vec![C64::new(0.0, 0.0); cfg.n_r];
        let u1_bits = (cfg.n_t as f64).log2();
        for _ in 0..trials {
            for &user in &self.users {
                let gamma = self.gamma(user, rng, &mut col);
                let rate = match cfg.layer_of(user) {
                    None => {
                        u1_bits * (1.0 - self.spectrum.as_ref().expect("spectrum").conditional_raw(gamma))
                    }
                    Some(layer) => {
                        let a = cfg.pa.coefficient(layer);
                        let rest = cfg.pa.residual_after(layer);
                        (1.0 + a * gamma / (1.0 + rest * gamma)).log2()
                    }
                };
                let idx = user - 1;
                t.sums[idx] += rate;
                t.sums_sq[idx] += rate * rate;
                t.opportunities[idx] += 1;
            }
        }
        t.trials = trials;
        t
    }

    fn block(&self, metric: Metric, rng: &mut ChaCha8Rng, trials: u64) -> Tally {
        match metric {
            Metric::Ber => self.ber_block(rng, trials),
            Metric::Outage => self.outage_block(rng, trials),
            Metric::Rate => self.rate_block(rng, trials),
        }
    }
}

/// Runs one (metric, SNR) point to its stopping rule.
pub fn simulate_point(cfg: &SimConfig, metric: Metric, snr_db: f64) -> Result<Tally> {
    let kernel = Kernel::new(cfg, snr_db, metric)?;
    let seed = point_seed(cfg.seed, cfg.scheme, metric, snr_db);
    let max = cfg.stopping.max_trials;
    let total_blocks = max.div_ceil(BLOCK_TRIALS);
    let mut tally = Tally::new(cfg.users);
    let mut next = 0u64;
    while next < total_blocks {
        let end = (next + ROUND_BLOCKS).min(total_blocks);
        let parts: Vec<Tally> = (next..end)
            .into_par_iter()
            .map(|b| {
                let trials = BLOCK_TRIALS.min(max - b * BLOCK_TRIALS);
                kernel.block(metric, &mut block_rng(seed, b), trials)
            })
            .collect();
        for p in &parts {
            tally.merge(p);
        }
        next = end;
        if metric != Metric::Rate
            && kernel
                .users
                .iter()
                .all(|u| tally.events[u - 1] >= cfg.stopping.min_bit_errors)
        {
            break;
        }
    }
    Ok(tally)
}
