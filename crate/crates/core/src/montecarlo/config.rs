use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::ThresholdRule;
use crate::channel::FadingProfile;
use crate::constellation::{enumerate_sc_alphabet, Modulation, PowerAllocation, ScAlphabet, UserConstellation};
use crate::error::{config, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "ssk-noma")]
    SskNoma,
    #[serde(rename = "noma-baseline")]
    NomaBaseline,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SskNoma => "ssk-noma",
            Scheme::NomaBaseline => "noma-baseline",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssk-noma" => Ok(Scheme::SskNoma),
            "noma-baseline" => Ok(Scheme::NomaBaseline),
            _ => config(format!("unknown scheme '{s}' (expected ssk-noma or noma-baseline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ber,
    Outage,
    Rate,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Ber => "ber",
            Metric::Outage => "outage",
            Metric::Rate => "rate",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point stops once every simulated user has `min_bit_errors` events or
/// `max_trials` trials have run. Rate points always run `max_trials` draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopping {
    pub min_bit_errors: u64,
    pub max_trials: u64,
}

impl Default for Stopping {
    fn default() -> Self {
        Self {
            min_bit_errors: 400,
            max_trials: 2_000_000,
        }
    }
}

/// Everything that determines one simulated curve family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    /// Total number of users `L`, including the SSK user.
    pub users: usize,
    pub n_t: usize,
    pub n_r: usize,
    /// One modulation per power-domain layer, strongest first.
    pub modulations: Vec<Modulation>,
    /// One coefficient per power-domain layer.
    pub pa: PowerAllocation,
    /// One channel variance per user.
    pub fading: FadingProfile,
    pub snr_grid_db: Vec<f64>,
    pub metrics: Vec<Metric>,
    /// Target rates in user order; required for outage.
    pub targets: Option<Vec<f64>>,
    pub threshold_rule: ThresholdRule,
    pub seed: u64,
    pub stopping: Stopping,
    /// NOMA users of SSK-NOMA know the active antenna; otherwise they
    /// estimate it with their own joint ML search.
    pub genie_antenna: bool,
    /// Restricts simulation to these users (1-based); `None` means all.
    pub active_users: Option<Vec<usize>>,
    /// Disables receiver noise.
    pub noiseless: bool,
}

/// Largest `N_t · M_T` accepted by the joint ML search.
pub const MAX_SM_HYPOTHESES: usize = 1 << 16;

impl SimConfig {
    /// SSK-NOMA with the default doubling fading profile and power allocation.
    pub fn ssk_noma(users: usize, n_t: usize, n_r: usize, modulation: Modulation) -> Result<Self> {
        if users < 2 {
            return config("SSK-NOMA needs at least 2 users");
        }
        let cfg = Self {
            scheme: Scheme::SskNoma,
            users,
            n_t,
            n_r,
            modulations: vec![modulation; users - 1],
            pa: PowerAllocation::default_for(users - 1)?,
            fading: FadingProfile::doubling(users),
            snr_grid_db: vec![0.0],
            metrics: vec![Metric::Ber],
            targets: None,
            threshold_rule: ThresholdRule::Shannon,
            seed: 1,
            stopping: Stopping::default(),
            genie_antenna: true,
            active_users: None,
            noiseless: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Single-antenna NOMA baseline with every user on `modulation`.
    pub fn noma_baseline(users: usize, n_r: usize, modulation: Modulation) -> Result<Self> {
        let mut cfg = Self::ssk_noma(users.max(2), 2, n_r, modulation)?;
        cfg.scheme = Scheme::NomaBaseline;
        cfg.n_t = 1;
        cfg.modulations = vec![modulation; users];
        cfg.pa = PowerAllocation::default_for(users)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of power-domain layers.
    pub fn layers(&self) -> usize {
        match self.scheme {
            Scheme::SskNoma => self.users - 1,
            Scheme::NomaBaseline => self.users,
        }
    }

    /// Power-domain layer decoded by `user`; `None` for the SSK user.
    pub fn layer_of(&self, user: usize) -> Option<usize> {
        match self.scheme {
            Scheme::SskNoma => user.checked_sub(2),
            Scheme::NomaBaseline => user.checked_sub(1),
        }
    }

    pub fn constellations(&self) -> Vec<UserConstellation> {
        self.modulations.iter().map(|m| UserConstellation::new(*m)).collect()
    }

    pub fn sc_alphabet(&self) -> Result<ScAlphabet> {
        enumerate_sc_alphabet(&self.constellations(), &self.pa)
    }

    pub fn simulated_users(&self) -> Vec<usize> {
        match &self.active_users {
            Some(u) => u.clone(),
            None => (1..=self.users).collect(),
        }
    }

    /// Thresholds `φ` for the power-domain layers.
    pub fn layer_phis(&self) -> Option<Vec<f64>> {
        let t = self.targets.as_ref()?;
        let skip = self.users - self.layers();
        Some(t[skip..].iter().map(|r| self.threshold_rule.phi(*r)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.users < 2 {
            return config(format!("users must be at least 2, got {}", self.users));
        }
        match self.scheme {
            Scheme::SskNoma => {
                if self.n_t < 2 || !self.n_t.is_power_of_two() {
                    return config(format!(
                        "n_t must be a power of two >= 2 for ssk-noma, got {}",
                        self.n_t
                    ));
                }
            }
            Scheme::NomaBaseline => {
                if self.n_t != 1 {
                    return config(format!("noma-baseline uses one transmit antenna, got n_t={}", self.n_t));
                }
            }
        }
        if self.n_r == 0 || self.n_r > 64 {
            return config(format!("n_r must lie in 1..=64, got {}", self.n_r));
        }
        let layers = self.layers();
        if self.modulations.len() != layers {
            return config(format!(
                "modulations: expected {layers} entries for {} with {} users, got {}",
                self.scheme,
                self.users,
                self.modulations.len()
            ));
        }
        if self.pa.len() != layers {
            return config(format!(
                "pa: expected {layers} coefficients, got {}",
                self.pa.len()
            ));
        }
        if self.fading.len() != self.users {
            return config(format!(
                "fading: expected {} variances, got {}",
                self.users,
                self.fading.len()
            ));
        }
        if self.snr_grid_db.is_empty() {
            return config("snr_db: grid must not be empty");
        }
        if let Some(x) = self.snr_grid_db.iter().find(|x| !x.is_finite()) {
            return config(format!("snr_db: non-finite entry {x}"));
        }
        if self.stopping.min_bit_errors < 100 {
            return config(format!(
                "stopping.min_bit_errors must be at least 100, got {}",
                self.stopping.min_bit_errors
            ));
        }
        if self.stopping.max_trials < 10_000 {
            return config(format!(
                "stopping.max_trials must be at least 10000, got {}",
                self.stopping.max_trials
            ));
        }
        if let Some(active) = &self.active_users {
            if active.is_empty() || active.iter().any(|u| *u == 0 || *u > self.users) {
                return config(format!("active_users must be a non-empty subset of 1..={}", self.users));
            }
        }
        if let Some(t) = &self.targets {
            if t.len() != self.users {
                return config(format!("targets: expected {} rates, got {}", self.users, t.len()));
            }
            if let Some(r) = t.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return config(format!("targets: rates must be positive, got {r}"));
            }
            if self.scheme == Scheme::SskNoma {
                let bits = (self.n_t as f64).log2();
                if t[0] > bits + 1e-12 {
                    return config(format!(
                        "targets: SSK user rate {} exceeds log2(n_t) = {bits}",
                        t[0]
                    ));
                }
            }
        } else if self.metrics.contains(&Metric::Outage) {
            return config("targets: outage needs one target rate per user");
        }
        if self.scheme == Scheme::SskNoma {
            let m_total: usize = self.modulations.iter().map(|m| m.order()).product();
            if m_total.saturating_mul(self.n_t) > MAX_SM_HYPOTHESES {
                return config(format!(
                    "joint antenna/symbol search over {} hypotheses exceeds the limit of {MAX_SM_HYPOTHESES}",
                    m_total.saturating_mul(self.n_t)
                ));
            }
        }
        Ok(())
    }

    /// Stable digest of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}
