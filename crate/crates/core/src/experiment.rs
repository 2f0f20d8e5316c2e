//! Experiment files.
//!
//! An experiment is a TOML document describing one or more simulated cases,
//! an optional power-allocation sweep and an optional complexity table:
//!
//! ```toml
//! name = "example"
//! seed = 7
//! snr_db = { start = 0, stop = 20, step = 4 }   # or a list
//! threshold_rule = "shannon"                    # or "literal"
//!
//! [stopping]
//! min_bit_errors = 400
//! max_trials = 2000000
//!
//! [[case]]
//! label = "nr2"
//! schemes = ["ssk-noma", "noma-baseline"]
//! users = 3
//! n_t = 2
//! n_r = 2
//! modulation = "qpsk"            # or modulations = [...] per layer
//! targets = [1.0, 1.0, 2.0]      # needed for outage
//! ```
//!
//! `[pa_sweep]` takes `a2`, `snr_db`, `n_t`, `n_r`, `targets` and `simulate`;
//! `[complexity]` takes a list of `rows` with `users`, `m`, `n_r` and an
//! optional `n_t`.

use std::path::Path;

use serde::Deserialize;

use crate::analytics::abep::{abep_u1, abep_u2, abep_u3, LinkParams};
use crate::analytics::outage::outage_noma_user;
use crate::analytics::ThresholdRule;
use crate::channel::{FadingProfile, SnrConfig};
use crate::constellation::{Modulation, PowerAllocation};
use crate::detectors::complexity::{complexity_noma, complexity_ssk_noma};
use crate::error::{config, Error, Result};
use crate::montecarlo::config::{Metric, Scheme, SimConfig, Stopping};
use crate::montecarlo::sweep::{
    run_ber_point, run_outage_point, Companion, CompanionKind, PointEstimate, UserKey,
};

/// Built-in experiments, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("table1", include_str!("../presets/table1.toml")),
    ("quick", include_str!("../presets/quick.toml")),
];

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown preset '{name}' (available: {})", names.join(", ")))
        })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    fn values(&self, field: &str) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return config(format!("{field}: need step > 0 and stop >= start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n)
                    .map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10)
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoppingSpec {
    min_bit_errors: Option<u64>,
    max_trials: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseSpec {
    label: String,
    #[serde(default = "default_schemes")]
    schemes: Vec<Scheme>,
    users: usize,
    #[serde(default = "default_n_t")]
    n_t: usize,
    n_r: usize,
    modulation: Option<Modulation>,
    modulations: Option<Vec<Modulation>>,
    pa: Option<Vec<f64>>,
    baseline_modulations: Option<Vec<Modulation>>,
    baseline_pa: Option<Vec<f64>>,
    fading: Option<Vec<f64>>,
    targets: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    genie_antenna: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaSweepSpec {
    a2: GridSpec,
    #[serde(default = "default_sweep_snr")]
    snr_db: f64,
    #[serde(default = "default_n_t")]
    n_t: usize,
    #[serde(default = "default_n_t")]
    n_r: usize,
    targets: Option<Vec<f64>>,
    #[serde(default)]
    simulate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityRow {
    pub users: usize,
    /// Constellation order shared by every power-domain user.
    pub m: usize,
    pub n_r: usize,
    /// Defaults to `m`.
    pub n_t: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexitySpec {
    rows: Vec<ComplexityRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    name: String,
    seed: Option<u64>,
    metrics: Option<Vec<Metric>>,
    snr_db: Option<GridSpec>,
    #[serde(default)]
    threshold_rule: ThresholdRule,
    stopping: Option<StoppingSpec>,
    #[serde(default, rename = "case")]
    cases: Vec<CaseSpec>,
    pa_sweep: Option<PaSweepSpec>,
    complexity: Option<ComplexitySpec>,
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::SskNoma]
}
fn default_n_t() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_sweep_snr() -> f64 {
    20.0
}

/// One labelled case: a configuration per scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub configs: Vec<SimConfig>,
}

/// Power-allocation sweep over `a_2` for three users.
#[derive(Debug, Clone, PartialEq)]
pub struct PaSweep {
    pub a2: Vec<f64>,
    pub snr_db: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub targets: Option<Vec<f64>>,
    pub simulate: bool,
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub seed: u64,
    /// Metrics requested by the file; `None` lets each command decide.
    pub metrics: Option<Vec<Metric>>,
    pub threshold_rule: ThresholdRule,
    pub stopping: Stopping,
    pub cases: Vec<Case>,
    pub pa_sweep: Option<PaSweep>,
    pub complexity: Vec<ComplexityRow>,
}

/// `(L, M, N_r)` rows of the reference complexity table, with `N_t = M`.
pub const REFERENCE_COMPLEXITY_ROWS: [(usize, usize, usize); 6] =
    [(3, 2, 2), (3, 4, 4), (4, 2, 2), (4, 4, 4), (5, 2, 2), (5, 4, 4)];

fn field<T>(prefix: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) | Error::Input(m) | Error::Domain(m) => Error::Config(format!("{prefix}: {m}")),
        other => other,
    })
}

impl CaseSpec {
    fn build(&self, base: &SimConfig, grid: &[f64]) -> Result<Case> {
        let mut configs = Vec::new();
        for &scheme in &self.schemes {
            let prefix = format!("case '{}' ({scheme})", self.label);
            let layers = match scheme {
                Scheme::SskNoma => self.users.saturating_sub(1),
                Scheme::NomaBaseline => self.users,
            };
            if self.users < 2 {
                return config(format!("{prefix}: users must be at least 2, got {}", self.users));
            }
            let single = self.modulation.unwrap_or(Modulation::Qpsk);
            let (mods, pa) = match scheme {
                Scheme::SskNoma => (self.modulations.clone(), self.pa.clone()),
                Scheme::NomaBaseline => (self.baseline_modulations.clone(), self.baseline_pa.clone()),
            };
            let modulations = mods.unwrap_or_else(|| vec![single; layers]);
            let pa = match pa {
                Some(c) => field(&format!("{prefix}.pa"), PowerAllocation::new(c))?,
                None => field(&format!("{prefix}.pa"), PowerAllocation::default_for(layers))?,
            };
            let fading = match &self.fading {
                Some(v) => field(&format!("{prefix}.fading"), FadingProfile::new(v.clone()))?,
                None => FadingProfile::doubling(self.users),
            };
            let cfg = SimConfig {
                scheme,
                users: self.users,
                n_t: if scheme == Scheme::SskNoma { self.n_t } else { 1 },
                n_r: self.n_r,
                modulations,
                pa,
                fading,
                snr_grid_db: grid.to_vec(),
                targets: self.targets.clone(),
                genie_antenna: self.genie_antenna,
                ..base.clone()
            };
            field(&prefix, cfg.validate())?;
            configs.push(cfg);
        }
        if configs.is_empty() {
            return config(format!("case '{}': schemes must not be empty", self.label));
        }
        Ok(Case {
            label: self.label.clone(),
            configs,
        })
    }
}

impl Experiment {
    pub fn from_toml(src: &str) -> Result<Self> {
        let spec: FileSpec = toml::from_str(src).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::from_spec(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml(preset_source(name)?)
    }

    fn from_spec(spec: FileSpec) -> Result<Self> {
        let mut stopping = Stopping::default();
        if let Some(s) = &spec.stopping {
            stopping.min_bit_errors = s.min_bit_errors.unwrap_or(stopping.min_bit_errors);
            stopping.max_trials = s.max_trials.unwrap_or(stopping.max_trials);
        }
        let grid = match &spec.snr_db {
            Some(g) => g.values("snr_db")?,
            None if spec.cases.is_empty() => vec![0.0],
            None => return config("snr_db: required when cases are present"),
        };
        if grid.is_empty() {
            return config("snr_db: grid must not be empty");
        }
        let mut base = SimConfig::ssk_noma(3, 2, 2, Modulation::Qpsk)?;
        base.seed = spec.seed.unwrap_or(1);
        base.stopping = stopping;
        base.threshold_rule = spec.threshold_rule;
        base.metrics = spec.metrics.clone().unwrap_or_else(|| vec![Metric::Ber]);
        let mut cases = Vec::new();
        for c in &spec.cases {
            if cases.iter().any(|k: &Case| k.label == c.label) {
                return config(format!("case '{}': duplicate label", c.label));
            }
            if c.label.is_empty() || !c.label.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_') {
                return config(format!(
                    "case '{}': label must be non-empty and use only letters, digits, '-' or '_'",
                    c.label
                ));
            }
            cases.push(c.build(&base, &grid)?);
        }
        let pa_sweep = match &spec.pa_sweep {
            None => None,
            Some(p) => {
                let a2 = p.a2.values("pa_sweep.a2")?;
                if a2.is_empty() {
                    return config("pa_sweep.a2: grid must not be empty");
                }
                if let Some(a) = a2.iter().find(|a| !(**a > 0.5 && **a < 1.0)) {
                    return config(format!(
                        "pa_sweep.a2: entries must lie in (0.5, 1) so that a2 > a3, got {a}"
                    ));
                }
                let sweep = PaSweep {
                    a2,
                    snr_db: p.snr_db,
                    n_t: p.n_t,
                    n_r: p.n_r,
                    targets: p.targets.clone(),
                    simulate: p.simulate,
                };
                field("pa_sweep", sweep.config_for(sweep.a2[0], &base).map(|_| ()))?;
                Some(sweep)
            }
        };
        let complexity = match &spec.complexity {
            None => Vec::new(),
            Some(c) => {
                for (i, r) in c.rows.iter().enumerate() {
                    field(&format!("complexity.rows[{i}]"), complexity_row(r).map(|_| ()))?;
                }
                c.rows.clone()
            }
        };
        Ok(Self {
            name: spec.name,
            seed: base.seed,
            metrics: spec.metrics,
            threshold_rule: spec.threshold_rule,
            stopping,
            cases,
            pa_sweep,
            complexity,
        })
    }

    /// Replaces the seed of every case.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        for c in self.cases.iter_mut().flat_map(|c| c.configs.iter_mut()) {
            c.seed = seed;
        }
    }

    /// Replaces the trial cap of every case.
    pub fn set_max_trials(&mut self, max_trials: u64) -> Result<()> {
        if max_trials < 10_000 {
            return config(format!("--trials-max must be at least 10000, got {max_trials}"));
        }
        self.stopping.max_trials = max_trials;
        for c in self.cases.iter_mut().flat_map(|c| c.configs.iter_mut()) {
            c.stopping.max_trials = max_trials;
        }
        Ok(())
    }

    /// Base configuration shared by the pa sweep's points.
    fn sweep_base(&self) -> Result<SimConfig> {
        let mut base = SimConfig::ssk_noma(3, 2, 2, Modulation::Qpsk)?;
        base.seed = self.seed;
        base.stopping = self.stopping;
        base.threshold_rule = self.threshold_rule;
        Ok(base)
    }
}

/// `(δ_SSK-NOMA, δ_NOMA)` for one complexity row.
pub fn complexity_row(r: &ComplexityRow) -> Result<(u64, u64)> {
    if r.users < 2 {
        return config(format!("users must be at least 2, got {}", r.users));
    }
    let n_t = r.n_t.unwrap_or(r.m);
    Ok((
        complexity_ssk_noma(r.users, &vec![r.m; r.users - 1], n_t, r.n_r)?,
        complexity_noma(r.users, &vec![r.m; r.users], r.n_r)?,
    ))
}

pub fn reference_complexity_rows() -> Vec<ComplexityRow> {
    REFERENCE_COMPLEXITY_ROWS
        .iter()
        .map(|&(users, m, n_r)| ComplexityRow {
            users,
            m,
            n_r,
            n_t: None,
        })
        .collect()
}

/// One output row of a power-allocation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PaSweepRow {
    pub a2: f64,
    pub user: usize,
    pub simulated: Option<PointEstimate>,
    pub analytic: Option<Companion>,
}

impl PaSweep {
    fn config_for(&self, a2: f64, base: &SimConfig) -> Result<SimConfig> {
        let a2 = (a2 * 1e12).round() / 1e12;
        let mut cfg = base.clone();
        cfg.n_t = self.n_t;
        cfg.n_r = self.n_r;
        cfg.pa = PowerAllocation::new(vec![a2, 1.0 - a2])?;
        cfg.snr_grid_db = vec![self.snr_db];
        cfg.targets = self.targets.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rows for `metric` (BER or outage) at every `a_2`.
    pub fn run(&self, exp: &Experiment, metric: Metric) -> Result<Vec<PaSweepRow>> {
        let base = exp.sweep_base()?;
        let rho = SnrConfig::from_db(self.snr_db).rho;
        let mut rows = Vec::new();
        for &a2 in &self.a2 {
            let mut cfg = self.config_for(a2, &base)?;
            let (a2, a3) = (cfg.pa.coefficient(0), cfg.pa.coefficient(1));
            let link = |u: usize| LinkParams::new(rho, cfg.fading.variance(u), cfg.n_r);
            let users: Vec<usize> = match metric {
                Metric::Ber => vec![1, 2, 3],
                Metric::Outage => vec![2, 3],
                Metric::Rate => return config("pa_sweep: only ber and outage are supported"),
            };
            let phis = match metric {
                Metric::Outage => Some(cfg.layer_phis().ok_or_else(|| {
                    Error::Config("pa_sweep.targets: outage needs one target rate per user".into())
                })?),
                _ => None,
            };
            let simulated = if self.simulate {
                cfg.active_users = Some(users.clone());
                cfg.metrics = vec![metric];
                match metric {
                    Metric::Ber => run_ber_point(&cfg, self.snr_db)?,
                    _ => run_outage_point(&cfg, self.snr_db)?,
                }
            } else {
                Vec::new()
            };
            for u in users {
                let value = match (metric, u) {
                    (Metric::Ber, 1) => Companion {
                        value: abep_u1(&cfg.sc_alphabet()?, cfg.n_t, &link(1)?),
                        kind: CompanionKind::UpperBound,
                    },
                    (Metric::Ber, 2) => Companion {
                        value: abep_u2(a2, a3, &link(2)?)?,
                        kind: CompanionKind::Exact,
                    },
                    (Metric::Ber, _) => Companion {
                        value: abep_u3(a2, a3, &link(3)?)?,
                        kind: CompanionKind::Exact,
                    },
                    (_, u) => Companion {
                        value: outage_noma_user(u - 2, &cfg.pa, phis.as_deref().unwrap_or(&[]), &link(u)?),
                        kind: CompanionKind::Exact,
                    },
                };
                rows.push(PaSweepRow {
                    a2,
                    user: u,
                    simulated: simulated.iter().find(|p| p.user == UserKey::User(u)).cloned(),
                    analytic: Some(value),
                });
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for (name, _) in PRESETS {
            Experiment::preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(Experiment::preset("fig10").is_err());
    }

    #[test]
    fn range_grid() {
        let g = GridSpec::Range {
            start: 0.55,
            stop: 0.95,
            step: 0.05,
        };
        let v = g.values("a2").unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 0.55);
        assert_eq!(v[8], 0.95);
    }

    #[test]
    fn bad_pa_names_the_field() {
        let src = r#"
            name = "bad"
            snr_db = [0]
            [[case]]
            label = "x"
            users = 3
            n_r = 2
            pa = [0.7, 0.2]
        "#;
        let msg = Experiment::from_toml(src).unwrap_err().to_string();
        assert!(msg.contains("case 'x' (ssk-noma).pa"), "{msg}");
        assert!(msg.contains("must sum to 1"), "{msg}");
    }

    #[test]
    fn unknown_field_rejected() {
        let src = "name = \"x\"\nsnr = [1]\n";
        assert!(Experiment::from_toml(src).is_err());
    }

    #[test]
    fn sweep_rejects_low_a2() {
        let src = "name = \"x\"\n[pa_sweep]\na2 = [0.5, 0.6]\n";
        let msg = Experiment::from_toml(src).unwrap_err().to_string();
        assert!(msg.contains("pa_sweep.a2"), "{msg}");
    }

    #[test]
    fn overrides_reach_cases() {
        let mut e = Experiment::preset("fig2").unwrap();
        e.set_seed(99);
        e.set_max_trials(50_000).unwrap();
        for c in e.cases.iter().flat_map(|c| &c.configs) {
            assert_eq!(c.seed, 99);
            assert_eq!(c.stopping.max_trials, 50_000);
        }
        assert!(e.set_max_trials(10).is_err());
    }

    #[test]
    fn analytic_sweep_trend() {
        let e = Experiment::preset("fig8").unwrap();
        let mut sweep = e.pa_sweep.clone().unwrap();
        sweep.simulate = false;
        let rows = sweep.run(&e, Metric::Ber).unwrap();
        assert_eq!(rows.len(), 27);
        let u2: Vec<f64> = rows.iter().filter(|r| r.user == 2).map(|r| r.analytic.unwrap().value).collect();
        assert!(u2.windows(2).all(|w| w[1] <= w[0]), "{u2:?}");
    }

    #[test]
    fn outage_sweep_boundary() {
        // φ2 = 2^1.5 - 1, so U2 leaves certain outage once a2 > φ2 / (1 + φ2).
        let e = Experiment::preset("fig9").unwrap();
        let sweep = PaSweep {
            simulate: false,
            ..e.pa_sweep.clone().unwrap()
        };
        let rows = sweep.run(&e, Metric::Outage).unwrap();
        let boundary = {
            let phi = 1.5f64.exp2() - 1.0;
            phi / (1.0 + phi)
        };
        for r in rows.iter().filter(|r| r.user == 2) {
            let p = r.analytic.unwrap().value;
            if r.a2 < boundary {
                assert_eq!(p, 1.0, "a2 {}", r.a2);
            } else {
                assert!(p < 1.0, "a2 {}", r.a2);
            }
        }
    }
}
