use serde::Serialize;

use super::config::{Metric, Scheme, SimConfig};
use super::engine::{simulate_point, Tally};
use super::stats::{mean_halfwidth, wilson_halfwidth};
use crate::analytics::abep::{abep_u1, abep_u1_raw, abep_u2, abep_u3, LinkParams};
use crate::analytics::capacity::ergodic_capacity_noma_user;
use crate::analytics::outage::{outage_noma_user, outage_u1};
use crate::analytics::union_bound::union_bound_ber;
use crate::channel::SnrConfig;
use crate::constellation::Modulation;
use crate::error::{config, Result};

/// Which user an estimate describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum UserKey {
    User(usize),
    Sum,
}

impl std::fmt::Display for UserKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UserKey::User(u) => write!(f, "{u}"),
            UserKey::Sum => f.write_str("sum"),
        }
    }
}

/// How an analytic companion relates to the simulated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompanionKind {
    /// Should match the simulation within its confidence interval.
    Exact,
    /// Should not fall below the simulation.
    UpperBound,
    /// Describes a related but different event; shown, never compared.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Companion {
    pub value: f64,
    pub kind: CompanionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    pub metric: Metric,
    pub scheme: Scheme,
    pub user: UserKey,
    pub snr_db: f64,
    pub value: f64,
    pub ci_halfwidth: f64,
    pub n_trials: u64,
    /// Bit errors or outage events; zero for rates.
    pub n_events: u64,
    pub analytic: Option<Companion>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub points: Vec<PointEstimate>,
}

impl SweepResult {
    pub fn find(&self, metric: Metric, user: UserKey, snr_db: f64) -> Option<&PointEstimate> {
        self.points
            .iter()
            .find(|p| p.metric == metric && p.user == user && p.snr_db == snr_db)
    }
}

fn proportion_points(cfg: &SimConfig, metric: Metric, snr_db: f64, t: &Tally) -> Vec<PointEstimate> {
    cfg.simulated_users()
        .into_iter()
        .map(|u| {
            let (k, n) = (t.events[u - 1], t.opportunities[u - 1]);
            PointEstimate {
                metric,
                scheme: cfg.scheme,
                user: UserKey::User(u),
                snr_db,
                value: if n == 0 { 0.0 } else { k as f64 / n as f64 },
                ci_halfwidth: wilson_halfwidth(k, n),
                n_trials: t.trials,
                n_events: k,
                analytic: None,
            }
        })
        .collect()
}

/// Bit error rate of every simulated user at one SNR.
pub fn run_ber_point(cfg: &SimConfig, snr_db: f64) -> Result<Vec<PointEstimate>> {
    let t = simulate_point(cfg, Metric::Ber, snr_db)?;
    Ok(proportion_points(cfg, Metric::Ber, snr_db, &t))
}

/// Outage frequencies plus the number of draws on which the threshold and
/// SINR-cascade tests disagreed.
pub fn run_outage_point_checked(cfg: &SimConfig, snr_db: f64) -> Result<(Vec<PointEstimate>, u64)> {
    let t = simulate_point(cfg, Metric::Outage, snr_db)?;
    Ok((proportion_points(cfg, Metric::Outage, snr_db, &t), t.mismatches))
}

pub fn run_outage_point(cfg: &SimConfig, snr_db: f64) -> Result<Vec<PointEstimate>> {
    Ok(run_outage_point_checked(cfg, snr_db)?.0)
}

/// Average achievable rate per simulated user, followed by their sum.
///
/// The SSK user's per-draw rate uses the unclamped conditional error bound;
/// only the final average is clamped to `[0, log2 N_t]`.
pub fn run_rate_point(cfg: &SimConfig, snr_db: f64) -> Result<Vec<PointEstimate>> {
    let t = simulate_point(cfg, Metric::Rate, snr_db)?;
    let n = t.trials;
    let mut out: Vec<PointEstimate> = cfg
        .simulated_users()
        .into_iter()
        .map(|u| {
            let i = u - 1;
            let mut value = t.sums[i] / n as f64;
            if cfg.layer_of(u).is_none() {
                value = value.clamp(0.0, (cfg.n_t as f64).log2());
            }
            PointEstimate {
                metric: Metric::Rate,
                scheme: cfg.scheme,
                user: UserKey::User(u),
                snr_db,
                value,
                ci_halfwidth: mean_halfwidth(t.sums[i], t.sums_sq[i], n),
                n_trials: n,
                n_events: 0,
                analytic: None,
            }
        })
        .collect();
    let value = out.iter().map(|p| p.value).sum();
    let ci = out.iter().map(|p| p.ci_halfwidth.powi(2)).sum::<f64>().sqrt();
    out.push(PointEstimate {
        metric: Metric::Rate,
        scheme: cfg.scheme,
        user: UserKey::Sum,
        snr_db,
        value,
        ci_halfwidth: ci,
        n_trials: n,
        n_events: 0,
        analytic: None,
    });
    Ok(out)
}

fn is_exact_three_user(cfg: &SimConfig) -> bool {
    cfg.scheme == Scheme::SskNoma
        && cfg.users == 3
        && cfg.modulations.iter().all(|m| *m == Modulation::Qpsk)
}

/// Closed-form value paired with a simulated point, if one exists.
pub fn analytic_companion(
    cfg: &SimConfig,
    metric: Metric,
    user: UserKey,
    snr_db: f64,
) -> Result<Option<Companion>> {
    let rho = SnrConfig::from_db(snr_db).rho;
    let link = |u: usize| LinkParams::new(rho, cfg.fading.variance(u), cfg.n_r);
    let exact = |value| Some(Companion { value, kind: CompanionKind::Exact });
    let bound = |value| Some(Companion { value, kind: CompanionKind::UpperBound });
    let user = match user {
        UserKey::User(u) => u,
        UserKey::Sum => {
            let mut total = 0.0;
            for u in 1..=cfg.users {
                match analytic_companion(cfg, metric, UserKey::User(u), snr_db)? {
                    Some(c) if c.kind == CompanionKind::Exact => total += c.value,
                    _ => return Ok(None),
                }
            }
            return Ok(exact(total));
        }
    };
    let l = link(user)?;
    Ok(match (metric, cfg.layer_of(user)) {
        (Metric::Ber, None) => bound(abep_u1(&cfg.sc_alphabet()?, cfg.n_t, &l)),
        (Metric::Ber, Some(layer)) if is_exact_three_user(cfg) => {
            let (a2, a3) = (cfg.pa.coefficient(0), cfg.pa.coefficient(1));
            exact(if layer == 0 { abep_u2(a2, a3, &l)? } else { abep_u3(a2, a3, &l)? })
        }
        (Metric::Ber, Some(layer)) => {
            bound(union_bound_ber(layer, &cfg.constellations(), &cfg.pa, &l)?.value)
        }
        (Metric::Rate, None) => {
            let p = abep_u1_raw(&cfg.sc_alphabet()?, cfg.n_t, &l).min(1.0);
            exact((cfg.n_t as f64).log2() * (1.0 - p))
        }
        (Metric::Rate, Some(layer)) => exact(ergodic_capacity_noma_user(layer, &cfg.pa, &l)?),
        (Metric::Outage, None) => {
            let target = match &cfg.targets {
                Some(t) => t[0],
                None => return config("targets: outage needs one target rate per user"),
            };
            Some(Companion {
                value: outage_u1(target, cfg.n_t, &cfg.sc_alphabet()?, &l)?,
                kind: CompanionKind::Reference,
            })
        }
        (Metric::Outage, Some(layer)) => {
            let phis = match cfg.layer_phis() {
                Some(p) => p,
                None => return config("targets: outage needs one target rate per user"),
            };
            exact(outage_noma_user(layer, &cfg.pa, &phis, &l))
        }
    })
}

/// Simulates every requested (metric, SNR) point and attaches closed forms.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    run_sweep_with_progress(cfg, |_, _| {})
}

/// [`run_sweep`] that reports each finished point.
pub fn run_sweep_with_progress<F: FnMut(Metric, f64)>(cfg: &SimConfig, mut progress: F) -> Result<SweepResult> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &metric in &cfg.metrics {
        for &snr in &cfg.snr_grid_db {
            let mut batch = match metric {
                Metric::Ber => run_ber_point(cfg, snr)?,
                Metric::Outage => run_outage_point(cfg, snr)?,
                Metric::Rate => run_rate_point(cfg, snr)?,
            };
            for p in &mut batch {
                p.analytic = analytic_companion(cfg, metric, p.user, snr)?;
            }
            points.extend(batch);
            progress(metric, snr);
        }
    }
    Ok(SweepResult {
        config_hash: cfg.hash(),
        points,
    })
}
