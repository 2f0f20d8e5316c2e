//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`. Pass criterion ids
//! (`C3 C7`) after `--` to run a subset.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use ssk_noma::analytics::abep::{abep_u1, abep_u1_raw, abep_u2, abep_u3, LinkParams, PairEnergySpectrum, ZetaSet};
use ssk_noma::analytics::capacity::{ergodic_capacity_noma_user, ergodic_capacity_u1};
use ssk_noma::analytics::union_bound::union_bound_ber;
use ssk_noma::analytics::{exp_integral, q_func};
use ssk_noma::constellation::{enumerate_sc_alphabet, Modulation, PowerAllocation, UserConstellation};
use ssk_noma::experiment::{complexity_row, reference_complexity_rows};
use ssk_noma::montecarlo::{
    run_ber_point, run_outage_point_checked, run_rate_point, run_sweep, CompanionKind, Metric, PointEstimate,
    SimConfig, UserKey,
};
use ssk_noma::report::points_to_string;

const SEED: u64 = 20_241_015;

type Check = fn() -> (bool, String);

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn ssk(users: usize, n_r: usize) -> SimConfig {
    let mut c = SimConfig::ssk_noma(users, 2, n_r, Modulation::Qpsk).unwrap();
    c.seed = SEED;
    c
}

fn baseline(users: usize, n_r: usize) -> SimConfig {
    let mut c = SimConfig::noma_baseline(users, n_r, Modulation::Qpsk).unwrap();
    c.seed = SEED;
    c
}

fn user_of(p: &PointEstimate) -> usize {
    match p.user {
        UserKey::User(u) => u,
        UserKey::Sum => 0,
    }
}

fn complexity_table() -> (bool, String) {
    let want = [(72, 108), (312, 408), (140, 184), (760, 688), (240, 280), (2000, 1040)];
    let got: Vec<(u64, u64)> = reference_complexity_rows()
        .iter()
        .map(|r| complexity_row(r).unwrap())
        .collect();
    (got == want, format!("{got:?}"))
}

fn superposed_alphabet() -> (bool, String) {
    // Sign of (U2 part, U3 part) per row (U2 label) and column (U3 label).
    let re: [[(f64, f64); 4]; 4] = [
        [(1., 1.), (1., -1.), (1., 1.), (1., -1.)],
        [(-1., 1.), (-1., -1.), (-1., 1.), (-1., -1.)],
        [(1., 1.), (1., -1.), (1., 1.), (1., -1.)],
        [(-1., 1.), (-1., -1.), (-1., 1.), (-1., -1.)],
    ];
    let im: [[(f64, f64); 4]; 4] = [
        [(1., 1.), (1., 1.), (1., -1.), (1., -1.)],
        [(1., 1.), (1., 1.), (1., -1.), (1., -1.)],
        [(-1., 1.), (-1., 1.), (-1., -1.), (-1., -1.)],
        [(-1., 1.), (-1., 1.), (-1., -1.), (-1., -1.)],
    ];
    let (a2, a3) = ((0.8f64 / 2.0).sqrt(), (0.2f64 / 2.0).sqrt());
    let q = UserConstellation::new(Modulation::Qpsk);
    let pa = PowerAllocation::new(vec![0.8, 0.2]).unwrap();
    let alpha = enumerate_sc_alphabet(&[q.clone(), q], &pa).unwrap();
    let mut worst: f64 = 0.0;
    for u2 in 0..4 {
        for u3 in 0..4 {
            let x = alpha.value(alpha.index_of(&[u2, u3]));
            let (r, i) = (re[u2][u3], im[u2][u3]);
            worst = worst
                .max((x.re - (r.0 * a2 + r.1 * a3)).abs())
                .max((x.im - (i.0 * a2 + i.1 * a3)).abs());
        }
    }
    (worst <= 1e-12, format!("16 cells, max error {worst:.2e}"))
}

fn exact_abep_agreement() -> (bool, String) {
    let mut ok = true;
    let mut worst_exact: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    let mut checked = 0;
    for n_r in [2, 4] {
        let mut cfg = ssk(3, n_r);
        cfg.snr_grid_db = grid(0.0, 20.0, 4.0);
        cfg.stopping.max_trials = 4_000_000;
        let res = run_sweep(&cfg).unwrap();
        for p in &res.points {
            let c = p.analytic.unwrap();
            match c.kind {
                CompanionKind::Exact if p.value >= 1e-4 => {
                    let r = (p.value - c.value).abs() / p.ci_halfwidth;
                    worst_exact = worst_exact.max(r);
                    ok &= r <= 3.0;
                    checked += 1;
                }
                CompanionKind::UpperBound => {
                    let r = (p.value - c.value).max(0.0) / p.ci_halfwidth;
                    worst_bound = worst_bound.max(r);
                    ok &= p.value <= c.value + 3.0 * p.ci_halfwidth;
                    checked += 1;
                }
                _ => {}
            }
        }
    }
    (
        ok,
        format!("{checked} points; worst |sim-exact| {worst_exact:.2} CI, worst excess over bound {worst_bound:.2} CI"),
    )
}

fn union_bound_dominance() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for n_r in [2, 4] {
        let mut cfg = ssk(4, n_r);
        cfg.snr_grid_db = grid(0.0, 20.0, 4.0);
        cfg.active_users = Some(vec![2, 3, 4]);
        cfg.stopping.max_trials = 4_000_000;
        let res = run_sweep(&cfg).unwrap();
        for u in 2..=4 {
            let pts: Vec<&PointEstimate> = res.points.iter().filter(|p| user_of(p) == u).collect();
            let mut worst: f64 = 0.0;
            for p in &pts {
                let b = p.analytic.unwrap().value;
                worst = worst.max((p.value - b).max(0.0) / p.ci_halfwidth);
                ok &= b >= p.value - 3.0 * p.ci_halfwidth;
            }
            let tight = pts.iter().rev().find(|p| p.value >= 1e-4);
            let ratio = tight.map(|p| p.analytic.unwrap().value / p.value).unwrap_or(f64::NAN);
            ok &= ratio <= 4.0;
            notes.push(format!(
                "N_r={n_r} U{u}: excess {worst:.2} CI, bound/sim {ratio:.2} at {} dB",
                tight.map(|p| p.snr_db).unwrap_or(f64::NAN)
            ));
        }
    }
    (ok, notes.join("; "))
}

fn capacity_agreement() -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut worst_u1: f64 = 0.0;
    for users in [3, 4] {
        for n_r in [2, 4] {
            let mut cfg = ssk(users, n_r);
            cfg.stopping.max_trials = 1_000_000;
            let alpha = cfg.sc_alphabet().unwrap();
            let spectrum = PairEnergySpectrum::new(&alpha, cfg.n_t);
            for snr in grid(0.0, 30.0, 10.0) {
                let pts = run_rate_point(&cfg, snr).unwrap();
                for p in pts.iter().filter(|p| p.user != UserKey::Sum) {
                    let u = user_of(p);
                    let link = LinkParams::new(db(snr), cfg.fading.variance(u), n_r).unwrap();
                    let want = match cfg.layer_of(u) {
                        Some(layer) => ergodic_capacity_noma_user(layer, &cfg.pa, &link).unwrap(),
                        None => {
                            let closed = ergodic_capacity_u1(2, abep_u1_raw(&alpha, 2, &link).min(1.0)).unwrap();
                            let averaged = fading_expectation(|g| spectrum.conditional_raw(g), n_r, link.gamma_bar());
                            let by_quadrature = (1.0 - averaged.min(1.0)).max(0.0);
                            worst_u1 = worst_u1.max((closed - by_quadrature).abs());
                            closed
                        }
                    };
                    worst = worst.max((p.value - want).abs());
                }
            }
        }
    }
    ok &= worst <= 0.02 && worst_u1 <= 1e-3;
    (
        ok,
        format!("max |sim-closed form| {worst:.4} bits; SSK-user closed form vs averaged conditional {worst_u1:.2e}"),
    )
}

fn outage_agreement() -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    let mut draws = 0;
    let mut compared = 0;
    for n_r in [2, 4] {
        let mut cfg = ssk(4, n_r);
        cfg.metrics = vec![Metric::Outage];
        cfg.targets = Some(vec![1.0, 1.5, 1.5, 2.0]);
        cfg.active_users = Some(vec![2, 3, 4]);
        cfg.stopping.min_bit_errors = u64::MAX;
        cfg.stopping.max_trials = 1_000_000;
        cfg.validate().unwrap();
        let phis = cfg.layer_phis().unwrap();
        for snr in grid(0.0, 30.0, 5.0) {
            let (pts, m) = run_outage_point_checked(&cfg, snr).unwrap();
            mismatches += m;
            draws += pts[0].n_trials;
            for p in &pts {
                let u = user_of(p);
                let link = LinkParams::new(db(snr), cfg.fading.variance(u), n_r).unwrap();
                let want = ssk_noma::analytics::outage_noma_user(u - 2, &cfg.pa, &phis, &link);
                if want < 1e-3 {
                    continue;
                }
                let se = (want * (1.0 - want) / p.n_trials as f64).sqrt();
                let z = if se == 0.0 {
                    if p.value == want { 0.0 } else { f64::INFINITY }
                } else {
                    (p.value - want).abs() / se
                };
                worst = worst.max(z);
                ok &= z <= 3.0;
                compared += 1;
            }
        }
    }
    ok &= mismatches == 0;
    (
        ok,
        format!("{compared} points, worst deviation {worst:.2} SE; {mismatches} disagreements over {draws} draws"),
    )
}

fn analytic_slopes() -> (bool, Vec<String>) {
    let mut ok = true;
    let mut notes = Vec::new();
    let (lo, hi) = (30.0, 40.0);
    let q = UserConstellation::new(Modulation::Qpsk);
    for n_r in [2usize, 4] {
        let target = -(n_r as f64);
        let mut curves: Vec<(String, Box<dyn Fn(f64) -> f64>)> = Vec::new();
        let l3 = PowerAllocation::new(vec![0.8, 0.2]).unwrap();
        let alpha3 = enumerate_sc_alphabet(&[q.clone(), q.clone()], &l3).unwrap();
        curves.push((
            "L3 U1".into(),
            Box::new(move |s| abep_u1(&alpha3, 2, &LinkParams::new(db(s), 1.0, n_r).unwrap())),
        ));
        curves.push((
            "L3 U2".into(),
            Box::new(move |s| abep_u2(0.8, 0.2, &LinkParams::new(db(s), 2.0, n_r).unwrap()).unwrap()),
        ));
        curves.push((
            "L3 U3".into(),
            Box::new(move |s| abep_u3(0.8, 0.2, &LinkParams::new(db(s), 4.0, n_r).unwrap()).unwrap()),
        ));
        let l4 = PowerAllocation::default_for(3).unwrap();
        let alpha4 = enumerate_sc_alphabet(&[q.clone(), q.clone(), q.clone()], &l4).unwrap();
        curves.push((
            "L4 U1".into(),
            Box::new(move |s| abep_u1(&alpha4, 2, &LinkParams::new(db(s), 1.0, n_r).unwrap())),
        ));
        for layer in 0..3 {
            let (pa, consts) = (l4.clone(), vec![q.clone(); 3]);
            let var = 2f64.powi(layer as i32 + 1);
            curves.push((
                format!("L4 U{}", layer + 2),
                Box::new(move |s| {
                    union_bound_ber(layer, &consts, &pa, &LinkParams::new(db(s), var, n_r).unwrap())
                        .unwrap()
                        .value
                }),
            ));
        }
        for (name, f) in &curves {
            let k = slope(lo, f(lo), hi, f(hi));
            let pass = (k - target).abs() <= 0.3;
            ok &= pass;
            notes.push(format!("analytic N_r={n_r} {name} {k:.2}{}", if pass { "" } else { " out of range" }));
        }
    }
    (ok, notes)
}

fn simulated_slopes() -> (bool, Vec<String>) {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n_r, lo, hi) in [(2usize, 24.0, 28.0), (4, 16.0, 20.0)] {
        let target = -(n_r as f64);
        for (scheme, cfg) in [("SSK-NOMA", ssk(3, n_r)), ("NOMA", baseline(3, n_r))] {
            for u in 1..=3 {
                let mut cfg = cfg.clone();
                cfg.active_users = Some(vec![u]);
                cfg.stopping.min_bit_errors = 400;
                cfg.stopping.max_trials = 700_000_000;
                let ber = |s: f64| run_ber_point(&cfg, s).unwrap().remove(0);
                let (a, b) = (ber(lo), ber(hi));
                let k = slope(lo, a.value, hi, b.value);
                let pass = (k - target).abs() <= 0.3;
                ok &= pass;
                notes.push(format!(
                    "simulated N_r={n_r} {scheme} U{u} {k:.2} ({} and {} errors){}",
                    a.n_events,
                    b.n_events,
                    if pass { "" } else { " out of range" }
                ));
            }
        }
    }
    (ok, notes)
}

fn diversity_order() -> (bool, String) {
    let (a_ok, a) = analytic_slopes();
    let (s_ok, s) = simulated_slopes();
    for line in a.iter().chain(&s) {
        println!("    {line}");
    }
    let out = |v: &[String]| v.iter().filter(|l| l.ends_with("out of range")).count();
    (
        a_ok && s_ok,
        format!(
            "{} of {} analytic and {} of {} simulated slopes out of range",
            out(&a),
            a.len(),
            out(&s),
            s.len()
        ),
    )
}

fn zeta_identities() -> (bool, String) {
    let z = ZetaSet::new(0.8, 0.2).unwrap();
    let want = [0.2, 1.8, 0.2, 1.8, 5.0];
    let err = z
        .values
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (err <= 1e-12, format!("{:?}, max error {err:.1e}", z.values))
}

fn special_functions() -> (bool, String) {
    let mut q_err: f64 = 0.0;
    for i in 0..=800 {
        let x = i as f64 * 0.01;
        q_err = q_err.max((q_func(x) - q_oracle(x)).abs() / q_oracle(x));
    }
    let mut ei_err: f64 = 0.0;
    for i in 0..=400 {
        let z = 1e-3 * (50.0f64 / 1e-3).powf(i as f64 / 400.0);
        let want = -e1_oracle(z);
        ei_err = ei_err.max((exp_integral(-z).unwrap() - want).abs() / want.abs());
    }
    let mut cap_err: f64 = 0.0;
    let pa = PowerAllocation::default_for(3).unwrap();
    for snr in grid(0.0, 30.0, 5.0) {
        for layer in 0..3 {
            let var = 2f64.powi(layer as i32 + 1);
            let link = LinkParams::new(db(snr), var, 1).unwrap();
            let residual = pa.residual_after(layer);
            let want = rayleigh_rate((pa.coefficient(layer) + residual) * db(snr) * var, residual * db(snr) * var);
            cap_err = cap_err.max((ergodic_capacity_noma_user(layer, &pa, &link).unwrap() - want).abs());
        }
    }
    (
        q_err <= 1e-9 && ei_err <= 1e-9 && cap_err <= 1e-6,
        format!("Q rel {q_err:.1e}, Ei rel {ei_err:.1e}, single-antenna rate {cap_err:.1e}"),
    )
}

fn ssk_beats_baseline() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    let (mut s, mut b) = (ssk(3, 2), baseline(3, 2));
    for c in [&mut s, &mut b] {
        c.stopping.min_bit_errors = 1000;
        c.stopping.max_trials = 20_000_000;
    }
    let sb = run_ber_point(&s, 20.0).unwrap();
    let bb = run_ber_point(&b, 20.0).unwrap();
    for (x, y) in sb.iter().zip(&bb) {
        let pass = x.value + 3.0 * x.ci_halfwidth < y.value - 3.0 * y.ci_halfwidth;
        ok &= pass;
        notes.push(format!("U{} BER {:.2e} vs {:.2e}", user_of(x), x.value, y.value));
    }
    for c in [&mut s, &mut b] {
        c.stopping.max_trials = 1_000_000;
    }
    let sum = |c: &SimConfig| run_rate_point(c, 20.0).unwrap().into_iter().find(|p| p.user == UserKey::Sum).unwrap();
    let (x, y) = (sum(&s), sum(&b));
    ok &= x.value - 3.0 * x.ci_halfwidth > y.value + 3.0 * y.ci_halfwidth;
    notes.push(format!("sum rate {:.3} vs {:.3}", x.value, y.value));
    (ok, notes.join(", "))
}

fn determinism() -> (bool, String) {
    let mut configs = vec![ssk(3, 2), baseline(3, 2)];
    for c in &mut configs {
        c.snr_grid_db = vec![0.0, 10.0, 20.0];
        c.metrics = vec![Metric::Ber, Metric::Rate, Metric::Outage];
        c.targets = Some(vec![1.0, 1.0, 2.0]);
        c.stopping.max_trials = 300_000;
    }
    let csv = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                configs
                    .iter()
                    .map(|c| points_to_string(&run_sweep(c).unwrap().points).unwrap())
                    .collect::<Vec<_>>()
                    .concat()
            })
    };
    let one = csv(1);
    let same = [2, 3, 5].iter().all(|t| csv(*t) == one);
    (same, format!("{} bytes compared across 1, 2, 3 and 5 workers", one.len()))
}

fn main() -> ExitCode {
    let checks: [(&str, &str, Check); 11] = [
        ("C1", "complexity-table", complexity_table),
        ("C2", "superposed-alphabet", superposed_alphabet),
        ("C3", "exact-abep-agreement", exact_abep_agreement),
        ("C4", "union-bound-dominance", union_bound_dominance),
        ("C5", "capacity-agreement", capacity_agreement),
        ("C6", "outage-agreement", outage_agreement),
        ("C7", "diversity-order", diversity_order),
        ("C8", "zeta-identities", zeta_identities),
        ("C9", "special-functions", special_functions),
        ("C10", "ssk-noma-vs-noma", ssk_beats_baseline),
        ("C11", "determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('C')).collect();
    let mut failed = 0;
    for (id, name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check();
        if !pass {
            failed += 1;
        }
        println!(
            "{id:<4}{} {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
