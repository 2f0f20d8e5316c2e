//! Command-line front end.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 configuration error, 3 failed
//! validation. `SSK_NOMA_WORKERS` sets the number of worker threads.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{complexity_row, reference_complexity_rows, Experiment};
use crate::montecarlo::config::{Metric, Scheme};
use crate::montecarlo::sweep::{run_sweep_with_progress, CompanionKind, PointEstimate, UserKey};
use crate::report::{self, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable overriding the worker-thread count.
pub const WORKERS_ENV: &str = "SSK_NOMA_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "ssk-noma", version, about = "SSK-NOMA link-level simulator and closed-form evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulated and analytic bit error rates.
    Ber(RunArgs),
    /// Simulated and analytic ergodic rates.
    Capacity(RunArgs),
    /// Simulated and analytic outage probabilities.
    Outage(RunArgs),
    /// Error rate and outage against the power share of the stronger NOMA user.
    PaSweep(RunArgs),
    /// Receiver operation counts.
    Complexity(RunArgs),
    /// Compares simulation with the closed forms and fails on disagreement.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: fig2..fig9, table1 or quick.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Upper limit on trials per point.
    #[arg(long, value_name = "N")]
    trials_max: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

impl RunArgs {
    fn source(&self) -> String {
        match (&self.config, &self.preset) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(n)) => format!("preset:{n}"),
            (None, None) => String::new(),
        }
    }

    fn load(&self, required: bool) -> Result<Option<Experiment>> {
        let mut exp = match (&self.config, &self.preset) {
            (Some(p), _) => Experiment::from_file(p)?,
            (None, Some(n)) => Experiment::preset(n)?,
            (None, None) if required => {
                return Err(Error::Config("one of --config or --preset is required".into()))
            }
            (None, None) => return Ok(None),
        };
        if let Some(s) = self.seed {
            exp.set_seed(s);
        }
        if let Some(t) = self.trials_max {
            exp.set_max_trials(t)?;
        }
        Ok(Some(exp))
    }
}

/// Knobs for [`validate_experiment`].
#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Multiplies every analytic value of the given metric; used to check
    /// that validation notices a wrong closed form.
    pub corrupt_analytic: Option<(Metric, f64)>,
}

/// Worst disagreement for one (case, scheme, metric, user).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationLine {
    pub case: String,
    pub scheme: Scheme,
    pub metric: Metric,
    pub user: UserKey,
    pub kind: CompanionKind,
    /// Largest `|sim - analytic| / ci` (exact) or `(sim - bound)+ / ci` (bound).
    pub max_ratio: f64,
}

impl ValidationLine {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 3.0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub lines: Vec<ValidationLine>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed())
    }
}

/// Deviation of a simulated point from its companion in CI half-widths, or
/// `None` when there is nothing to compare against.
pub fn deviation(p: &PointEstimate) -> Option<(CompanionKind, f64)> {
    let c = p.analytic?;
    let excess = match c.kind {
        CompanionKind::Exact => (p.value - c.value).abs(),
        CompanionKind::UpperBound => (p.value - c.value).max(0.0),
        CompanionKind::Reference => return None,
    };
    let ratio = if excess == 0.0 {
        0.0
    } else if p.ci_halfwidth > 0.0 {
        excess / p.ci_halfwidth
    } else {
        f64::INFINITY
    };
    Some((c.kind, ratio))
}

fn default_metrics(exp: &Experiment) -> Vec<Metric> {
    if let Some(m) = &exp.metrics {
        return m.clone();
    }
    let mut m = vec![Metric::Ber, Metric::Rate];
    let all_targets = exp
        .cases
        .iter()
        .flat_map(|c| &c.configs)
        .all(|c| c.targets.is_some());
    if all_targets && !exp.cases.is_empty() {
        m.push(Metric::Outage);
    }
    m
}

/// Runs every case of `exp` and compares each point with its closed form.
pub fn validate_experiment<F: FnMut(&str)>(
    exp: &Experiment,
    opts: &ValidateOptions,
    mut progress: F,
) -> Result<ValidationReport> {
    if exp.cases.is_empty() {
        return Err(Error::Config("validate: the experiment has no [[case]] sections".into()));
    }
    let metrics = default_metrics(exp);
    let mut report = ValidationReport::default();
    for case in &exp.cases {
        for base in &case.configs {
            let mut cfg = base.clone();
            cfg.metrics = metrics.clone();
            let sweep = run_sweep_with_progress(&cfg, |m, snr| {
                progress(&format!("{} {} {m} {snr} dB", case.label, cfg.scheme))
            })?;
            for p in &sweep.points {
                let mut p = p.clone();
                if let (Some((metric, factor)), Some(c)) = (opts.corrupt_analytic, p.analytic.as_mut()) {
                    if metric == p.metric {
                        c.value *= factor;
                    }
                }
                let Some((kind, ratio)) = deviation(&p) else { continue };
                match report.lines.iter_mut().find(|l| {
                    l.case == case.label && l.scheme == p.scheme && l.metric == p.metric && l.user == p.user
                }) {
                    Some(l) => l.max_ratio = l.max_ratio.max(ratio),
                    None => report.lines.push(ValidationLine {
                        case: case.label.clone(),
                        scheme: p.scheme,
                        metric: p.metric,
                        user: p.user,
                        kind,
                        max_ratio: ratio,
                    }),
                }
            }
        }
    }
    Ok(report)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn worker_count() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let workers = match worker_count() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Ber(a) => cmd_sweep("ber", a, Metric::Ber),
        Command::Capacity(a) => cmd_sweep("capacity", a, Metric::Rate),
        Command::Outage(a) => cmd_sweep("outage", a, Metric::Outage),
        Command::PaSweep(a) => cmd_pa_sweep(a),
        Command::Complexity(a) => cmd_complexity(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn finish(command: &str, a: &RunArgs, seed: u64, files: Vec<String>) -> Result<()> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    RunManifest {
        command: command.to_string(),
        config: a.source(),
        out: a.out.display().to_string(),
        timestamp,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        files: files.clone(),
    }
    .write(&a.out)?;
    if !a.quiet {
        for f in files {
            println!("wrote {}", a.out.join(f).display());
        }
    }
    Ok(())
}

fn cmd_sweep(command: &str, a: &RunArgs, metric: Metric) -> Result<i32> {
    let exp = a.load(true)?.expect("required");
    if exp.cases.is_empty() {
        return Err(Error::Config(format!("{command}: the experiment has no [[case]] sections")));
    }
    let mut cases = exp.cases.clone();
    for c in cases.iter_mut().flat_map(|c| c.configs.iter_mut()) {
        c.metrics = vec![metric];
        c.validate().map_err(|e| Error::Config(format!("{command}: {e}")))?;
    }
    prepare_out(&a.out)?;
    let mut files = Vec::new();
    for case in &cases {
        let mut points = Vec::new();
        for cfg in &case.configs {
            let sweep = run_sweep_with_progress(cfg, |m, snr| {
                if !a.quiet {
                    eprintln!("[{m}] {} {} {snr} dB", case.label, cfg.scheme);
                }
            })?;
            points.extend(sweep.points);
        }
        let name = format!("{metric}_{}.csv", case.label);
        report::write_file(&a.out.join(&name), |w| report::write_points(w, &points))?;
        files.push(name);
    }
    finish(command, a, exp.seed, files)?;
    Ok(EXIT_OK)
}

fn cmd_pa_sweep(a: &RunArgs) -> Result<i32> {
    let exp = a.load(true)?.expect("required");
    let sweep = exp
        .pa_sweep
        .clone()
        .ok_or_else(|| Error::Config("pa-sweep: the experiment has no [pa_sweep] section".into()))?;
    let metrics = match &exp.metrics {
        Some(m) => m.clone(),
        None if sweep.targets.is_some() => vec![Metric::Ber, Metric::Outage],
        None => vec![Metric::Ber],
    };
    prepare_out(&a.out)?;
    let mut files = Vec::new();
    for metric in metrics {
        if !a.quiet {
            eprintln!("[{metric}] pa sweep over {} values of a2", sweep.a2.len());
        }
        let rows = sweep.run(&exp, metric)?;
        let name = format!("{metric}_pa_sweep.csv");
        report::write_file(&a.out.join(&name), |w| report::write_pa_sweep(w, &rows))?;
        files.push(name);
    }
    finish("pa-sweep", a, exp.seed, files)?;
    Ok(EXIT_OK)
}

fn cmd_complexity(a: &RunArgs) -> Result<i32> {
    let exp = a.load(false)?;
    let rows = match &exp {
        Some(e) if !e.complexity.is_empty() => e.complexity.clone(),
        _ => reference_complexity_rows(),
    };
    let mut table = Vec::new();
    for r in rows {
        let (ssk, noma) = complexity_row(&r)?;
        table.push((r, ssk, noma));
    }
    println!("{:>5} {:>5} {:>5} {:>5} {:>14} {:>10}", "L", "M", "N_t", "N_r", "SSK-NOMA", "NOMA");
    for (r, ssk, noma) in &table {
        println!(
            "{:>5} {:>5} {:>5} {:>5} {:>14} {:>10}",
            r.users,
            r.m,
            r.n_t.unwrap_or(r.m),
            r.n_r,
            ssk,
            noma
        );
    }
    prepare_out(&a.out)?;
    report::write_file(&a.out.join("complexity.csv"), |w| report::write_complexity(w, &table))?;
    finish(
        "complexity",
        a,
        exp.map(|e| e.seed).unwrap_or(0),
        vec!["complexity.csv".into()],
    )?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: &RunArgs) -> Result<i32> {
    let exp = a.load(true)?.expect("required");
    let report = validate_experiment(&exp, &ValidateOptions::default(), |msg| {
        if !a.quiet {
            eprintln!("[validate] {msg}");
        }
    })?;
    for l in &report.lines {
        println!(
            "{} {:<6} {:<13} {:<7} user {:<4} {:<11} max deviation {:.3} CI",
            if l.passed() { "PASS" } else { "FAIL" },
            l.case,
            l.scheme.to_string(),
            l.metric.to_string(),
            l.user.to_string(),
            format!("{:?}", l.kind),
            l.max_ratio
        );
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
}
