//! Command-line front end.
//!
//! Every command reads a JSON configuration and writes a JSON report (or,
//! for `sample`, JSON lines) to `--out` or standard output. Reports carry
//! the seed and are byte-identical across runs with the same inputs.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{CountingQuerySet, DEFAULT_ENUMERATION_LIMIT};
use crate::divergence::{
    divergence_discrete, divergence_laplace_pair, divergence_monte_carlo, divergence_monte_carlo_real,
    DivergenceResult,
};
use crate::error::{DpError, Result};
use crate::mechanisms::check::{check_dp_exact, check_dp_laplace, check_dp_statistical};
use crate::mechanisms::events::{discrete_events, REAL_GRID_CELLS};
use crate::mechanisms::{BudgetTree, Mechanism, PrivacyBudget, StatisticalConfig, Verdict};
use crate::rng::RandomSource;
use crate::rnm::{verify_rnm_dp_finer_with, RnmTable};

use config::{
    build_mechanism, load_json, AuditConfig, Built, DistributionSpec, DivergenceConfig, RnmVerifyConfig,
    SampleConfig,
};

/// Process exit codes. Each verdict maps to exactly one code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Violation = 1,
    ConfigError = 2,
    Inconclusive = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Parser)]
#[command(name = "dpkit", version, about = "Differential privacy mechanisms, divergences and audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw mechanism outputs as JSON lines.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hockey-stick divergence between two distributions.
    Divergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a mechanism against a privacy budget over adjacent pairs.
    Audit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive report-noisy-max ratio verification over small query sets.
    RnmVerify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        max_entry: Option<u64>,
        #[arg(long)]
        max_m: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Include every (pair, output) cell in the report.
        #[arg(long)]
        cells: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fold a composition tree of privacy budgets.
    Accountant {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => ExitStatus::ConfigError.code(),
            }
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError.code()
        }
    }
}

fn dispatch(command: Command) -> Result<ExitStatus> {
    match command {
        Command::Sample {
            config,
            samples,
            seed,
            out,
        } => cmd_sample(&config, samples, seed, out.as_deref()),
        Command::Divergence {
            config,
            method,
            samples,
            alpha,
            tol,
            seed,
            out,
        } => cmd_divergence(&config, method, samples, alpha, tol, seed, out.as_deref()),
        Command::Audit {
            config,
            method,
            samples,
            alpha,
            tol,
            seed,
            out,
        } => {
            let stat = StatisticalConfig {
                samples,
                alpha,
                ..Default::default()
            };
            cmd_audit(&config, method, stat, tol, seed, out.as_deref())
        }
        Command::RnmVerify {
            config,
            n,
            max_entry,
            max_m,
            epsilon,
            tol,
            cells,
            out,
        } => {
            let mut cfg: RnmVerifyConfig = match config {
                Some(p) => load_json(&p)?,
                None => RnmVerifyConfig::default(),
            };
            cfg.n = n.unwrap_or(cfg.n);
            cfg.max_entry = max_entry.unwrap_or(cfg.max_entry);
            cfg.max_m = max_m.unwrap_or(cfg.max_m);
            cfg.epsilon = epsilon.unwrap_or(cfg.epsilon);
            cfg.tol = tol.unwrap_or(cfg.tol);
            cmd_rnm_verify(&cfg, cells, out.as_deref())
        }
        Command::Accountant { config, out } => cmd_accountant(&config, out.as_deref()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| DpError::Validation(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| DpError::Validation(format!("stdout: {e}")))
        }
    }
}

fn emit_report(out: Option<&Path>, report: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| DpError::Validation(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Draws `samples` outputs of the configured mechanism on one dataset.
pub fn cmd_sample(config: &Path, samples: usize, seed: u64, out: Option<&Path>) -> Result<ExitStatus> {
    let cfg: SampleConfig = load_json(config)?;
    let dataset = cfg.dataset.resolve(config)?;
    let built = build_mechanism(&cfg.mechanism)?;
    if let Some(n) = built.input_dim() {
        if n != dataset.len() {
            return Err(DpError::Dimension {
                expected: n,
                actual: dataset.len(),
            });
        }
    }
    let mut rng = RandomSource::new(seed);
    let mut text = serde_json::to_string(&json!({
        "seed": seed,
        "samples": samples,
        "mechanism": cfg.mechanism.kind(),
    }))
    .expect("header serializes");
    text.push('\n');
    for _ in 0..samples {
        let value = match &built {
            Built::Laplace(m) => to_value(&m.sample(&dataset, &mut rng)?),
            Built::Discrete(m) => {
                let v = m.sample(&dataset, &mut rng)?;
                if v.len() == 1 {
                    json!(v[0])
                } else {
                    to_value(&v)
                }
            }
        };
        text.push_str(&value.to_string());
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(ExitStatus::Pass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Access {
    Table,
    Density,
    Sampler,
}

fn access(spec: &DistributionSpec) -> Access {
    match spec {
        DistributionSpec::Discrete { .. } => Access::Table,
        DistributionSpec::Laplace { .. } => Access::Density,
        DistributionSpec::Sampler { .. } => Access::Sampler,
    }
}

/// Computes `Δ^ε(μ, ν)`, choosing exact tables over quadrature over Monte
/// Carlo unless `method` forces one.
pub fn cmd_divergence(
    config: &Path,
    method: Option<MethodArg>,
    samples: usize,
    alpha: f64,
    tol: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitStatus> {
    let cfg: DivergenceConfig = load_json(config)?;
    let result = divergence_from_config(&cfg, method, samples, alpha, tol, seed)?;
    emit_report(
        out,
        &json!({
            "command": "divergence",
            "seed": seed,
            "result": to_value(&result),
        }),
    )?;
    Ok(ExitStatus::Pass)
}

pub fn divergence_from_config(
    cfg: &DivergenceConfig,
    method: Option<MethodArg>,
    samples: usize,
    alpha: f64,
    tol: f64,
    seed: u64,
) -> Result<DivergenceResult> {
    let eps = cfg.epsilon;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(DpError::Parameter(format!("epsilon must be finite and >= 0, got {eps}")));
    }
    let (mu, nu) = (cfg.mu.underlying()?, cfg.nu.underlying()?);
    let real = |s: &DistributionSpec| matches!(s, DistributionSpec::Laplace { .. });
    if real(mu) != real(nu) {
        return Err(DpError::Validation(
            "incompatible distribution specs: one is over labels, the other over reals".into(),
        ));
    }
    let (a, b) = (access(&cfg.mu), access(&cfg.nu));
    let auto = if a == Access::Table && b == Access::Table {
        MethodArg::Exact
    } else if a == Access::Density && b == Access::Density && same_scale(mu, nu) {
        MethodArg::Quadrature
    } else {
        MethodArg::MonteCarlo
    };
    let chosen = method.unwrap_or(auto);
    let unavailable = |m: &str| DpError::Unsupported(format!("method {m} is not available for these specs"));
    match chosen {
        MethodArg::Exact => {
            if auto != MethodArg::Exact {
                return Err(unavailable("exact"));
            }
            Ok(divergence_discrete(&mu.table()?, &nu.table()?, eps))
        }
        MethodArg::Quadrature => {
            if auto != MethodArg::Quadrature {
                return Err(unavailable("quadrature"));
            }
            let (lm, ln) = (mu.laplace()?, nu.laplace()?);
            divergence_laplace_pair(lm.scale, lm.location, ln.location, eps, tol)
        }
        MethodArg::MonteCarlo => {
            let mut rng = RandomSource::new(seed);
            if real(mu) {
                let (lm, ln) = (mu.laplace()?, nu.laplace()?);
                let pilot = (samples / 10).max(1000);
                let (est, _) = divergence_monte_carlo_real(
                    |r| lm.sample(r),
                    |r| ln.sample(r),
                    eps,
                    samples,
                    alpha,
                    REAL_GRID_CELLS,
                    pilot,
                    &mut rng,
                )?;
                Ok(est.to_result())
            } else {
                let (tm, tn) = (mu.table()?, nu.table()?);
                let labels: Vec<String> = tm.support().chain(tn.support()).cloned().collect();
                let events = discrete_events(&labels);
                let preds: Vec<_> = events.iter().map(|e| move |x: &String| e.contains(x)).collect();
                divergence_monte_carlo(|r| tm.sample(r), |r| tn.sample(r), &preds, eps, samples, alpha, &mut rng)
            }
        }
    }
}

fn same_scale(mu: &DistributionSpec, nu: &DistributionSpec) -> bool {
    match (mu.laplace(), nu.laplace()) {
        (Ok(a), Ok(b)) => a.scale == b.scale,
        _ => false,
    }
}

/// Audits a mechanism over the configured adjacent pairs.
pub fn cmd_audit(
    config: &Path,
    method: Option<MethodArg>,
    stat: StatisticalConfig,
    tol: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitStatus> {
    let cfg: AuditConfig = load_json(config)?;
    let (status, report) = audit_from_config(&cfg, config, method, stat, tol, seed)?;
    emit_report(out, &report)?;
    Ok(status)
}

pub fn audit_from_config(
    cfg: &AuditConfig,
    config_path: &Path,
    method: Option<MethodArg>,
    stat: StatisticalConfig,
    tol: f64,
    seed: u64,
) -> Result<(ExitStatus, Value)> {
    let budget = PrivacyBudget::new(cfg.budget.epsilon, cfg.budget.delta)?;
    let built = build_mechanism(&cfg.mechanism)?;
    let pairs = cfg.pairs(config_path, built.input_dim())?;
    let rng = RandomSource::new(seed);
    let statistical = |audit: Value, verdict: Verdict| {
        let status = match verdict {
            Verdict::NoViolationFound => ExitStatus::Pass,
            Verdict::Violation => ExitStatus::Violation,
            Verdict::Inconclusive => ExitStatus::Inconclusive,
        };
        (status, audit)
    };
    let exact = |pass: bool, result: Value| {
        if pass {
            (ExitStatus::Pass, result)
        } else {
            (ExitStatus::Violation, result)
        }
    };
    let (status, result, method_name, verdict) = match (&built, method) {
        (Built::Discrete(m), None | Some(MethodArg::Exact)) => {
            let r = check_dp_exact(m, &pairs, &budget)?;
            let (s, v) = exact(r.pass, to_value(&r));
            (s, v, "exact-discrete", if r.pass { "pass" } else { "violation" })
        }
        (Built::Laplace(m), None | Some(MethodArg::Quadrature)) => {
            let r = check_dp_laplace(m, &pairs, &budget, tol)?;
            let (s, v) = exact(r.pass, to_value(&r));
            (s, v, "quadrature", if r.pass { "pass" } else { "violation" })
        }
        (Built::Discrete(m), Some(MethodArg::MonteCarlo)) => {
            let r = check_dp_statistical(m, &pairs, &budget, &stat, &rng)?;
            let (s, v) = statistical(to_value(&r), r.verdict);
            (s, v, "monte-carlo", verdict_name(r.verdict))
        }
        (Built::Laplace(m), Some(MethodArg::MonteCarlo)) => {
            let r = check_dp_statistical(m, &pairs, &budget, &stat, &rng)?;
            let (s, v) = statistical(to_value(&r), r.verdict);
            (s, v, "monte-carlo", verdict_name(r.verdict))
        }
        (Built::Discrete(_), Some(MethodArg::Quadrature)) => {
            return Err(DpError::Unsupported("quadrature audit needs a Laplace mechanism".into()))
        }
        (Built::Laplace(_), Some(MethodArg::Exact)) => {
            return Err(DpError::Unsupported(
                "exact audit needs a mechanism with finite outputs".into(),
            ))
        }
    };
    let report = json!({
        "command": "audit",
        "seed": seed,
        "method": method_name,
        "mechanism": cfg.mechanism.kind(),
        "verdict": verdict,
        "result": result,
    });
    Ok((status, report))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::NoViolationFound => "no-violation-found",
        Verdict::Violation => "violation",
        Verdict::Inconclusive => "inconclusive",
    }
}

#[derive(Debug, Clone, Serialize)]
struct RnmInstance {
    queries: Vec<Vec<usize>>,
    m: usize,
    max_ratio: f64,
    finer_bound: f64,
    naive_bound: f64,
    unstable_cells: usize,
    dichotomy_holds: bool,
    pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    cells: Vec<crate::rnm::RnmCell>,
}

/// Every multiset of `1..=max_m` nonempty predicates over `n` types.
pub fn query_multisets(n: usize, max_m: usize, limit: u128) -> Result<Vec<CountingQuerySet>> {
    if n == 0 || n >= 16 {
        return Err(DpError::Parameter(format!("number of types must be in 1..16, got {n}")));
    }
    let predicates: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|k| mask & (1 << k) != 0).collect())
        .collect();
    // multisets of size m from p kinds: C(p + m - 1, m)
    let p = predicates.len() as u128;
    let mut total: u128 = 0;
    for m in 1..=max_m as u128 {
        let mut c: u128 = 1;
        for j in 0..m {
            c = c * (p + j) / (j + 1);
        }
        total += c;
    }
    if total > limit {
        return Err(DpError::Capacity { required: total, limit });
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        max_m: usize,
        n: usize,
        predicates: &[Vec<usize>],
        stack: &mut Vec<usize>,
        out: &mut Vec<CountingQuerySet>,
    ) -> Result<()> {
        if !stack.is_empty() {
            let preds = stack.iter().map(|&k| predicates[k].clone()).collect();
            out.push(CountingQuerySet::new(n, preds)?);
        }
        if stack.len() == max_m {
            return Ok(());
        }
        for k in start..predicates.len() {
            stack.push(k);
            rec(k, max_m, n, predicates, stack, out)?;
            stack.pop();
        }
        Ok(())
    }
    rec(0, max_m, n, &predicates, &mut stack, &mut out)?;
    Ok(out)
}

pub fn cmd_rnm_verify(cfg: &RnmVerifyConfig, cells: bool, out: Option<&Path>) -> Result<ExitStatus> {
    let (status, report) = rnm_verify_report(cfg, cells)?;
    emit_report(out, &report)?;
    Ok(status)
}

pub fn rnm_verify_report(cfg: &RnmVerifyConfig, cells: bool) -> Result<(ExitStatus, Value)> {
    let mut table = RnmTable::new(cfg.epsilon, cfg.tol)?;
    let sets = match &cfg.query_sets {
        Some(sets) => sets.clone(),
        None => query_multisets(cfg.n, cfg.max_m, DEFAULT_ENUMERATION_LIMIT)?,
    };
    let mut instances = Vec::with_capacity(sets.len());
    let mut max_ratio: f64 = 1.0;
    let mut pass = true;
    let mut unstable = 0;
    for q in &sets {
        let r = verify_rnm_dp_finer_with(&mut table, q, cfg.max_entry, DEFAULT_ENUMERATION_LIMIT, cells)?;
        max_ratio = max_ratio.max(r.max_ratio);
        pass &= r.pass;
        unstable += r.unstable_cells;
        instances.push(RnmInstance {
            queries: (0..q.m()).map(|i| q.predicate(i)).collect(),
            m: r.m,
            max_ratio: r.max_ratio,
            finer_bound: r.finer_bound,
            naive_bound: r.naive_bound,
            unstable_cells: r.unstable_cells,
            dichotomy_holds: r.dichotomy_holds,
            pass: r.pass,
            cells: r.cells,
        });
    }
    let max_m = sets.iter().map(|q| q.m()).max().unwrap_or(0);
    let report = json!({
        "command": "rnm-verify",
        "epsilon": cfg.epsilon,
        "n": cfg.n,
        "max_entry": cfg.max_entry,
        "max_m": max_m,
        "tol": cfg.tol,
        "finer_bound": cfg.epsilon.exp(),
        "naive_bound": (max_m as f64 * cfg.epsilon).exp(),
        "max_ratio": max_ratio,
        "instances_checked": instances.len(),
        "score_patterns": table.len(),
        "unstable_cells": unstable,
        "pass": pass,
        "instances": to_value(&instances),
    });
    let status = if pass { ExitStatus::Pass } else { ExitStatus::Violation };
    Ok((status, report))
}

pub fn cmd_accountant(config: &Path, out: Option<&Path>) -> Result<ExitStatus> {
    let tree: BudgetTree = load_json(config)?;
    let total = tree.total()?;
    emit_report(
        out,
        &json!({
            "command": "accountant",
            "total": to_value(&total),
        }),
    )?;
    Ok(ExitStatus::Pass)
}
