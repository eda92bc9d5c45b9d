//! Trial fan-out, aggregation and CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Metric};
use super::trial::{run_trial, trial_rng, AlgorithmTrace, Fault, TrialResult};
use crate::analysis::hessian_min_eigenvalue;
use crate::linalg::{CVec, C64};
use crate::{Error, Result};

pub const AGGREGATE_HEADER: &str = "experiment,algorithm,axis,axis_value,metric,value,trials,symbols";
pub const RAW_HEADER: &str = "experiment,algorithm,trial,symbol_index,metric,value";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub algorithm: String,
    pub axis: &'static str,
    pub axis_value: f64,
    pub metric: &'static str,
    pub value: f64,
    pub trials: usize,
    pub symbols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub experiment: String,
    pub algorithm: String,
    pub trial: usize,
    pub symbol_index: usize,
    pub metric: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub raw: Vec<RawRow>,
    /// Stream digest of every trial, point-major.
    pub digests: Vec<[u8; 32]>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(AGGREGATE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.experiment, r.algorithm, r.axis, r.axis_value, r.metric, r.value, r.trials, r.symbols
            );
        }
        s
    }

    pub fn raw_to_csv(&self) -> String {
        let mut s = String::with_capacity(48 * (self.raw.len() + 1));
        s.push_str(RAW_HEADER);
        s.push('\n');
        for r in &self.raw {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.experiment, r.algorithm, r.trial, r.symbol_index, r.metric, r.value
            );
        }
        s
    }

    /// Writes `<name>.csv` (and `<name>_raw.csv` when raw rows exist) into `dir`.
    pub fn write(&self, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = vec![dir.join(format!("{name}.csv"))];
        fs::write(&out[0], self.to_csv())?;
        if !self.raw.is_empty() {
            let p = dir.join(format!("{name}_raw.csv"));
            fs::write(&p, self.raw_to_csv())?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Worker count from `UWBJIO_THREADS` (0 or unset means automatic).
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("UWBJIO_THREADS") {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("UWBJIO_THREADS=`{v}` is not a count"))),
    }
}

/// Runs every trial at every sweep point on `threads` workers (0 = automatic)
/// and aggregates the means.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Report> {
    run_experiment_with(cfg, threads, None)
}

#[doc(hidden)]
pub fn run_experiment_with(cfg: &ExperimentConfig, threads: usize, fault: Option<(usize, Fault)>) -> Result<Report> {
    cfg.validate()?;
    let points = cfg.points();
    let resolved = points
        .iter()
        .map(|&v| {
            let c = cfg.at_point(v)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, t)| {
                let f = fault.and_then(|(ft, f)| (ft == t).then_some(f));
                run_trial(&resolved[p], t, f)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut report = Report {
        digests: results.iter().map(|r| r.stream_digest).collect(),
        ..Report::default()
    };
    for (p, &value) in points.iter().enumerate() {
        let trials = &results[p * cfg.trials..(p + 1) * cfg.trials];
        aggregate_point(cfg, value, trials, &mut report);
    }
    Ok(report)
}

fn metrics_for(cfg: &ExperimentConfig) -> Vec<Metric> {
    if !cfg.metrics.is_empty() {
        return cfg.metrics.clone();
    }
    match cfg.kind {
        ExperimentKind::Convergence => vec![Metric::BerUncoded, Metric::SinrDb],
        ExperimentKind::ChannelMse => vec![Metric::ChannelMse, Metric::SignatureMse],
        ExperimentKind::Sweep => {
            let mut m = vec![Metric::BerUncoded, Metric::SinrDb];
            if cfg.coding {
                m.push(Metric::BerCoded);
            }
            m
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (if n == 0 { f64::NAN } else { s / n as f64 }, n)
}

fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Per-symbol series of a metric, with the symbol index of each entry.
fn series(t: &AlgorithmTrace, metric: Metric, every: usize) -> Vec<(usize, f64)> {
    match metric {
        Metric::BerUncoded => t.errors.iter().copied().enumerate().collect(),
        Metric::SinrDb => t.sinr.iter().enumerate().map(|(j, &s)| (j * every, s)).collect(),
        Metric::ChannelMse => t.channel_mse.iter().copied().enumerate().collect(),
        Metric::SignatureMse => t.signature_mse.iter().copied().enumerate().collect(),
        Metric::BerCoded => Vec::new(),
    }
}

/// Converged per-trial value of a metric.
fn point_value(t: &AlgorithmTrace, metric: Metric) -> f64 {
    match metric {
        Metric::BerUncoded => t.ber_uncoded,
        Metric::BerCoded => t.ber_coded.unwrap_or(f64::NAN),
        Metric::SinrDb => t.sinr_converged,
        Metric::ChannelMse => t.channel_mse.last().copied().unwrap_or(f64::NAN),
        Metric::SignatureMse => t.signature_mse.last().copied().unwrap_or(f64::NAN),
    }
}

fn aggregate_point(cfg: &ExperimentConfig, value: f64, trials: &[TrialResult], report: &mut Report) {
    let metrics = metrics_for(cfg);
    let per_symbol = cfg.kind != ExperimentKind::Sweep;
    let axis = cfg.axis.key();
    let raw_name = if per_symbol {
        cfg.name.clone()
    } else {
        format!("{}@{}={}", cfg.name, axis, value)
    };
    for (a, spec) in cfg.algorithms.iter().enumerate() {
        let valid: Vec<&AlgorithmTrace> = trials
            .iter()
            .map(|t| &t.algorithms[a])
            .filter(|t| !t.diverged)
            .collect();
        let diverged = trials.len() - valid.len();
        let row = |metric: Metric, axis_value: f64, v: f64| Row {
            experiment: cfg.name.clone(),
            algorithm: spec.label.clone(),
            axis,
            axis_value,
            metric: metric.key(),
            value: v,
            trials: valid.len(),
            symbols: cfg.symbols,
        };
        for &metric in &metrics {
            if per_symbol {
                if valid.is_empty() {
                    continue;
                }
                let s: Vec<Vec<(usize, f64)>> = valid.iter().map(|t| series(t, metric, cfg.sinr_every)).collect();
                for j in 0..s[0].len() {
                    let (m, _) = mean(s.iter().map(|x| x[j].1));
                    let v = if metric == Metric::SinrDb { to_db(m) } else { m };
                    report.rows.push(row(metric, s[0][j].0 as f64, v));
                }
            } else {
                let (m, _) = mean(valid.iter().map(|t| point_value(t, metric)));
                let v = if metric == Metric::SinrDb { to_db(m) } else { m };
                report.rows.push(row(metric, value, v));
            }
        }
        if diverged > 0 {
            report.rows.push(Row {
                metric: "diverged_trials",
                value: diverged as f64,
                ..row(Metric::BerUncoded, if per_symbol { f64::NAN } else { value }, 0.0)
            });
        }
        if cfg.raw {
            for t in trials {
                let tr = &t.algorithms[a];
                let raw = |symbol_index: usize, metric: &'static str, value: f64| RawRow {
                    experiment: raw_name.clone(),
                    algorithm: spec.label.clone(),
                    trial: t.trial,
                    symbol_index,
                    metric,
                    value,
                };
                if tr.diverged {
                    report.raw.push(raw(cfg.symbols, "diverged", 1.0));
                    continue;
                }
                for &metric in &metrics {
                    if per_symbol {
                        for (i, v) in series(tr, metric, cfg.sinr_every) {
                            let v = if metric == Metric::SinrDb { to_db(v) } else { v };
                            report.raw.push(raw(i, metric.key(), v));
                        }
                    } else {
                        let v = point_value(tr, metric);
                        let v = if metric == Metric::SinrDb { to_db(v) } else { v };
                        report.raw.push(raw(cfg.symbols, metric.key(), v));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub e1: f64,
    pub v: f64,
    pub e1v2: f64,
    /// Smallest Hessian eigenvalue seen over the sampled `ε̃`.
    pub min_eigenvalue: f64,
    pub samples: usize,
}

impl ConvexityReport {
    /// Whether the sufficient condition `E₁v² > 1` holds.
    pub fn certified(&self) -> bool {
        self.e1v2 > 1.0
    }

    pub fn summary(&self) -> String {
        let regime = if self.certified() {
            format!("E1*v^2 = {} > 1, convex regime", self.e1v2)
        } else {
            format!("E1*v^2 = {} <= 1, non-convex regime", self.e1v2)
        };
        format!(
            "{regime}; min Hessian eigenvalue over {} random interference vectors: {}",
            self.samples, self.min_eigenvalue
        )
    }
}

/// Evaluates the Hessian certificate for `samples` random `ε̃` of length `k − 1`.
pub fn certify_convexity(e1: f64, v: f64, k: usize, samples: usize, seed: u64) -> Result<ConvexityReport> {
    if !(e1 > 0.0) || !v.is_finite() {
        return Err(Error::config("need E1 > 0 and a finite v"));
    }
    let n = k.saturating_sub(1);
    let mut rng = trial_rng(seed, 0, "convexity", 0);
    let mut min_eig = f64::INFINITY;
    for _ in 0..samples.max(1) {
        let eps = CVec::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im) * 0.5f64.sqrt()
        });
        min_eig = min_eig.min(hessian_min_eigenvalue(&eps, e1, v));
    }
    Ok(ConvexityReport {
        e1,
        v,
        e1v2: e1 * v * v,
        min_eigenvalue: min_eig,
        samples: samples.max(1),
    })
}
