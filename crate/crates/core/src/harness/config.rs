//! Experiment configuration and its flat `key = value` text format.
//!
//! ```text
//! [experiment]
//! name = fig4
//! kind = convergence
//! trials = 50
//!
//! [algorithms]
//! list = rake, fr_rls, jio_rls, jio_rls:d=8
//!
//! [jio_rls]
//! d = 3
//! v = 0.5
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown sections or keys are
//! configuration errors.

use std::fmt::Write as _;

use crate::blind_channel::EstimatorParams;
use crate::channel::SvParams;
use crate::coding::CodeConfig;
use crate::jio_rls::DbarForm;
use crate::signal_model::{NbiConfig, SnrReference, SystemConfig};
use crate::{Error, Result};

pub const DEFAULT_NBI_FD_MHZ: f64 = 23.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Rake,
    FullRankRls,
    JioRls,
    RankAdaptiveRls,
    FullRankNsg,
    JioNsg,
}

impl AlgorithmKind {
    pub fn key(self) -> &'static str {
        match self {
            AlgorithmKind::Rake => "rake",
            AlgorithmKind::FullRankRls => "fr_rls",
            AlgorithmKind::JioRls => "jio_rls",
            AlgorithmKind::RankAdaptiveRls => "jio_rls_adaptive",
            AlgorithmKind::FullRankNsg => "fr_nsg",
            AlgorithmKind::JioNsg => "jio_nsg",
        }
    }

    pub fn from_key(s: &str) -> Result<Self> {
        Ok(match s {
            "rake" => AlgorithmKind::Rake,
            "fr_rls" => AlgorithmKind::FullRankRls,
            "jio_rls" => AlgorithmKind::JioRls,
            "jio_rls_adaptive" => AlgorithmKind::RankAdaptiveRls,
            "fr_nsg" => AlgorithmKind::FullRankNsg,
            "jio_nsg" => AlgorithmKind::JioNsg,
            other => return Err(Error::config(format!("unknown algorithm `{other}`"))),
        })
    }

    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::Rake,
        AlgorithmKind::FullRankRls,
        AlgorithmKind::JioRls,
        AlgorithmKind::RankAdaptiveRls,
        AlgorithmKind::FullRankNsg,
        AlgorithmKind::JioNsg,
    ];

    fn has_rank(self) -> bool {
        matches!(self, AlgorithmKind::JioRls | AlgorithmKind::JioNsg)
    }
}

/// Parameters of one receiver instance. Fields a receiver does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmParams {
    pub d: usize,
    pub v: f64,
    pub alpha: f64,
    pub delta: f64,
    pub dbar_form: DbarForm,
    pub mu_t0: f64,
    pub mu_w0: f64,
    pub c_max: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub lambda_d: f64,
}

impl AlgorithmParams {
    pub fn defaults(kind: AlgorithmKind) -> Self {
        let rls = AlgorithmParams {
            d: 3,
            v: 2.0,
            alpha: 0.9998,
            delta: 10.0,
            dbar_form: DbarForm::Accumulate,
            mu_t0: 0.075,
            mu_w0: 0.005,
            c_max: 3,
            d_min: 3,
            d_max: 8,
            lambda_d: 0.998,
        };
        match kind {
            AlgorithmKind::JioNsg => AlgorithmParams {
                d: 4,
                v: 2.0,
                ..rls
            },
            AlgorithmKind::FullRankNsg => AlgorithmParams {
                v: 2.0,
                mu_w0: 0.025,
                ..rls
            },
            _ => rls,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub kind: AlgorithmKind,
    pub params: AlgorithmParams,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmSpec {
            label: kind.key().to_string(),
            kind,
            params: AlgorithmParams::defaults(kind),
        }
    }

    pub fn with_rank(kind: AlgorithmKind, d: usize) -> Self {
        let mut s = Self::new(kind);
        s.params.d = d;
        s.label = format!("{}_d{d}", kind.key());
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Per-symbol BER and SINR.
    Convergence,
    /// Per-symbol channel and signature MSE.
    ChannelMse,
    /// Converged metrics at each value of the sweep axis.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Symbols,
    SnrDb,
    Users,
    Rank,
    SirDb,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Symbols => "symbols",
            Axis::SnrDb => "snr_db",
            Axis::Users => "users",
            Axis::Rank => "rank",
            Axis::SirDb => "sir_db",
        }
    }

    pub fn from_key(s: &str) -> Result<Self> {
        Ok(match s {
            "symbols" => Axis::Symbols,
            "snr_db" => Axis::SnrDb,
            "users" => Axis::Users,
            "rank" => Axis::Rank,
            "sir_db" => Axis::SirDb,
            other => return Err(Error::config(format!("unknown axis `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    BerUncoded,
    BerCoded,
    SinrDb,
    ChannelMse,
    SignatureMse,
}

impl Metric {
    pub fn key(self) -> &'static str {
        match self {
            Metric::BerUncoded => "ber_uncoded",
            Metric::BerCoded => "ber_coded",
            Metric::SinrDb => "sinr_db",
            Metric::ChannelMse => "channel_mse",
            Metric::SignatureMse => "signature_mse",
        }
    }

    pub fn from_key(s: &str) -> Result<Self> {
        Ok(match s {
            "ber_uncoded" => Metric::BerUncoded,
            "ber_coded" => Metric::BerCoded,
            "sinr_db" => Metric::SinrDb,
            "channel_mse" => Metric::ChannelMse,
            "signature_mse" => Metric::SignatureMse,
            other => return Err(Error::config(format!("unknown metric `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseReference {
    /// Rotate `p̂` so that `pᴴp̂` is real positive before the receivers use it.
    Genie,
    /// Hand the raw estimate to the receivers.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub symbols: usize,
    /// First symbol index counted in converged metrics.
    pub eval_start: usize,
    pub seed: u64,
    pub coding: bool,
    pub raw: bool,
    pub sinr_every: usize,
    pub phase_reference: PhaseReference,
    /// Metrics to report; empty selects the defaults of the experiment kind.
    pub metrics: Vec<Metric>,
    pub system: SystemConfig,
    pub channel: SvParams,
    pub estimator: EstimatorParams,
    pub code: CodeConfig,
    pub algorithms: Vec<AlgorithmSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "convergence".into(),
            kind: ExperimentKind::Convergence,
            axis: Axis::Symbols,
            values: Vec::new(),
            trials: 50,
            symbols: 1500,
            eval_start: 1000,
            seed: 1,
            coding: false,
            raw: false,
            sinr_every: 10,
            phase_reference: PhaseReference::Genie,
            metrics: Vec::new(),
            system: SystemConfig::default(),
            channel: SvParams::default(),
            estimator: EstimatorParams::default(),
            code: CodeConfig::default(),
            algorithms: [
                AlgorithmKind::Rake,
                AlgorithmKind::FullRankRls,
                AlgorithmKind::JioRls,
                AlgorithmKind::FullRankNsg,
                AlgorithmKind::JioNsg,
            ]
            .into_iter()
            .map(AlgorithmSpec::new)
            .collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trial count must be at least 1"));
        }
        if self.symbols == 0 {
            return Err(Error::config("symbol count must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms configured"));
        }
        if self.kind == ExperimentKind::Sweep {
            if self.axis == Axis::Symbols {
                return Err(Error::config("a sweep needs an axis other than `symbols`"));
            }
            if self.values.is_empty() {
                return Err(Error::config("sweep has no values"));
            }
        }
        if self.sinr_every == 0 {
            return Err(Error::config("sinr_every must be at least 1"));
        }
        if self.estimator.cadence.every == 0 {
            return Err(Error::config("refresh_every must be at least 1"));
        }
        let mut labels: Vec<&str> = self.algorithms.iter().map(|a| a.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("algorithm labels must be unique"));
        }
        self.system.validate()?;
        self.channel.validate()?;
        if self.coding || self.metrics.contains(&Metric::BerCoded) {
            if !self.coding {
                return Err(Error::config("ber_coded requested with coding off"));
            }
            self.code.validate()?;
            if self.code.punctured_len(1) > self.symbols.saturating_sub(self.eval_start) {
                return Err(Error::config("evaluation window too short for a coded frame"));
            }
        }
        for a in &self.algorithms {
            if a.kind == AlgorithmKind::RankAdaptiveRls && !(1..=a.params.d_max).contains(&a.params.d_min) {
                return Err(Error::config(format!("{}: need 1 <= d_min <= d_max", a.label)));
            }
        }
        Ok(())
    }

    /// Sweep points; a single point (the base configuration) for per-symbol experiments.
    pub fn points(&self) -> Vec<f64> {
        match self.kind {
            ExperimentKind::Sweep => self.values.clone(),
            _ => vec![f64::NAN],
        }
    }

    /// The configuration at one sweep value.
    pub fn at_point(&self, value: f64) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        if self.kind != ExperimentKind::Sweep {
            return Ok(c);
        }
        match self.axis {
            Axis::Symbols => {}
            Axis::SnrDb => c.system.snr_db = value,
            Axis::Users => {
                let k = value.round();
                if k < 1.0 || (value - k).abs() > 1e-9 {
                    return Err(Error::config(format!("user count {value} is not a positive integer")));
                }
                let e = c.system.energies.first().copied().unwrap_or(1.0);
                c.system.k = k as usize;
                c.system.energies = vec![e; k as usize];
            }
            Axis::Rank => {
                let d = value.round();
                if d < 1.0 || (value - d).abs() > 1e-9 {
                    return Err(Error::config(format!("rank {value} is not a positive integer")));
                }
                for a in &mut c.algorithms {
                    if a.kind.has_rank() {
                        a.params.d = d as usize;
                    }
                }
            }
            Axis::SirDb => {
                let theta = c.system.nbi.as_ref().map_or(0.0, |n| n.theta);
                let f = c.system.nbi.as_ref().map_or(DEFAULT_NBI_FD_MHZ, |n| n.f_d_mhz);
                c.system.nbi = Some(NbiConfig {
                    sir_db: value,
                    f_d_mhz: f,
                    theta,
                });
            }
        }
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        let mut energy: Option<f64> = None;
        let mut energies: Option<Vec<f64>> = None;
        let mut users: Option<usize> = None;
        let mut nbi_sir: Option<f64> = None;
        let mut nbi_fd = DEFAULT_NBI_FD_MHZ;
        let mut algo_list: Option<Vec<String>> = None;
        let mut per_kind: Vec<(AlgorithmKind, String, String, usize)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::config(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix('[') {
                section = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?
                    .trim()
                    .to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let f = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let u = || value.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
            let b = || match value {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(err(format!("{key}: expected a boolean"))),
            };
            match (section.as_str(), key) {
                ("experiment", "name") => cfg.name = value.to_string(),
                ("experiment", "kind") => {
                    cfg.kind = match value {
                        "convergence" => ExperimentKind::Convergence,
                        "channel-mse" | "channel_mse" => ExperimentKind::ChannelMse,
                        "sweep" => ExperimentKind::Sweep,
                        _ => return Err(err(format!("unknown experiment kind `{value}`"))),
                    }
                }
                ("experiment", "axis") => cfg.axis = Axis::from_key(value).map_err(|e| err(e.to_string()))?,
                ("experiment", "values") => cfg.values = parse_list(value).map_err(|e| err(e.to_string()))?,
                ("experiment", "trials") => cfg.trials = u()?,
                ("experiment", "symbols") => cfg.symbols = u()?,
                ("experiment", "eval_start") => cfg.eval_start = u()?,
                ("experiment", "seed") => {
                    cfg.seed = value.parse().map_err(|e| err(format!("seed: {e}")))?
                }
                ("experiment", "coding") => cfg.coding = b()?,
                ("experiment", "raw") => cfg.raw = b()?,
                ("experiment", "sinr_every") => cfg.sinr_every = u()?,
                ("experiment", "metrics") => {
                    cfg.metrics = value
                        .split(',')
                        .map(|m| Metric::from_key(m.trim()))
                        .collect::<Result<_>>()
                        .map_err(|e| err(e.to_string()))?
                }
                ("experiment", "phase_reference") => {
                    cfg.phase_reference = match value {
                        "genie" => PhaseReference::Genie,
                        "none" => PhaseReference::None,
                        _ => return Err(err(format!("unknown phase reference `{value}`"))),
                    }
                }
                ("system", "users") => users = Some(u()?),
                ("system", "ts") => cfg.system.ts = f()?,
                ("system", "tc") => cfg.system.tc = f()?,
                ("system", "ttau") => cfg.system.ttau = f()?,
                ("system", "t_ds") => cfg.system.t_ds = f()?,
                ("system", "snr_db") => cfg.system.snr_db = f()?,
                ("system", "energy") => energy = Some(f()?),
                ("system", "energies") => energies = Some(parse_list(value).map_err(|e| err(e.to_string()))?),
                ("system", "rolloff") => cfg.system.rolloff = f()?,
                ("system", "snr_ref") => {
                    cfg.system.snr_ref = match value {
                        "signature" => SnrReference::Signature,
                        "per_sample" => SnrReference::PerSample,
                        _ => return Err(err(format!("unknown snr_ref `{value}`"))),
                    }
                }
                ("system", "nbi_sir_db") => nbi_sir = Some(f()?),
                ("system", "nbi_fd_mhz") => nbi_fd = f()?,
                ("channel", "clusters") => cfg.channel.clusters = u()?,
                ("channel", "rays") => cfg.channel.rays = u()?,
                ("channel", "cluster_rate") => cfg.channel.cluster_rate = f()?,
                ("channel", "ray_rate") => cfg.channel.ray_rate = f()?,
                ("channel", "cluster_decay") => cfg.channel.cluster_decay = f()?,
                ("channel", "ray_decay") => cfg.channel.ray_decay = f()?,
                ("estimator", "alpha") => cfg.estimator.alpha = f()?,
                ("estimator", "delta") => cfg.estimator.delta = f()?,
                ("estimator", "m") => cfg.estimator.m = u()? as u32,
                ("estimator", "lambda_v") => cfg.estimator.lambda_v = f()?,
                ("estimator", "mu_v_scale") => cfg.estimator.mu_scale = f()?,
                ("estimator", "dense_until") => cfg.estimator.cadence.dense_until = u()?,
                ("estimator", "refresh_every") => cfg.estimator.cadence.every = u()?,
                ("estimator", "catch_up") => cfg.estimator.cadence.catch_up = b()?,
                ("code", "generators") => {
                    cfg.code.generators = CodeConfig::parse_generators(value).map_err(|e| err(e.to_string()))?
                }
                ("code", "constraint_length") => cfg.code.constraint_length = u()?,
                ("code", "puncture") => cfg.code.puncture = parse_puncture(value).map_err(|e| err(e.to_string()))?,
                ("algorithms", "list") => {
                    algo_list = Some(value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                }
                (sec, k) => {
                    let kind = AlgorithmKind::from_key(sec)
                        .map_err(|_| err(format!("unknown key `{k}` in section [{sec}]")))?;
                    per_kind.push((kind, k.to_string(), value.to_string(), lineno + 1));
                }
            }
        }

        if let Some(k) = users {
            cfg.system.k = k;
            cfg.system.energies = vec![energy.unwrap_or(1.0); k];
        } else if let Some(e) = energy {
            cfg.system.energies = vec![e; cfg.system.k];
        }
        if let Some(list) = energies {
            cfg.system.energies = list;
        }
        if let Some(sir) = nbi_sir {
            cfg.system.nbi = Some(NbiConfig {
                sir_db: sir,
                f_d_mhz: nbi_fd,
                theta: 0.0,
            });
        }

        let mut base: Vec<(AlgorithmKind, AlgorithmParams)> = AlgorithmKind::ALL
            .iter()
            .map(|&k| (k, AlgorithmParams::defaults(k)))
            .collect();
        for (kind, key, value, line) in per_kind {
            let p = &mut base.iter_mut().find(|(k, _)| *k == kind).expect("all kinds").1;
            set_param(p, &key, &value).map_err(|e| Error::config(format!("line {line}: {e}")))?;
        }
        if let Some(list) = algo_list {
            cfg.algorithms = list
                .iter()
                .map(|item| parse_algorithm(item, &base))
                .collect::<Result<_>>()?;
        } else {
            for a in &mut cfg.algorithms {
                a.params = base.iter().find(|(k, _)| *k == a.kind).expect("all kinds").1.clone();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Writes the configuration back in the parseable format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = match self.kind {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::ChannelMse => "channel-mse",
            ExperimentKind::Sweep => "sweep",
        };
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "kind = {kind}");
        let _ = writeln!(s, "axis = {}", self.axis.key());
        if !self.values.is_empty() {
            let _ = writeln!(s, "values = {}", list(&self.values));
        }
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "symbols = {}", self.symbols);
        let _ = writeln!(s, "eval_start = {}", self.eval_start);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "coding = {}", self.coding);
        let _ = writeln!(s, "raw = {}", self.raw);
        let _ = writeln!(s, "sinr_every = {}", self.sinr_every);
        let _ = writeln!(
            s,
            "phase_reference = {}",
            match self.phase_reference {
                PhaseReference::Genie => "genie",
                PhaseReference::None => "none",
            }
        );
        if !self.metrics.is_empty() {
            let m: Vec<&str> = self.metrics.iter().map(|m| m.key()).collect();
            let _ = writeln!(s, "metrics = {}", m.join(","));
        }
        let sys = &self.system;
        let _ = writeln!(s, "\n[system]");
        let _ = writeln!(s, "users = {}", sys.k);
        let _ = writeln!(s, "ts = {}\ntc = {}\nttau = {}\nt_ds = {}", sys.ts, sys.tc, sys.ttau, sys.t_ds);
        let _ = writeln!(s, "snr_db = {}", sys.snr_db);
        let _ = writeln!(s, "energies = {}", list(&sys.energies));
        let _ = writeln!(s, "rolloff = {}", sys.rolloff);
        let _ = writeln!(
            s,
            "snr_ref = {}",
            match sys.snr_ref {
                SnrReference::Signature => "signature",
                SnrReference::PerSample => "per_sample",
            }
        );
        if let Some(n) = &sys.nbi {
            let _ = writeln!(s, "nbi_sir_db = {}\nnbi_fd_mhz = {}", n.sir_db, n.f_d_mhz);
        }
        let ch = &self.channel;
        let _ = writeln!(s, "\n[channel]");
        let _ = writeln!(
            s,
            "clusters = {}\nrays = {}\ncluster_rate = {}\nray_rate = {}\ncluster_decay = {}\nray_decay = {}",
            ch.clusters, ch.rays, ch.cluster_rate, ch.ray_rate, ch.cluster_decay, ch.ray_decay
        );
        let e = &self.estimator;
        let _ = writeln!(s, "\n[estimator]");
        let _ = writeln!(
            s,
            "alpha = {}\ndelta = {}\nm = {}\nlambda_v = {}\nmu_v_scale = {}\ndense_until = {}\nrefresh_every = {}\ncatch_up = {}",
            e.alpha, e.delta, e.m, e.lambda_v, e.mu_scale, e.cadence.dense_until, e.cadence.every, e.cadence.catch_up
        );
        let c = &self.code;
        let _ = writeln!(s, "\n[code]");
        let gens: Vec<String> = c.generators.iter().map(|g| format!("{g:o}")).collect();
        let _ = writeln!(s, "generators = {}", gens.join(","));
        let _ = writeln!(s, "constraint_length = {}", c.constraint_length);
        let punct: Vec<String> = c
            .puncture
            .iter()
            .map(|row| row.iter().map(|b| b.to_string()).collect())
            .collect();
        let _ = writeln!(s, "puncture = {}", punct.join(","));
        let _ = writeln!(s, "\n[algorithms]");
        let items: Vec<String> = self.algorithms.iter().map(algorithm_item).collect();
        let _ = writeln!(s, "list = {}", items.join(", "));
        s
    }
}

fn algorithm_item(a: &AlgorithmSpec) -> String {
    let d = AlgorithmParams::defaults(a.kind);
    let p = &a.params;
    let mut opts = Vec::new();
    let mut push = |name: &str, differs: bool, val: String| {
        if differs {
            opts.push(format!("{name}={val}"));
        }
    };
    push("d", p.d != d.d, p.d.to_string());
    push("v", p.v != d.v, p.v.to_string());
    push("alpha", p.alpha != d.alpha, p.alpha.to_string());
    push("delta", p.delta != d.delta, p.delta.to_string());
    push(
        "dbar_form",
        p.dbar_form != d.dbar_form,
        match p.dbar_form {
            DbarForm::Accumulate => "accumulate".into(),
            DbarForm::Forget => "forget".into(),
        },
    );
    push("mu_t0", p.mu_t0 != d.mu_t0, p.mu_t0.to_string());
    push("mu_w0", p.mu_w0 != d.mu_w0, p.mu_w0.to_string());
    push("c_max", p.c_max != d.c_max, p.c_max.to_string());
    push("d_min", p.d_min != d.d_min, p.d_min.to_string());
    push("d_max", p.d_max != d.d_max, p.d_max.to_string());
    push("lambda_d", p.lambda_d != d.lambda_d, p.lambda_d.to_string());
    let mut item = a.kind.key().to_string();
    for o in &opts {
        item.push(':');
        item.push_str(o);
    }
    if a.label != default_label(a.kind, &opts) {
        item.push_str(":label=");
        item.push_str(&a.label);
    }
    item
}

fn default_label(kind: AlgorithmKind, opts: &[String]) -> String {
    let mut label = kind.key().to_string();
    for o in opts {
        if let Some(d) = o.strip_prefix("d=") {
            label.push_str("_d");
            label.push_str(d);
        }
    }
    label
}

fn set_param(p: &mut AlgorithmParams, key: &str, value: &str) -> Result<()> {
    let f = || value.parse::<f64>().map_err(|e| Error::config(format!("{key}: {e}")));
    let u = || value.parse::<usize>().map_err(|e| Error::config(format!("{key}: {e}")));
    match key {
        "d" => p.d = u()?,
        "v" => p.v = f()?,
        "alpha" => p.alpha = f()?,
        "delta" => p.delta = f()?,
        "dbar_form" => {
            p.dbar_form = match value {
                "accumulate" => DbarForm::Accumulate,
                "forget" => DbarForm::Forget,
                _ => return Err(Error::config(format!("unknown dbar_form `{value}`"))),
            }
        }
        "mu_t0" => p.mu_t0 = f()?,
        "mu_w0" => p.mu_w0 = f()?,
        "c_max" => p.c_max = u()?,
        "d_min" => p.d_min = u()?,
        "d_max" => p.d_max = u()?,
        "lambda_d" => p.lambda_d = f()?,
        _ => return Err(Error::config(format!("unknown algorithm parameter `{key}`"))),
    }
    Ok(())
}

/// `kind[:key=value]*`, e.g. `jio_rls:d=8` or `jio_nsg:v=2:label=nsg_v2`.
pub fn parse_algorithm(item: &str, base: &[(AlgorithmKind, AlgorithmParams)]) -> Result<AlgorithmSpec> {
    let mut parts = item.split(':');
    let kind = AlgorithmKind::from_key(parts.next().unwrap_or("").trim())?;
    let mut params = base
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|(_, p)| p.clone())
        .unwrap_or_else(|| AlgorithmParams::defaults(kind));
    let mut label = None;
    let mut opts = Vec::new();
    for opt in parts {
        let (k, v) = opt
            .split_once('=')
            .ok_or_else(|| Error::config(format!("`{opt}` in `{item}` is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "label" {
            label = Some(v.to_string());
        } else {
            set_param(&mut params, k, v)?;
            opts.push(format!("{k}={v}"));
        }
    }
    Ok(AlgorithmSpec {
        label: label.unwrap_or_else(|| default_label(kind, &opts)),
        kind,
        params,
    })
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::config(format!("`{x}`: {e}")))
        })
        .collect()
}

/// `11,10,00`: one row per generator, one digit per step of the period.
fn parse_puncture(s: &str) -> Result<Vec<Vec<u8>>> {
    s.split(',')
        .map(|row| {
            row.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::config(format!("puncture digit `{c}`"))),
                })
                .collect()
        })
        .collect()
}
