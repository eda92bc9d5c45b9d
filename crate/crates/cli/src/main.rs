use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use uwbjio::harness::{
    certify_convexity, parse_algorithm, run_experiment, threads_from_env, AlgorithmKind, AlgorithmParams, Axis,
    ExperimentConfig, ExperimentKind,
};
use uwbjio::Error;

#[derive(Parser)]
#[command(name = "uwbjio", version, about = "Blind reduced-rank DS-UWB receiver simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER and SINR against symbol index.
    Convergence(RunArgs),
    /// Converged metrics against SNR in dB.
    SweepSnr(RunArgs),
    /// Converged metrics against the number of users.
    SweepUsers(RunArgs),
    /// Converged metrics against the reduced rank D.
    SweepRank(RunArgs),
    /// Converged metrics against the jammer SIR in dB.
    SweepSir(RunArgs),
    /// Blind channel and signature estimation error against symbol index.
    ChannelMse(RunArgs),
    /// Checks the constant-modulus convexity condition for E1 and v.
    CertifyConvexity(ConvexityArgs),
    /// Prints the effective configuration.
    ShowConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (key = value with [sections]).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Symbols per trial.
    #[arg(long)]
    symbols: Option<usize>,
    /// Output directory; the aggregated CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated algorithms, e.g. `rake,jio_rls:d=4`.
    #[arg(long)]
    algo: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long)]
    values: Option<String>,
    /// Worker threads (0 = automatic); overrides UWBJIO_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write per-trial raw series.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct ConvexityArgs {
    #[arg(long, default_value_t = 1.0)]
    e1: f64,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Number of users K; the interference vector has K-1 entries.
    #[arg(long, default_value_t = 7)]
    users: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn default_values(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::SnrDb => vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
        Axis::Users => vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
        Axis::Rank => (1..=8).map(f64::from).collect(),
        Axis::SirDb => vec![-20.0, -15.0, -10.0, -5.0, 0.0],
        Axis::Symbols => Vec::new(),
    }
}

fn parse_values(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Failure::Config(format!("--values: `{x}` is not a number")))
        })
        .collect()
}

fn names_itself(text: &str) -> bool {
    text.lines().any(|l| {
        let l = l.split('#').next().unwrap_or("");
        l.split_once('=').is_some_and(|(k, _)| k.trim() == "name")
    })
}

fn load(args: &RunArgs, kind: ExperimentKind, axis: Axis, name: &str) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if !names_itself(&text) {
                cfg.name = name.to_string();
            }
            cfg
        }
        None => ExperimentConfig {
            name: name.to_string(),
            ..ExperimentConfig::default()
        },
    };
    if cfg.kind != kind || cfg.axis != axis {
        cfg.values.clear();
    }
    cfg.kind = kind;
    cfg.axis = axis;
    if let Some(v) = &args.values {
        cfg.values = parse_values(v)?;
    }
    if kind == ExperimentKind::Sweep && cfg.values.is_empty() {
        cfg.values = default_values(axis);
    }
    if axis == Axis::SirDb && cfg.system.nbi.is_none() {
        cfg.system.nbi = Some(uwbjio::NbiConfig {
            sir_db: 0.0,
            f_d_mhz: uwbjio::harness::DEFAULT_NBI_FD_MHZ,
            theta: 0.0,
        });
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(n) = args.symbols {
        cfg.symbols = n;
    }
    if args.raw {
        cfg.raw = true;
    }
    if let Some(list) = &args.algo {
        let base: Vec<(AlgorithmKind, AlgorithmParams)> = AlgorithmKind::ALL
            .iter()
            .map(|&k| {
                let p = cfg
                    .algorithms
                    .iter()
                    .find(|a| a.kind == k)
                    .map(|a| a.params.clone())
                    .unwrap_or_else(|| AlgorithmParams::defaults(k));
                (k, p)
            })
            .collect();
        cfg.algorithms = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| parse_algorithm(item, &base))
            .collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs, kind: ExperimentKind, axis: Axis, name: &str) -> Result<(), Failure> {
    let cfg = load(args, kind, axis, name)?;
    let threads = match args.threads {
        Some(t) => t,
        None => threads_from_env()?,
    };
    let start = Instant::now();
    let report = run_experiment(&cfg, threads)?;
    match &args.out {
        Some(dir) => {
            let files = report
                .write(dir, &cfg.name)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        None => {
            print!("{}", report.to_csv());
            if cfg.raw {
                eprint!("{}", report.raw_to_csv());
            }
        }
    }
    eprintln!(
        "{}: {} trials x {} point(s) in {:.1} s",
        cfg.name,
        cfg.trials,
        cfg.points().len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Convergence(a) => run(a, ExperimentKind::Convergence, Axis::Symbols, "convergence"),
        Command::ChannelMse(a) => run(a, ExperimentKind::ChannelMse, Axis::Symbols, "channel_mse"),
        Command::SweepSnr(a) => run(a, ExperimentKind::Sweep, Axis::SnrDb, "sweep_snr"),
        Command::SweepUsers(a) => run(a, ExperimentKind::Sweep, Axis::Users, "sweep_users"),
        Command::SweepRank(a) => run(a, ExperimentKind::Sweep, Axis::Rank, "sweep_rank"),
        Command::SweepSir(a) => run(a, ExperimentKind::Sweep, Axis::SirDb, "sweep_sir"),
        Command::ShowConfig(a) => {
            let kind = a.config.as_ref().map_or(Ok(None), |p| {
                std::fs::read_to_string(p)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))
                    .and_then(|t| Ok(Some(ExperimentConfig::parse(&t)?)))
            })?;
            let (k, ax) = kind.map_or((ExperimentKind::Convergence, Axis::Symbols), |c| (c.kind, c.axis));
            print!("{}", load(a, k, ax, "convergence")?.to_text());
            Ok(())
        }
        Command::CertifyConvexity(a) => {
            let r = certify_convexity(a.e1, a.v, a.users, a.samples, a.seed)?;
            println!("{}", r.summary());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
