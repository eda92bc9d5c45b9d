//! One Monte Carlo trial: draw codes, channels and data, then run every
//! configured receiver on the same received stream.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use super::config::{AlgorithmKind, AlgorithmSpec, ExperimentConfig, PhaseReference};
use crate::analysis::{channel_mse, signature_mse, sinr_linear};
use crate::blind_channel::{align_phase, BlindEstimator, EstimatorKind};
use crate::channel::generate_sv_channel;
use crate::jio_nsg::{FullRankNsg, JioNsg};
use crate::jio_rls::{FullRankRls, JioRls};
use crate::linalg::{is_finite_vec, norm_sqr, CMat, CVec, C64};
use crate::rank_adaptation::RankAdaptive;
use crate::receivers_baseline::rake_mrc;
use crate::signal_model::{
    assemble_received, build_matrices, derive_dimensions, generate_spreading_codes_with,
    sample_nbi, sign_decision, SignalModelMatrices,
};
use crate::{Error, Result};

/// Forces a non-finite output for one algorithm at one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub algorithm: usize,
    pub symbol: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmTrace {
    pub label: String,
    /// 1 for a wrong pre-adaptation decision; NaN after divergence.
    pub errors: Vec<f64>,
    /// Linear SINR at symbols `0, every, 2·every, …`.
    pub sinr: Vec<f64>,
    pub channel_mse: Vec<f64>,
    pub signature_mse: Vec<f64>,
    pub ber_uncoded: f64,
    pub ber_coded: Option<f64>,
    /// Mean linear SINR over the evaluation window.
    pub sinr_converged: f64,
    pub diverged: bool,
    pub digest: [u8; 32],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub algorithms: Vec<AlgorithmTrace>,
    pub stream_digest: [u8; 32],
}

/// Independent generator for `(master seed, trial, purpose, index)`.
pub fn trial_rng(master: u64, trial: usize, purpose: &str, index: usize) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    h.update((index as u64).to_le_bytes());
    ChaCha12Rng::from_seed(h.finalize().into())
}

enum Receiver {
    Rake,
    FrRls(FullRankRls),
    JioRls(JioRls),
    Adaptive(RankAdaptive),
    FrNsg(FullRankNsg),
    JioNsg(JioNsg),
}

struct Runner {
    rx: Receiver,
    /// RLS receivers drive their own estimator from `R̂_y⁻¹`.
    est: Option<BlindEstimator>,
    digest: Sha256,
    trace: AlgorithmTrace,
    soft: Vec<f64>,
}

fn build_receiver(spec: &AlgorithmSpec, m: usize) -> Result<Receiver> {
    let p = &spec.params;
    Ok(match spec.kind {
        AlgorithmKind::Rake => Receiver::Rake,
        AlgorithmKind::FullRankRls => {
            Receiver::FrRls(FullRankRls::new(m, p.alpha, p.delta, p.v, p.dbar_form))
        }
        AlgorithmKind::JioRls => {
            Receiver::JioRls(JioRls::new(m, p.d, p.alpha, p.delta, p.v, p.dbar_form)?)
        }
        AlgorithmKind::RankAdaptiveRls => {
            let rls = JioRls::new(m, p.d_max, p.alpha, p.delta, p.v, p.dbar_form)?;
            Receiver::Adaptive(RankAdaptive::new(rls, p.d_min, p.lambda_d)?)
        }
        AlgorithmKind::FullRankNsg => Receiver::FrNsg(FullRankNsg::new(m, p.mu_w0, p.v)),
        AlgorithmKind::JioNsg => {
            Receiver::JioNsg(JioNsg::new(m, p.d, p.mu_t0, p.mu_w0, p.v, p.c_max)?)
        }
    })
}

fn hash_vec(h: &mut Sha256, r: &CVec) {
    for x in r.iter() {
        h.update(x.re.to_le_bytes());
        h.update(x.im.to_le_bytes());
    }
}

/// Bits and symbol stream of the desired user when coding is on.
struct CodedFrame {
    start: usize,
    info: Vec<u8>,
    len: usize,
}

fn coded_frame(cfg: &ExperimentConfig, trial: usize) -> Result<Option<CodedFrame>> {
    if !cfg.coding {
        return Ok(None);
    }
    let avail = cfg.symbols.saturating_sub(cfg.eval_start);
    let mut n = 0;
    while cfg.code.punctured_len(n + 1) <= avail {
        n += 1;
    }
    if n == 0 {
        return Err(Error::config(format!(
            "evaluation window of {avail} symbols cannot hold a coded frame"
        )));
    }
    let mut rng = trial_rng(cfg.seed, trial, "info", 0);
    let info: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    Ok(Some(CodedFrame {
        start: cfg.eval_start,
        len: cfg.code.punctured_len(n),
        info,
    }))
}

/// Simulates trial `trial` of `cfg` (a configuration already resolved to one
/// sweep point). `fault` is a test hook.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize, fault: Option<Fault>) -> Result<TrialResult> {
    let sys = &cfg.system;
    let dims = derive_dimensions(sys)?;
    let n = cfg.symbols;
    let g = dims.g;

    let mats = trial_matrices(cfg, trial)?;

    let frame = coded_frame(cfg, trial)?;
    let coded_bits = frame.as_ref().map(|f| cfg.code.encode(&f.info));
    let symbols: Vec<Vec<f64>> = (0..sys.k)
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, trial, "symbols", k);
            (0..n)
                .map(|i| {
                    let b = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    match (&frame, &coded_bits) {
                        (Some(f), Some(c)) if k == 0 && i >= f.start && i < f.start + f.len => {
                            if c[i - f.start] == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                        _ => b,
                    }
                })
                .collect()
        })
        .collect();

    let a: &CMat = &mats.users[0].code_matrix;
    let p1 = mats.users[0].signature.clone();
    let e1 = sys.energies[0];
    let desired = &p1 * C64::new(e1.sqrt(), 0.0);
    let interference = mats.interference_signatures(0);
    let noise_var = sys.noise_variance(norm_sqr(&p1), dims.m);
    let h1 = &mats.users[0].channel;

    let nbi = sys.nbi.clone().map(|mut nb| {
        nb.theta = trial_rng(cfg.seed, trial, "nbi", 0).random::<f64>() * PI;
        nb
    });
    let mut noise_rng = trial_rng(cfg.seed, trial, "noise", 0);

    let mut runners = cfg
        .algorithms
        .iter()
        .map(|spec| {
            let rx = build_receiver(spec, dims.m)?;
            let est = match spec.kind {
                AlgorithmKind::FullRankRls | AlgorithmKind::JioRls | AlgorithmKind::RankAdaptiveRls => {
                    Some(BlindEstimator::new(EstimatorKind::External, cfg.estimator.clone(), a)?)
                }
                _ => None,
            };
            Ok(Runner {
                rx,
                est,
                digest: Sha256::new(),
                soft: Vec::with_capacity(n),
                trace: AlgorithmTrace {
                    label: spec.label.clone(),
                    errors: Vec::with_capacity(n),
                    sinr: Vec::new(),
                    channel_mse: Vec::with_capacity(n),
                    signature_mse: Vec::with_capacity(n),
                    ber_uncoded: f64::NAN,
                    ber_coded: None,
                    sinr_converged: f64::NAN,
                    diverged: false,
                    digest: [0; 32],
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let need = |kinds: &[AlgorithmKind]| cfg.algorithms.iter().any(|s| kinds.contains(&s.kind));
    let mut power = if need(&[AlgorithmKind::Rake]) {
        Some(BlindEstimator::new(EstimatorKind::PowerMethod, cfg.estimator.clone(), a)?)
    } else {
        None
    };
    let mut leak = if need(&[AlgorithmKind::FullRankNsg, AlgorithmKind::JioNsg]) {
        Some(BlindEstimator::new(EstimatorKind::LeakageSg, cfg.estimator.clone(), a)?)
    } else {
        None
    };

    let reference = |p_hat: CVec| match cfg.phase_reference {
        PhaseReference::Genie => align_phase(&p_hat, &p1),
        PhaseReference::None => p_hat,
    };

    let mut stream = Sha256::new();
    let mut window = vec![vec![0.0; 2 * g + 1]; sys.k];
    let mut jam = vec![C64::new(0.0, 0.0); dims.m];

    for i in 0..n {
        for (k, w) in window.iter_mut().enumerate() {
            for (j, b) in w.iter_mut().enumerate() {
                let idx = i as isize - g as isize + j as isize;
                *b = if idx >= 0 && (idx as usize) < n { symbols[k][idx as usize] } else { 0.0 };
            }
        }
        let jam_ref = nbi.as_ref().map(|nb| {
            for (m, s) in jam.iter_mut().enumerate() {
                let t = i as f64 * sys.ts + m as f64 * sys.tc;
                *s = sample_nbi(nb, t, e1);
            }
            jam.as_slice()
        });
        let r = assemble_received(&mats, &window, noise_var, &mut noise_rng, jam_ref)?;
        hash_vec(&mut stream, &r);

        let mut p_power = None;
        if let Some(est) = power.as_mut() {
            est.observe(a, &r);
            est.refresh(i, a, None)?;
            p_power = Some(reference(est.signature(a)));
        }
        let mut p_leak = None;
        if let Some(est) = leak.as_mut() {
            est.observe(a, &r);
            est.refresh(i, a, None)?;
            p_leak = Some(reference(est.signature(a)));
        }

        let bit = symbols[0][i];
        for (idx, run) in runners.iter_mut().enumerate() {
            if run.trace.diverged {
                run.trace.errors.push(f64::NAN);
                run.soft.push(f64::NAN);
                continue;
            }
            hash_vec(&mut run.digest, &r);
            let step = step_receiver(run, i, a, &r, p_power.as_ref(), p_leak.as_ref(), &reference);
            let y = match step {
                Ok(_) if fault == Some(Fault { algorithm: idx, symbol: i }) => C64::new(f64::NAN, 0.0),
                Ok(y) => y,
                Err(_) => C64::new(f64::NAN, 0.0),
            };
            if !(y.re.is_finite() && y.im.is_finite()) {
                run.trace.diverged = true;
                run.trace.errors.push(f64::NAN);
                run.soft.push(f64::NAN);
                continue;
            }
            run.trace.errors.push(if sign_decision(y) == bit { 0.0 } else { 1.0 });
            run.soft.push(y.re);

            let h_hat = match (&run.est, &run.rx) {
                (Some(e), _) => Some(&e.h),
                (None, Receiver::Rake) => power.as_ref().map(|e| &e.h),
                (None, _) => leak.as_ref().map(|e| &e.h),
            };
            if let Some(h_hat) = h_hat {
                run.trace.channel_mse.push(channel_mse(h_hat, h1));
                let p_hat = a * h_hat;
                run.trace.signature_mse.push(signature_mse(&p_hat, &p1));
            }
            if i % cfg.sinr_every == 0 {
                let f = effective_filter(run, p_power.as_ref());
                let s = if is_finite_vec(&f) {
                    sinr_linear(&f, &desired, &interference, noise_var)
                } else {
                    f64::NAN
                };
                run.trace.sinr.push(s);
            }
        }
    }

    let stream_digest: [u8; 32] = stream.finalize().into();
    let eval = cfg.eval_start.min(n.saturating_sub(1));
    let mut algorithms = Vec::with_capacity(runners.len());
    for run in runners {
        let mut t = run.trace;
        t.digest = run.digest.finalize().into();
        if !t.diverged && t.digest != stream_digest {
            return Err(Error::numerical(format!("{} consumed a different stream", t.label)));
        }
        if !t.diverged {
            let window = &t.errors[eval..];
            t.ber_uncoded = window.iter().sum::<f64>() / window.len() as f64;
            let conv: Vec<f64> = t
                .sinr
                .iter()
                .enumerate()
                .filter(|(j, _)| j * cfg.sinr_every >= eval)
                .map(|(_, &s)| s)
                .collect();
            t.sinr_converged = if conv.is_empty() {
                f64::NAN
            } else {
                conv.iter().sum::<f64>() / conv.len() as f64
            };
            if let (Some(f), Some(_)) = (&frame, &coded_bits) {
                let soft = &run.soft[f.start..f.start + f.len];
                let decoded = cfg.code.viterbi_decode(soft, f.info.len())?;
                let wrong = decoded.iter().zip(&f.info).filter(|(a, b)| a != b).count();
                t.ber_coded = Some(wrong as f64 / f.info.len() as f64);
            }
        }
        algorithms.push(t);
    }
    Ok(TrialResult {
        trial,
        algorithms,
        stream_digest,
    })
}

fn step_receiver(
    run: &mut Runner,
    i: usize,
    a: &CMat,
    r: &CVec,
    p_power: Option<&CVec>,
    p_leak: Option<&CVec>,
    reference: &dyn Fn(CVec) -> CVec,
) -> Result<C64> {
    let missing = || Error::numerical("signature estimate unavailable");
    match &mut run.rx {
        Receiver::Rake => Ok(rake_mrc(r, p_power.ok_or_else(missing)?)?.0),
        Receiver::FrRls(rx) => {
            let est = run.est.as_mut().ok_or_else(missing)?;
            let y = rx.pre_adapt(r);
            est.refresh(i, a, Some(&rx.ry.inv))?;
            rx.adapt(&reference(est.signature(a)))?;
            Ok(y)
        }
        Receiver::JioRls(rx) => {
            let est = run.est.as_mut().ok_or_else(missing)?;
            let pre = rx.pre_adapt(r);
            est.refresh(i, a, Some(&rx.ry.inv))?;
            let p_hat = reference(est.signature(a));
            rx.adapt(r, &pre, &p_hat)?;
            Ok(pre.y)
        }
        Receiver::Adaptive(rx) => {
            let est = run.est.as_mut().ok_or_else(missing)?;
            let (y, _) = rx.symbol_with(r, |rls| {
                est.refresh(i, a, Some(&rls.ry.inv))?;
                Ok(reference(est.signature(a)))
            })?;
            Ok(y)
        }
        Receiver::FrNsg(rx) => Ok(rx.symbol(r, p_leak.ok_or_else(missing)?)?.0),
        Receiver::JioNsg(rx) => Ok(rx.symbol(r, p_leak.ok_or_else(missing)?)?.0),
    }
}

fn effective_filter(run: &Runner, p_power: Option<&CVec>) -> CVec {
    match &run.rx {
        Receiver::Rake => p_power.cloned().unwrap_or_else(|| CVec::zeros(0)),
        Receiver::FrRls(rx) => rx.effective_filter(),
        Receiver::JioRls(rx) => rx.effective_filter(),
        Receiver::Adaptive(rx) => rx.effective_filter(),
        Receiver::FrNsg(rx) => rx.effective_filter(),
        Receiver::JioNsg(rx) => rx.effective_filter(),
    }
}

/// Matrices of one trial's draw, for callers that need the true signatures.
pub fn trial_matrices(cfg: &ExperimentConfig, trial: usize) -> Result<SignalModelMatrices> {
    let sys = &cfg.system;
    let dims = derive_dimensions(sys)?;
    let codes = generate_spreading_codes_with(sys.k, dims.n_c, &mut trial_rng(cfg.seed, trial, "codes", 0));
    let channels = (0..sys.k)
        .map(|k| {
            generate_sv_channel(&cfg.channel, &dims, sys.ttau, &mut trial_rng(cfg.seed, trial, "channel", k))
                .map(|c| c.taps)
        })
        .collect::<Result<Vec<_>>>()?;
    build_matrices(sys, &dims, &codes, &channels)
}
