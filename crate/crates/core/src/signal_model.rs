//! Discrete-time DS-UWB signal model.
//!
//! Every user transmits a ±1 symbol spread by a ±1 chip sequence. Chips are
//! shaped by a root-raised-cosine pulse sampled at the multipath resolution
//! `Tτ`, pass through a tapped-delay-line channel and are chip-matched filtered
//! and sampled at chip rate. Per symbol the receiver observes
//!
//! ```text
//! r(i) = Σ_k √E_k P_r S_e,k h_k b_k(i) + η(i) + n(i)
//! ```
//!
//! where `η(i)` collects the tails of the `2G` neighbouring symbols.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::linalg::{real_to_complex, CMat, CVec, C64, ZERO};
use crate::{Error, Result};

const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrReference {
    /// Per-sample noise variance `E_1‖p_1‖²/snr`.
    Signature,
    /// Per-sample noise variance `E_1‖p_1‖²/(M·snr)`.
    PerSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbiConfig {
    pub sir_db: f64,
    /// Tone offset in MHz.
    pub f_d_mhz: f64,
    /// Tone phase in radians, normally drawn per trial from `[0, π)`.
    pub theta: f64,
}

impl NbiConfig {
    pub fn power(&self, e1: f64) -> f64 {
        e1 * 10f64.powf(-self.sir_db / 10.0)
    }
}

/// One sample of the single-tone jammer at time `t_ns`.
pub fn sample_nbi(nbi: &NbiConfig, t_ns: f64, e1: f64) -> C64 {
    let phase = 2.0 * PI * nbi.f_d_mhz * 1e-3 * t_ns + nbi.theta;
    C64::from_polar(nbi.power(e1).sqrt(), phase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub k: usize,
    /// Symbol duration in ns.
    pub ts: f64,
    /// Chip duration in ns.
    pub tc: f64,
    /// Multipath resolution in ns.
    pub ttau: f64,
    /// Channel delay spread in ns.
    pub t_ds: f64,
    pub snr_db: f64,
    pub energies: Vec<f64>,
    pub rolloff: f64,
    pub nbi: Option<NbiConfig>,
    pub snr_ref: SnrReference,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            k: 7,
            ts: 12.0,
            tc: 0.375,
            ttau: 0.125,
            t_ds: 10.0,
            snr_db: 20.0,
            energies: vec![1.0; 7],
            rolloff: 0.5,
            nbi: None,
            snr_ref: SnrReference::Signature,
        }
    }
}

impl SystemConfig {
    /// Equal-power configuration with `k` users at energy `e`.
    pub fn with_users(mut self, k: usize, e: f64) -> Self {
        self.k = k;
        self.energies = vec![e; k];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("user count must be at least 1"));
        }
        if self.energies.len() != self.k {
            return Err(Error::config(format!(
                "{} energies given for {} users",
                self.energies.len(),
                self.k
            )));
        }
        if self.energies.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::config("user energies must be positive"));
        }
        if !(self.t_ds > 0.0) || !(self.ttau > 0.0) || !(self.tc > 0.0) || !(self.ts > 0.0) {
            return Err(Error::config("durations must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::config("roll-off must lie in [0, 1]"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db must be finite"));
        }
        Ok(())
    }

    /// Complex noise variance per chip sample for a desired signature energy `‖p_1‖²`.
    pub fn noise_variance(&self, p1_energy: f64, m: usize) -> f64 {
        let snr = 10f64.powf(self.snr_db / 10.0);
        let base = self.energies[0] * p1_energy / snr;
        match self.snr_ref {
            SnrReference::Signature => base,
            SnrReference::PerSample => base / m as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionSet {
    /// Observation length (chip samples per symbol window).
    pub m: usize,
    /// Number of multipath taps.
    pub l: usize,
    /// Padded channel length `Ts/Tτ + L − 1`.
    pub m_h: usize,
    /// ISI reach in symbols.
    pub g: usize,
    /// Chips per symbol.
    pub n_c: usize,
    /// Tτ-samples per symbol.
    pub s: usize,
    /// Tτ-samples per chip.
    pub q: usize,
}

fn exact_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let x = num / den;
    let n = x.round();
    if n < 1.0 || (x - n).abs() > RATIO_TOL * n.max(1.0) {
        return Err(Error::config(format!("{what} = {x} is not a positive integer")));
    }
    Ok(n as usize)
}

fn ceil_tol(x: f64) -> usize {
    (x - RATIO_TOL * x.abs().max(1.0)).ceil().max(0.0) as usize
}

pub fn derive_dimensions(cfg: &SystemConfig) -> Result<DimensionSet> {
    cfg.validate()?;
    let n_c = exact_ratio(cfg.ts, cfg.tc, "Ts/Tc")?;
    let s = exact_ratio(cfg.ts, cfg.ttau, "Ts/Ttau")?;
    let q = exact_ratio(cfg.tc, cfg.ttau, "Tc/Ttau")?;
    let l = exact_ratio(cfg.t_ds, cfg.ttau, "T_DS/Ttau")?;
    let m = ceil_tol((cfg.ts + cfg.t_ds - cfg.ttau) / cfg.tc);
    let g = ceil_tol(cfg.t_ds / cfg.ts);
    Ok(DimensionSet {
        m,
        l,
        m_h: s + l - 1,
        g,
        n_c,
        s,
        q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    pub chips: Vec<f64>,
}

pub fn generate_spreading_codes_with<R: Rng + ?Sized>(
    k: usize,
    n_c: usize,
    rng: &mut R,
) -> Vec<SpreadingCode> {
    (0..k)
        .map(|_| SpreadingCode {
            chips: (0..n_c)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        })
        .collect()
}

pub fn generate_spreading_codes(k: usize, n_c: usize, seed: u64) -> Vec<SpreadingCode> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    generate_spreading_codes_with(k, n_c, &mut rng)
}

/// Root-raised-cosine impulse response with symbol period `period`.
pub fn rrc(t: f64, period: f64, beta: f64) -> f64 {
    let x = t / period;
    if x.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (x.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    num / (PI * x * (1.0 - (4.0 * beta * x).powi(2)))
}

/// Unit-energy chip pulse: the RRC sampled at the centres of the `q` Tτ-slots of one chip.
pub fn chip_pulse(cfg: &SystemConfig, dims: &DimensionSet) -> Vec<f64> {
    let mut p: Vec<f64> = (0..dims.q)
        .map(|n| {
            let t = (n as f64 + 0.5) * cfg.ttau - cfg.tc / 2.0;
            rrc(t, cfg.tc, cfg.rolloff)
        })
        .collect();
    let e = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.iter_mut().for_each(|x| *x /= e);
    p
}

/// `P_t`: column `j` holds the chip pulse at offset `j·q`, scaled so a full
/// symbol waveform `P_t s` has unit energy.
pub fn transmit_matrix(dims: &DimensionSet, pulse: &[f64]) -> DMatrix<f64> {
    let scale = 1.0 / (dims.n_c as f64).sqrt();
    let mut pt = DMatrix::zeros(dims.s, dims.n_c);
    for j in 0..dims.n_c {
        for (t, &v) in pulse.iter().enumerate() {
            pt[(j * dims.q + t, j)] = v * scale;
        }
    }
    pt
}

/// `P_r`: row `m` integrates the matched pulse over Tτ-samples `m·q .. m·q+q−1`.
pub fn receive_matrix(dims: &DimensionSet, pulse: &[f64]) -> DMatrix<f64> {
    let mut pr = DMatrix::zeros(dims.m, dims.m_h);
    for m in 0..dims.m {
        for (t, &v) in pulse.iter().enumerate() {
            let col = m * dims.q + t;
            if col < dims.m_h {
                pr[(m, col)] = v;
            }
        }
    }
    pr
}

/// Toeplitz `S_e` (M_H × L) whose first column is `P_t s` zero-padded.
pub fn code_toeplitz(dims: &DimensionSet, pt: &DMatrix<f64>, code: &SpreadingCode) -> DMatrix<f64> {
    let chips = nalgebra::DVector::from_column_slice(&code.chips);
    let se_col = pt * chips;
    DMatrix::from_fn(dims.m_h, dims.l, |n, l| {
        if n >= l && n - l < se_col.len() {
            se_col[n - l]
        } else {
            0.0
        }
    })
}

/// Toeplitz channel matrix `H` (M_H × Ts/Tτ) with first column `h` zero-padded.
pub fn channel_toeplitz(dims: &DimensionSet, h: &CVec) -> CMat {
    CMat::from_fn(dims.m_h, dims.s, |n, j| {
        if n >= j && n - j < h.len() {
            h[n - j]
        } else {
            ZERO
        }
    })
}

/// Row dimension of the ISI triangles for offset `g`; non-positive means no overlap.
pub fn triangular_row_dim(dims: &DimensionSet, g: usize) -> isize {
    dims.l as isize - (g as isize - 1) * dims.s as isize - 1
}

/// Upper-triangular `H_up` (r × r) with `h(L−1)` on the diagonal.
pub fn h_up(h: &CVec, r: usize) -> CMat {
    let l = h.len();
    CMat::from_fn(r, r, |a, c| if a <= c { h[l - 1 - (c - a)] } else { ZERO })
}

/// Lower-triangular `H_low` (r × r) with `h(0)` on the diagonal.
pub fn h_low(h: &CVec, r: usize) -> CMat {
    CMat::from_fn(r, r, |a, c| if a >= c { h[a - c] } else { ZERO })
}

/// The pair `(H^(−g), H^(+g))`, each M_H × Ts/Tτ, or `None` when symbol
/// `i±g` does not overlap symbol `i`.
pub fn isi_partitions(dims: &DimensionSet, h: &CVec, g: usize) -> Option<(CMat, CMat)> {
    let r = triangular_row_dim(dims, g);
    if r <= 0 {
        return None;
    }
    let r = r as usize;
    let up = h_up(h, r);
    let low = h_low(h, r);
    let (upper_block, lower_block) = if r > dims.s {
        (
            up.columns(r - dims.s, dims.s).into_owned(),
            low.columns(0, dims.s).into_owned(),
        )
    } else {
        (up, low)
    };
    let w = upper_block.ncols();
    let mut past = CMat::zeros(dims.m_h, dims.s);
    past.view_mut((0, dims.s - w), (r, w)).copy_from(&upper_block);
    let mut future = CMat::zeros(dims.m_h, dims.s);
    future
        .view_mut((dims.m_h - r, 0), (r, w))
        .copy_from(&lower_block);
    Some((past, future))
}

#[derive(Debug, Clone)]
pub struct UserModel {
    pub code: SpreadingCode,
    pub channel: CVec,
    /// `S_e,k` (M_H × L).
    pub se: DMatrix<f64>,
    /// `P_r S_e,k` (M × L), the code-channel matrix seen by the blind estimators.
    pub code_matrix: CMat,
    /// `H_k` (M_H × Ts/Tτ).
    pub h_matrix: CMat,
    /// `H_k^(−g)` for g = 1..G (empty entries are omitted at the tail).
    pub isi_past: Vec<CMat>,
    pub isi_future: Vec<CMat>,
    /// `p_k = P_r S_e,k h_k`.
    pub signature: CVec,
    /// `P_r H_k^(−g) P_t s_k`.
    pub past_signatures: Vec<CVec>,
    pub future_signatures: Vec<CVec>,
}

#[derive(Debug, Clone)]
pub struct SignalModelMatrices {
    pub dims: DimensionSet,
    pub pt: DMatrix<f64>,
    pub pr: DMatrix<f64>,
    pub users: Vec<UserModel>,
    pub energies: Vec<f64>,
}

pub fn build_matrices(
    cfg: &SystemConfig,
    dims: &DimensionSet,
    codes: &[SpreadingCode],
    channels: &[CVec],
) -> Result<SignalModelMatrices> {
    if codes.len() != cfg.k || channels.len() != cfg.k {
        return Err(Error::dim(format!(
            "{} codes and {} channels for {} users",
            codes.len(),
            channels.len(),
            cfg.k
        )));
    }
    let pulse = chip_pulse(cfg, dims);
    let pt = transmit_matrix(dims, &pulse);
    let pr = receive_matrix(dims, &pulse);
    let pr_c = real_to_complex(&pr);
    let mut users = Vec::with_capacity(cfg.k);
    for (code, h) in codes.iter().zip(channels) {
        if code.chips.len() != dims.n_c {
            return Err(Error::dim(format!(
                "code length {} differs from N_c = {}",
                code.chips.len(),
                dims.n_c
            )));
        }
        if h.len() != dims.l {
            return Err(Error::dim(format!(
                "channel has {} taps, expected L = {}",
                h.len(),
                dims.l
            )));
        }
        let se = code_toeplitz(dims, &pt, code);
        let code_matrix = real_to_complex(&(&pr * &se));
        let h_matrix = channel_toeplitz(dims, h);
        let shaped: CVec = (&pt * nalgebra::DVector::from_column_slice(&code.chips)).map(|x| C64::new(x, 0.0));
        let mut isi_past = Vec::new();
        let mut isi_future = Vec::new();
        let mut past_signatures = Vec::new();
        let mut future_signatures = Vec::new();
        for g in 1..=dims.g {
            if let Some((past, future)) = isi_partitions(dims, h, g) {
                past_signatures.push(&pr_c * (&past * &shaped));
                future_signatures.push(&pr_c * (&future * &shaped));
                isi_past.push(past);
                isi_future.push(future);
            }
        }
        users.push(UserModel {
            code: code.clone(),
            channel: h.clone(),
            signature: &code_matrix * h,
            se,
            code_matrix,
            h_matrix,
            isi_past,
            isi_future,
            past_signatures,
            future_signatures,
        });
    }
    Ok(SignalModelMatrices {
        dims: *dims,
        pt,
        pr,
        users,
        energies: cfg.energies.clone(),
    })
}

impl SignalModelMatrices {
    /// Every interfering signature for user `desired`, scaled by `√E_k`: other
    /// users' current symbols plus all ISI terms (including the desired user's).
    pub fn interference_signatures(&self, desired: usize) -> Vec<CVec> {
        let mut out = Vec::new();
        for (k, u) in self.users.iter().enumerate() {
            let a = self.energies[k].sqrt();
            if k != desired {
                out.push(&u.signature * C64::new(a, 0.0));
            }
            for s in u.past_signatures.iter().chain(&u.future_signatures) {
                out.push(s * C64::new(a, 0.0));
            }
        }
        out
    }

    /// Noise-free part of `r(i)`. `window[k][j]` is `b_k(i − G + j)`.
    pub fn noiseless_received(&self, window: &[Vec<f64>]) -> Result<CVec> {
        let g = self.dims.g;
        if window.len() != self.users.len() {
            return Err(Error::dim("one symbol window per user is required"));
        }
        let mut r = CVec::zeros(self.dims.m);
        for (k, (u, win)) in self.users.iter().zip(window).enumerate() {
            if win.len() < 2 * g + 1 {
                return Err(Error::dim(format!(
                    "symbol window of length {} shorter than 2G+1 = {}",
                    win.len(),
                    2 * g + 1
                )));
            }
            let a = self.energies[k].sqrt();
            r.axpy(C64::new(a * win[g], 0.0), &u.signature, C64::new(1.0, 0.0));
            for (idx, s) in u.past_signatures.iter().enumerate() {
                let b = win[g - (idx + 1)];
                if b != 0.0 {
                    r.axpy(C64::new(a * b, 0.0), s, C64::new(1.0, 0.0));
                }
            }
            for (idx, s) in u.future_signatures.iter().enumerate() {
                let b = win[g + idx + 1];
                if b != 0.0 {
                    r.axpy(C64::new(a * b, 0.0), s, C64::new(1.0, 0.0));
                }
            }
        }
        Ok(r)
    }
}

/// `r(i)` with circular complex Gaussian noise of variance `noise_var` and
/// optional per-sample jammer samples.
pub fn assemble_received<R: Rng + ?Sized>(
    mats: &SignalModelMatrices,
    window: &[Vec<f64>],
    noise_var: f64,
    rng: &mut R,
    nbi: Option<&[C64]>,
) -> Result<CVec> {
    let mut r = mats.noiseless_received(window)?;
    if noise_var > 0.0 {
        let sd = (noise_var / 2.0).sqrt();
        for x in r.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *x += C64::new(sd * re, sd * im);
        }
    }
    if let Some(j) = nbi {
        if j.len() != r.len() {
            return Err(Error::dim("jammer sample count differs from M"));
        }
        for (x, s) in r.iter_mut().zip(j) {
            *x += s;
        }
    }
    Ok(r)
}

/// Reference received vector built by direct convolution on the Tτ grid.
///
/// The chip waveform of symbols `i−G ..= i+G` is laid out on a common time
/// axis, convolved with each channel, cut to the M_H-sample window of symbol
/// `i` and chip-integrated. `symbols[k][n]` is `b_k(n)`; indices outside the
/// stream count as zero.
pub fn oracle_received_convolution(
    cfg: &SystemConfig,
    codes: &[SpreadingCode],
    channels: &[CVec],
    symbols: &[Vec<f64>],
    i: usize,
) -> Result<CVec> {
    let dims = derive_dimensions(cfg)?;
    let pulse = chip_pulse(cfg, &dims);
    let scale = 1.0 / (dims.n_c as f64).sqrt();
    let g = dims.g as isize;
    let span = (2 * dims.g + 1) * dims.s;
    let origin = dims.g * dims.s;
    let mut z = vec![ZERO; span + dims.l];
    for k in 0..cfg.k {
        let mut x = vec![0.0; span];
        for off in -g..=g {
            let idx = i as isize + off;
            let b = if idx >= 0 {
                symbols[k].get(idx as usize).copied().unwrap_or(0.0)
            } else {
                0.0
            };
            if b == 0.0 {
                continue;
            }
            let start = ((off + g) as usize) * dims.s;
            for (c, &chip) in codes[k].chips.iter().enumerate() {
                for (t, &p) in pulse.iter().enumerate() {
                    x[start + c * dims.q + t] += b * chip * p * scale;
                }
            }
        }
        let amp = cfg.energies[k].sqrt();
        for (n, &xn) in x.iter().enumerate() {
            if xn == 0.0 {
                continue;
            }
            for (l, &hl) in channels[k].iter().enumerate() {
                z[n + l] += hl * (amp * xn);
            }
        }
    }
    let mut r = CVec::zeros(dims.m);
    for m in 0..dims.m {
        let mut acc = ZERO;
        for (t, &p) in pulse.iter().enumerate() {
            let n = m * dims.q + t;
            if n < dims.m_h {
                acc += z[origin + n] * p;
            }
        }
        r[m] = acc;
    }
    Ok(r)
}

/// Hard decision on the real part; exactly zero decides `+1`.
pub fn sign_decision(y: C64) -> f64 {
    if y.re >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
