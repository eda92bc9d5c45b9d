//! Blind estimation of the desired user's channel and effective signature.
//!
//! All three estimators share the deflation iteration
//!
//! ```text
//! ĥ ← normalize( ĥ − V̂ ĥ / tr V̂ ),   V̂ = (P_r S_e)ᴴ X (P_r S_e)
//! ```
//!
//! and differ only in how `X ≈ R^{−m}` is tracked: an inversion-lemma
//! recursion of `R̂⁻¹` (power method), the receiver's own `R̂_y⁻¹`, or the
//! leakage stochastic-gradient slices `Ŵ_l ≈ R^{−l} P_r S_e`.
//!
//! `V̂` is never formed. `V̂ h` is evaluated as `Aᴴ(X(A h))` and the trace as
//! `tr(X·AAᴴ)` with the Gram matrix `AAᴴ` cached once per run.

use crate::linalg::{adjoint_mul, dotc, hermitize, norm, CMat, CVec, C64, ONE, ZERO};
use crate::{Error, Result};

const SYMMETRIZE_EVERY: u64 = 100;
const DENOM_TOL: f64 = 1e-12;

/// Exponentially weighted inverse covariance `R̂⁻¹`, optionally with a
/// per-sample weight `|y|²` on the rank-one term.
#[derive(Debug, Clone)]
pub struct InverseCovariance {
    pub inv: CMat,
    pub alpha: f64,
    steps: u64,
    pub skipped: u64,
}

impl InverseCovariance {
    pub fn new(dim: usize, delta: f64, alpha: f64) -> Self {
        InverseCovariance {
            inv: CMat::identity(dim, dim) / C64::new(delta, 0.0),
            alpha,
            steps: 0,
            skipped: 0,
        }
    }

    /// `R̂⁻¹(i) = (R̂⁻¹ − φ κκᴴ)/α` with `κ = R̂⁻¹r`, `φ = 1/(α + rᴴκ)`.
    /// Returns `false` when the denominator vanishes and the step is skipped.
    pub fn update(&mut self, r: &CVec) -> bool {
        self.update_weighted(r, ONE)
    }

    /// Same recursion for `Σ α^{i−j}|y(j)|² r rᴴ`: `κ_y = R̂⁻¹ y r`,
    /// `φ_y = 1/(α + y* rᴴκ_y)`.
    pub fn update_weighted(&mut self, r: &CVec, y: C64) -> bool {
        let k = &self.inv * r;
        let w2 = y.norm_sqr();
        let denom = self.alpha + w2 * dotc(r, &k).re;
        if denom.abs() < DENOM_TOL {
            self.skipped += 1;
            return false;
        }
        let phi = w2 / denom;
        let inv_alpha = 1.0 / self.alpha;
        let n = self.inv.nrows();
        for j in 0..n {
            let kj = k[j].conj() * phi;
            for i in 0..n {
                let v = self.inv[(i, j)] - k[i] * kj;
                self.inv[(i, j)] = v * inv_alpha;
            }
        }
        self.steps += 1;
        if self.steps.is_multiple_of(SYMMETRIZE_EVERY) {
            hermitize(&mut self.inv);
        }
        true
    }
}

/// `V̂` in factored form.
#[derive(Debug, Clone)]
pub struct DeflationOperator {
    form: OperatorForm,
    trace: f64,
}

#[derive(Debug, Clone)]
enum OperatorForm {
    /// `V̂ = Aᴴ Q R̂⁻¹ A` with `Q = R̂^{−(m−1)}`.
    Inverse { q: Option<CMat>, rinv: CMat },
    /// `V̂ = Aᴴ Ŵ_m`.
    Leakage { w: CMat },
}

impl DeflationOperator {
    /// Operator for `Aᴴ R̂^{−m} A` from an inverse-covariance estimate.
    pub fn from_inverse(rinv: &CMat, m: u32, gram: &CMat) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("power m must be at least 1"));
        }
        let q = (m > 1).then(|| {
            let mut q = rinv.clone();
            for _ in 2..m {
                q = &q * rinv;
            }
            q
        });
        let rg = rinv * gram;
        let trace = match &q {
            None => trace_of_product(&CMat::identity(rinv.nrows(), rinv.nrows()), &rg),
            Some(q) => trace_of_product(q, &rg),
        };
        Ok(DeflationOperator {
            form: OperatorForm::Inverse {
                q,
                rinv: rinv.clone(),
            },
            trace,
        })
    }

    /// Operator for `Aᴴ Ŵ_m`.
    pub fn from_leakage(a: &CMat, w_m: &CMat) -> Self {
        let trace = a
            .iter()
            .zip(w_m.iter())
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        DeflationOperator {
            form: OperatorForm::Leakage { w: w_m.clone() },
            trace,
        }
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn apply(&self, a: &CMat, h: &CVec) -> CVec {
        match &self.form {
            OperatorForm::Inverse { q, rinv } => {
                let mut x = rinv * (a * h);
                if let Some(q) = q {
                    x = q * x;
                }
                adjoint_mul(a, &x)
            }
            OperatorForm::Leakage { w } => adjoint_mul(a, &(w * h)),
        }
    }

    /// Explicit `V̂` (L × L), used by tests and diagnostics.
    pub fn to_matrix(&self, a: &CMat) -> CMat {
        let l = a.ncols();
        let mut v = CMat::zeros(l, l);
        for j in 0..l {
            let mut e = CVec::zeros(l);
            e[j] = ONE;
            v.set_column(j, &self.apply(a, &e));
        }
        v
    }
}

fn trace_of_product(x: &CMat, y: &CMat) -> f64 {
    let n = x.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc.re
}

/// `ĥ ← normalize(ĥ − V̂ĥ/tr V̂)`.
pub fn deflation_step(op: &DeflationOperator, a: &CMat, h_prev: &CVec) -> Result<CVec> {
    let tr = op.trace();
    if !(tr.abs() > DENOM_TOL) || !tr.is_finite() {
        return Err(Error::numerical(format!("tr V̂ = {tr} is degenerate")));
    }
    let vh = op.apply(a, h_prev);
    let next = h_prev - vh / C64::new(tr, 0.0);
    let n = norm(&next);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::numerical("channel estimate collapsed to zero"));
    }
    Ok(next / C64::new(n, 0.0))
}

/// One power-method step from an inverse-covariance estimate.
pub fn power_method_channel_step(
    rinv: &CMat,
    h_prev: &CVec,
    a: &CMat,
    m: u32,
) -> Result<CVec> {
    let gram = a * a.adjoint();
    let op = DeflationOperator::from_inverse(rinv, m, &gram)?;
    deflation_step(&op, a, h_prev)
}

/// The same step driven by the receiver's `R̂_y⁻¹`.
pub fn channel_step_rls(ry_inv: &CMat, h_prev: &CVec, a: &CMat, m: u32) -> Result<CVec> {
    power_method_channel_step(ry_inv, h_prev, a, m)
}

/// Difference-form step for a precomputed `V̂`.
pub fn channel_step_nsg(op: &DeflationOperator, a: &CMat, h_prev: &CVec) -> Result<CVec> {
    deflation_step(op, a, h_prev)
}

/// Leakage stochastic-gradient tracker of `R^{−l} A`, `l = 1..m`.
#[derive(Debug, Clone)]
pub struct LeakageSg {
    /// `Ŵ_1 .. Ŵ_m`; `Ŵ_0 = A` is implicit.
    pub slices: Vec<CMat>,
    pub lambda_v: f64,
}

impl LeakageSg {
    /// Every slice starts at `A`.
    pub fn new(a: &CMat, m: u32, lambda_v: f64) -> Self {
        LeakageSg {
            slices: vec![a.clone(); m as usize],
            lambda_v,
        }
    }

    /// `Ŵ_l ← λ_v Ŵ_l + μ_v(Ŵ_{l−1} − r rᴴ Ŵ_l)`, each slice seeing the
    /// already-updated previous one.
    pub fn step(&mut self, a: &CMat, r: &CVec, mu_v: f64) {
        let lam = self.lambda_v;
        for l in 0..self.slices.len() {
            let proj: Vec<C64> = adjoint_mul(&self.slices[l], r)
                .iter()
                .map(|x| x.conj())
                .collect();
            let (done, rest) = self.slices.split_at_mut(l);
            let prev = if l == 0 { a } else { &done[l - 1] };
            let w = &mut rest[0];
            for j in 0..w.ncols() {
                for i in 0..w.nrows() {
                    let old = w[(i, j)];
                    w[(i, j)] = old * lam + (prev[(i, j)] - r[i] * proj[j]) * mu_v;
                }
            }
        }
    }

    pub fn operator(&self, a: &CMat) -> DeflationOperator {
        DeflationOperator::from_leakage(a, self.slices.last().expect("m >= 1"))
    }
}

/// Spec-level form of one leakage update, returning the new `V̂`.
pub fn leakage_sg_step(state: &mut LeakageSg, a: &CMat, r: &CVec, mu_v: f64) -> DeflationOperator {
    state.step(a, r, mu_v);
    state.operator(a)
}

/// `p̂ = P_r S_e ĥ`.
pub fn effective_signature_estimate(h_hat: &CVec, a: &CMat) -> CVec {
    a * h_hat
}

/// `ĥ(0) = normalize(AᴴA·1)`, the all-ones start projected onto the row space of `A`.
pub fn row_space_start(a: &CMat) -> Result<CVec> {
    let ones = CVec::from_element(a.ncols(), ONE);
    let h = adjoint_mul(a, &(a * ones));
    let n = norm(&h);
    if !(n > 0.0) {
        return Err(Error::numerical("code matrix annihilates the all-ones start"));
    }
    Ok(h / C64::new(n, 0.0))
}

/// Rotates `p_hat` so that `p_refᴴ p_hat` is real and non-negative.
pub fn align_phase(p_hat: &CVec, p_ref: &CVec) -> CVec {
    let c = dotc(p_ref, p_hat);
    if c.norm() == 0.0 {
        return p_hat.clone();
    }
    p_hat * (c.conj() / c.norm())
}

/// When `V̂` is refreshed and how many deflation steps each refresh applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cadence {
    /// Refresh every symbol before this index.
    pub dense_until: usize,
    /// Afterwards refresh when `i % every == 0`.
    pub every: usize,
    /// Apply one step per elapsed symbol at each refresh (re-using `V̂`).
    pub catch_up: bool,
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence {
            dense_until: 500,
            every: 10,
            catch_up: true,
        }
    }
}

impl Cadence {
    pub fn due(&self, i: usize) -> bool {
        i < self.dense_until || i.is_multiple_of(self.every.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Tracks its own unweighted `R̂⁻¹`.
    PowerMethod,
    /// Uses an inverse supplied at refresh time (a receiver's `R̂_y⁻¹`).
    External,
    /// Leakage-SG slices.
    LeakageSg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub alpha: f64,
    pub delta: f64,
    pub m: u32,
    pub lambda_v: f64,
    /// `μ_v = mu_scale / tr R̂`.
    pub mu_scale: f64,
    pub cadence: Cadence,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            alpha: 0.9998,
            delta: 10.0,
            m: 3,
            lambda_v: 0.9998,
            mu_scale: 0.3,
            cadence: Cadence::default(),
        }
    }
}

/// A blind channel estimator bound to one user's code matrix.
#[derive(Debug, Clone)]
pub struct BlindEstimator {
    pub kind: EstimatorKind,
    pub params: EstimatorParams,
    pub h: CVec,
    gram: CMat,
    own_inv: Option<InverseCovariance>,
    leak: Option<LeakageSg>,
    trace_r: Option<f64>,
    last_refresh: Option<usize>,
}

impl BlindEstimator {
    pub fn new(kind: EstimatorKind, params: EstimatorParams, a: &CMat) -> Result<Self> {
        let m = a.nrows();
        Ok(BlindEstimator {
            kind,
            h: row_space_start(a)?,
            gram: a * a.adjoint(),
            own_inv: (kind == EstimatorKind::PowerMethod)
                .then(|| InverseCovariance::new(m, params.delta, params.alpha)),
            leak: (kind == EstimatorKind::LeakageSg)
                .then(|| LeakageSg::new(a, params.m, params.lambda_v)),
            trace_r: None,
            last_refresh: None,
            params,
        })
    }

    /// Per-symbol statistics update (no-op for `External`).
    pub fn observe(&mut self, a: &CMat, r: &CVec) {
        match self.kind {
            EstimatorKind::PowerMethod => {
                self.own_inv.as_mut().expect("power method state").update(r);
            }
            EstimatorKind::LeakageSg => {
                let e = crate::linalg::norm_sqr(r);
                let tr = match self.trace_r {
                    None => e,
                    Some(t) => self.params.alpha * t + (1.0 - self.params.alpha) * e,
                };
                self.trace_r = Some(tr);
                let mu = if tr > 0.0 { self.params.mu_scale / tr } else { 0.0 };
                self.leak.as_mut().expect("leakage state").step(a, r, mu);
            }
            EstimatorKind::External => {}
        }
    }

    /// Refreshes `ĥ` at symbol `i` if the cadence says so. `external` must be
    /// given for `External` estimators.
    pub fn refresh(&mut self, i: usize, a: &CMat, external: Option<&CMat>) -> Result<bool> {
        let cad = self.params.cadence;
        if !cad.due(i) {
            return Ok(false);
        }
        let steps = match (cad.catch_up, self.last_refresh) {
            (true, Some(last)) if i > last => i - last,
            _ => 1,
        };
        let op = match self.kind {
            EstimatorKind::PowerMethod => DeflationOperator::from_inverse(
                &self.own_inv.as_ref().expect("power method state").inv,
                self.params.m,
                &self.gram,
            )?,
            EstimatorKind::External => {
                let x = external
                    .ok_or_else(|| Error::config("external estimator needs an inverse"))?;
                DeflationOperator::from_inverse(x, self.params.m, &self.gram)?
            }
            EstimatorKind::LeakageSg => self.leak.as_ref().expect("leakage state").operator(a),
        };
        let mut h = self.h.clone();
        for _ in 0..steps {
            h = deflation_step(&op, a, &h)?;
        }
        self.h = h;
        self.last_refresh = Some(i);
        Ok(true)
    }

    pub fn signature(&self, a: &CMat) -> CVec {
        effective_signature_estimate(&self.h, a)
    }

    pub fn inverse(&self) -> Option<&InverseCovariance> {
        self.own_inv.as_ref()
    }

    pub fn leakage(&self) -> Option<&LeakageSg> {
        self.leak.as_ref()
    }
}
