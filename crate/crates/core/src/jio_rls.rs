//! JIO receiver with recursive least-squares updates.
//!
//! `T` is adapted one column at a time with the shared approximation
//! `R_d ≈ |w̄_d|² R_y`, `R_y = Σ α^{i−j}|y(j)|² r rᴴ`, and the reduced filter
//! solves the constrained LS problem with `R_T = Σ α^{i−j}|y(j)|² r̄ r̄ᴴ`.
//! Both inverses are propagated with the matrix inversion lemma.
//!
//! A symbol is processed in two halves so the caller can refresh the blind
//! channel estimate from the freshly updated `R̂_y⁻¹` in between:
//! [`JioRls::pre_adapt`] then [`JioRls::adapt`].

use crate::blind_channel::InverseCovariance;
use crate::linalg::{adjoint_mul, dotc, norm, padded_identity, CMat, CVec, C64, ONE, ZERO};
use crate::signal_model::sign_decision;
use crate::{Error, Result};

pub const W_CLAMP: f64 = 1e-4;
const DENOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbarForm {
    /// `d̄(i) = d̄(i−1) + α r̄(i) y*(i)`.
    Accumulate,
    /// `d̄(i) = α d̄(i−1) + r̄(i) y*(i)`.
    Forget,
}

fn update_dbar(d: &mut CVec, r_bar: &CVec, y: C64, alpha: f64, form: DbarForm) {
    match form {
        DbarForm::Accumulate => d.axpy(y.conj() * alpha, r_bar, ONE),
        DbarForm::Forget => d.axpy(y.conj(), r_bar, C64::new(alpha, 0.0)),
    }
}

/// `w̄ = R̂⁻¹(−½λ q + d̄)` with `λ` chosen so `w̄ᴴq = v`.
pub fn constrained_filter(rinv: &CMat, d: &CVec, q: &CVec, v: f64) -> Result<CVec> {
    let rq = rinv * q;
    let qrq = dotc(q, &rq).re;
    if !(qrq.abs() > DENOM_TOL) {
        return Err(Error::numerical("qᴴR̂⁻¹q vanishes in the filter update"));
    }
    let lambda = ((dotc(d, &rq) - C64::new(v, 0.0)) / qrq).conj() * 2.0;
    let rd = rinv * d;
    Ok(rd - rq * (lambda * 0.5))
}

/// Flags raised while adapting one symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RlsFlags {
    pub columns_skipped: usize,
    pub columns_kept: usize,
    pub inverse_skipped: usize,
}

/// Pre-adaptation quantities of one symbol.
#[derive(Debug, Clone)]
pub struct PreAdapt {
    pub r_bar: CVec,
    pub y: C64,
    pub e: f64,
}

#[derive(Debug, Clone)]
pub struct JioRls {
    pub t: CMat,
    pub w: CVec,
    pub ry: InverseCovariance,
    pub rt: InverseCovariance,
    pub d_bar: CVec,
    pub v_r: Vec<CVec>,
    pub alpha: f64,
    pub v: f64,
    pub dbar_form: DbarForm,
    pub flags: RlsFlags,
}

impl JioRls {
    pub fn new(m: usize, d: usize, alpha: f64, delta: f64, v: f64, dbar_form: DbarForm) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::config(format!("rank D = {d} outside 1..={m}")));
        }
        Ok(JioRls {
            t: padded_identity(m, d),
            w: CVec::from_element(d, ONE),
            ry: InverseCovariance::new(m, delta, alpha),
            rt: InverseCovariance::new(d, delta, alpha),
            d_bar: CVec::zeros(d),
            v_r: vec![CVec::zeros(m); d],
            alpha,
            v,
            dbar_form,
            flags: RlsFlags::default(),
        })
    }

    /// Default forgetting factor, regularization and `v = 2` at rank `d`.
    pub fn with_defaults(m: usize, d: usize) -> Result<Self> {
        Self::new(m, d, 0.9998, 10.0, 2.0, DbarForm::Accumulate)
    }

    pub fn rank(&self) -> usize {
        self.w.len()
    }

    /// `r̄ = Tᴴr`, `y = w̄ᴴr̄`, then `d̄`, `R̂_y⁻¹` and `R̂_T⁻¹`.
    pub fn pre_adapt(&mut self, r: &CVec) -> PreAdapt {
        let r_bar = adjoint_mul(&self.t, r);
        let y = truncated_output(&self.w, &r_bar, self.rank());
        update_dbar(&mut self.d_bar, &r_bar, y, self.alpha, self.dbar_form);
        if !self.ry.update_weighted(r, y) {
            self.flags.inverse_skipped += 1;
        }
        if !self.rt.update_weighted(&r_bar, y) {
            self.flags.inverse_skipped += 1;
        }
        PreAdapt {
            e: y.norm_sqr() - 1.0,
            r_bar,
            y,
        }
    }

    /// Column `d` of `T`: returns the pre-normalization column, or `None`
    /// when the update was skipped.
    pub fn update_column(
        &mut self,
        d: usize,
        r: &CVec,
        pre: &PreAdapt,
        p_hat: &CVec,
    ) -> Result<Option<CVec>> {
        let wd = self.w[d];
        let w2 = wd.norm_sqr();
        if wd.norm() < W_CLAMP {
            self.flags.columns_skipped += 1;
            return Ok(None);
        }
        let mut rbe = pre.r_bar.clone();
        rbe[d] = ZERO;
        let coef = wd.conj() * (dotc(&rbe, &self.w) * pre.e - wd * pre.r_bar[d].conj());
        let vr = &mut self.v_r[d];
        vr.axpy(coef, r, C64::new(self.alpha, 0.0));
        let ry_p = &self.ry.inv * p_hat;
        let prp = dotc(p_hat, &ry_p).re;
        if !(prp.abs() > DENOM_TOL) {
            return Err(Error::numerical("p̂ᴴR̂_y⁻¹p̂ vanishes in the column update"));
        }
        let mut p_d = adjoint_mul(&self.t, p_hat);
        p_d[d] = ZERO;
        let c = C64::new(self.v, 0.0) - dotc(&self.w, &p_d);
        let num = wd.conj() * dotc(&self.v_r[d], &ry_p) + c * w2;
        let lambda = (num / (-w2 * prp)).conj() * 2.0;
        let mut rhs = self.v_r[d].clone();
        rhs.axpy(lambda * wd.conj() * 0.5, p_hat, ONE);
        let col = (&self.ry.inv * rhs) * C64::new(-1.0 / w2, 0.0);
        let n = norm(&col);
        if !(n > 0.0) || !n.is_finite() {
            self.flags.columns_kept += 1;
            return Ok(None);
        }
        self.t.set_column(d, &(&col / C64::new(n, 0.0)));
        Ok(Some(col))
    }

    /// `w̄ = R̂_T⁻¹(−½λ Tᴴp̂ + d̄)` satisfying `w̄ᴴTᴴp̂ = v`.
    pub fn update_filter(&mut self, p_hat: &CVec) -> Result<()> {
        let q = adjoint_mul(&self.t, p_hat);
        self.w = constrained_filter(&self.rt.inv, &self.d_bar, &q, self.v)?;
        Ok(())
    }

    /// Columns `1..D` in order, then the filter.
    pub fn adapt(&mut self, r: &CVec, pre: &PreAdapt, p_hat: &CVec) -> Result<()> {
        for d in 0..self.rank() {
            self.update_column(d, r, pre, p_hat)?;
        }
        self.update_filter(p_hat)
    }

    /// Both halves with a fixed `p̂`.
    pub fn symbol(&mut self, r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
        let pre = self.pre_adapt(r);
        self.adapt(r, &pre, p_hat)?;
        Ok((pre.y, sign_decision(pre.y)))
    }

    pub fn effective_filter(&self) -> CVec {
        &self.t * &self.w
    }

    pub fn constraint_residual(&self, p_hat: &CVec) -> f64 {
        (dotc(&self.w, &adjoint_mul(&self.t, p_hat)) - C64::new(self.v, 0.0)).norm()
    }
}

/// `Σ_{d<D} w̄_d* r̄_d`, the output of the leading-`D` truncation.
pub fn truncated_output(w: &CVec, r_bar: &CVec, d: usize) -> C64 {
    let mut acc = ZERO;
    for i in 0..d {
        acc += w[i].conj() * r_bar[i];
    }
    acc
}

/// Full-rank constrained CM-RLS: the filter update with `T = I`.
#[derive(Debug, Clone)]
pub struct FullRankRls {
    pub w: CVec,
    pub ry: InverseCovariance,
    pub d_bar: CVec,
    pub alpha: f64,
    pub v: f64,
    pub dbar_form: DbarForm,
}

impl FullRankRls {
    pub fn new(m: usize, alpha: f64, delta: f64, v: f64, dbar_form: DbarForm) -> Self {
        FullRankRls {
            w: CVec::from_element(m, ONE),
            ry: InverseCovariance::new(m, delta, alpha),
            d_bar: CVec::zeros(m),
            alpha,
            v,
            dbar_form,
        }
    }

    pub fn with_defaults(m: usize) -> Self {
        Self::new(m, 0.9998, 10.0, 2.0, DbarForm::Accumulate)
    }

    pub fn pre_adapt(&mut self, r: &CVec) -> C64 {
        let y = dotc(&self.w, r);
        update_dbar(&mut self.d_bar, r, y, self.alpha, self.dbar_form);
        self.ry.update_weighted(r, y);
        y
    }

    pub fn adapt(&mut self, p_hat: &CVec) -> Result<()> {
        self.w = constrained_filter(&self.ry.inv, &self.d_bar, p_hat, self.v)?;
        Ok(())
    }

    pub fn symbol(&mut self, r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
        let y = self.pre_adapt(r);
        self.adapt(p_hat)?;
        Ok((y, sign_decision(y)))
    }

    pub fn effective_filter(&self) -> CVec {
        self.w.clone()
    }

    pub fn constraint_residual(&self, p_hat: &CVec) -> f64 {
        (dotc(&self.w, p_hat) - C64::new(self.v, 0.0)).norm()
    }
}
