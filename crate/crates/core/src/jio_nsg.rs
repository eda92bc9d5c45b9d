//! JIO receiver with normalized stochastic-gradient updates.
//!
//! The output is `y = w̄ᴴ Tᴴ r` and the receiver minimizes `(|y|² − 1)²`
//! subject to `w̄ᴴ Tᴴ p̂ = v`. Each sub-update takes the analytic step size
//! that drives the instantaneous cost to zero (scaled by `μ_{T,0}` or `μ_{w,0}`)
//! and then projects back onto the constraint:
//!
//! ```text
//! T ← T − y* μ_{T,0} A_{T,2} − A_{T,3} p̂ w̄ᴴ
//! w̄ ← w̄ − y* μ_{w,0} A_{w,2} − A_{w,3} Tᴴp̂
//! ```

use crate::linalg::{adjoint_mul, dotc, norm_sqr, padded_identity, CMat, CVec, C64, ONE};
use crate::signal_model::sign_decision;
use crate::{Error, Result};

pub const DENOM_TOL: f64 = 1e-12;
pub const Y_FLOOR: f64 = 1e-6;

/// Whether a sub-update took the gradient step or only the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Gradient,
    ProjectionOnly,
}

/// `(|y| − 1)/|y|` with `|y|` floored.
fn modulus_factor(y: C64) -> f64 {
    let a = y.norm().max(Y_FLOOR);
    (a - 1.0) / a
}

/// Output of `(T, w̄)` for input `r`.
pub fn compute_output(t: &CMat, w: &CVec, r: &CVec) -> C64 {
    dotc(w, &adjoint_mul(t, r))
}

/// NSG update of `T`. Returns the step kind.
pub fn update_transform(
    t: &mut CMat,
    w: &CVec,
    r: &CVec,
    p_hat: &CVec,
    v: f64,
    mu_t0: f64,
) -> Result<StepKind> {
    let np = norm_sqr(p_hat);
    if !(np > 0.0) {
        return Err(Error::numerical("‖p̂‖ = 0 in transform update"));
    }
    let nw = norm_sqr(w);
    if !(nw > DENOM_TOL) {
        return Err(Error::numerical("‖w̄‖ = 0 in transform update"));
    }
    let y = compute_output(t, w, r);
    let pr = dotc(p_hat, r);
    let a1 = nw * (norm_sqr(r) - pr.norm_sqr() / np);
    let tw = &*t * w;
    let a3 = (dotc(p_hat, &tw) - C64::new(v, 0.0)) / (nw * np);
    // T ← T − (y* μ c)(r − (p̂ᴴr/‖p̂‖²) p̂) w̄ᴴ − A_{T,3} p̂ w̄ᴴ
    let (kind, dir) = if a1 > DENOM_TOL {
        let c = y.conj() * (mu_t0 * modulus_factor(y) / a1);
        let mut g = r * c;
        g.axpy(-(c * pr / np), p_hat, ONE);
        (StepKind::Gradient, g)
    } else {
        (StepKind::ProjectionOnly, CVec::zeros(r.len()))
    };
    let mut u = dir;
    u.axpy(a3, p_hat, ONE);
    for j in 0..t.ncols() {
        let wj = w[j].conj();
        for i in 0..t.nrows() {
            t[(i, j)] -= u[i] * wj;
        }
    }
    Ok(kind)
}

/// NSG update of `w̄` given the reduced input `r̄ = Tᴴr` and `q = Tᴴp̂`.
pub fn update_filter_reduced(
    w: &mut CVec,
    r_bar: &CVec,
    q: &CVec,
    v: f64,
    mu_w0: f64,
) -> Result<StepKind> {
    let nq = norm_sqr(q);
    if !(nq > DENOM_TOL) {
        return Err(Error::numerical(
            "‖Tᴴp̂‖ vanishes; constraint unsatisfiable in this subspace",
        ));
    }
    let y = dotc(w, r_bar);
    let qr = dotc(q, r_bar);
    let a1 = norm_sqr(r_bar) - qr.norm_sqr() / nq;
    let a3 = (dotc(q, w) - C64::new(v, 0.0)) / nq;
    let kind = if a1 > DENOM_TOL {
        let c = y.conj() * (mu_w0 * modulus_factor(y) / a1);
        w.axpy(-c, r_bar, ONE);
        w.axpy(c * qr / nq, q, ONE);
        StepKind::Gradient
    } else {
        StepKind::ProjectionOnly
    };
    w.axpy(-a3, q, ONE);
    Ok(kind)
}

#[derive(Debug, Clone)]
pub struct JioNsg {
    pub t: CMat,
    pub w: CVec,
    pub mu_t0: f64,
    pub mu_w0: f64,
    pub v: f64,
    pub c_max: usize,
}

impl JioNsg {
    /// `T = [I_D | 0]ᵀ`, `w̄ = 1`.
    pub fn new(m: usize, d: usize, mu_t0: f64, mu_w0: f64, v: f64, c_max: usize) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::config(format!("rank D = {d} outside 1..={m}")));
        }
        Ok(JioNsg {
            t: padded_identity(m, d),
            w: CVec::from_element(d, ONE),
            mu_t0,
            mu_w0,
            v,
            c_max,
        })
    }

    /// Default step sizes and `v = 2` at rank `d`.
    pub fn with_defaults(m: usize, d: usize) -> Result<Self> {
        Self::new(m, d, 0.075, 0.005, 2.0, 3)
    }

    pub fn rank(&self) -> usize {
        self.w.len()
    }

    pub fn output(&self, r: &CVec) -> C64 {
        compute_output(&self.t, &self.w, r)
    }

    pub fn update_transform(&mut self, r: &CVec, p_hat: &CVec) -> Result<StepKind> {
        update_transform(&mut self.t, &self.w, r, p_hat, self.v, self.mu_t0)
    }

    pub fn update_filter(&mut self, r: &CVec, p_hat: &CVec) -> Result<StepKind> {
        let r_bar = adjoint_mul(&self.t, r);
        let q = adjoint_mul(&self.t, p_hat);
        update_filter_reduced(&mut self.w, &r_bar, &q, self.v, self.mu_w0)
    }

    /// Decision from the pre-adaptation output, then `c_max` joint passes.
    pub fn symbol(&mut self, r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
        let y = self.output(r);
        for _ in 0..self.c_max {
            self.update_transform(r, p_hat)?;
            self.update_filter(r, p_hat)?;
        }
        Ok((y, sign_decision(y)))
    }

    pub fn effective_filter(&self) -> CVec {
        &self.t * &self.w
    }

    pub fn constraint_residual(&self, p_hat: &CVec) -> f64 {
        (dotc(&self.w, &adjoint_mul(&self.t, p_hat)) - C64::new(self.v, 0.0)).norm()
    }
}

/// Full-rank NSG baseline: the `w̄` update with `T = I`.
#[derive(Debug, Clone)]
pub struct FullRankNsg {
    pub w: CVec,
    pub mu_w0: f64,
    pub v: f64,
}

impl FullRankNsg {
    pub fn new(m: usize, mu_w0: f64, v: f64) -> Self {
        FullRankNsg {
            w: CVec::from_element(m, ONE),
            mu_w0,
            v,
        }
    }

    pub fn with_defaults(m: usize) -> Self {
        Self::new(m, 0.025, 2.0)
    }

    pub fn output(&self, r: &CVec) -> C64 {
        dotc(&self.w, r)
    }

    pub fn symbol(&mut self, r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
        let y = self.output(r);
        update_filter_reduced(&mut self.w, r, p_hat, self.v, self.mu_w0)?;
        Ok((y, sign_decision(y)))
    }

    pub fn effective_filter(&self) -> CVec {
        self.w.clone()
    }

    pub fn constraint_residual(&self, p_hat: &CVec) -> f64 {
        (dotc(&self.w, p_hat) - C64::new(self.v, 0.0)).norm()
    }
}
