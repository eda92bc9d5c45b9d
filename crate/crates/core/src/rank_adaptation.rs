//! Online rank selection for JIO-RLS.
//!
//! The receiver runs at `D_max`. After each symbol the a-posteriori cost of
//! every leading-`D` truncation
//!
//! ```text
//! C_D(i) = λ_D C_D(i−1) + (|w̄_Dᴴ(i) T_Dᴴ(i) r(i)|² − 1)²
//! ```
//!
//! is updated and the next decision uses the truncation with the smallest cost.

use crate::jio_rls::{truncated_output, JioRls};
use crate::linalg::{adjoint_mul, CVec, C64};
use crate::signal_model::sign_decision;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RankAdaptive {
    pub rls: JioRls,
    /// `costs[D − d_min]`.
    pub costs: Vec<f64>,
    pub lambda_d: f64,
    pub d_min: usize,
    pub d_max: usize,
    pub d_opt: usize,
}

impl RankAdaptive {
    pub fn new(rls: JioRls, d_min: usize, lambda_d: f64) -> Result<Self> {
        let d_max = rls.rank();
        if d_min == 0 || d_min > d_max {
            return Err(Error::config(format!(
                "rank window [{d_min}, {d_max}] is empty"
            )));
        }
        Ok(RankAdaptive {
            costs: vec![0.0; d_max - d_min + 1],
            lambda_d,
            d_min,
            d_max,
            d_opt: d_min,
            rls,
        })
    }

    /// Adds the a-posteriori cost of every truncation for input `r`.
    pub fn update_costs(&mut self, r: &CVec) {
        let r_bar = adjoint_mul(&self.rls.t, r);
        for (idx, c) in self.costs.iter_mut().enumerate() {
            let y = truncated_output(&self.rls.w, &r_bar, self.d_min + idx);
            let e = y.norm_sqr() - 1.0;
            *c = self.lambda_d * *c + e * e;
        }
    }

    /// Decision output at the current `D_opt`, full-rank adaptation, then
    /// cost update and re-selection.
    pub fn symbol_with<F>(&mut self, r: &CVec, mut p_hat_for: F) -> Result<(C64, f64)>
    where
        F: FnMut(&JioRls) -> Result<CVec>,
    {
        let pre = self.rls.pre_adapt(r);
        let y = truncated_output(&self.rls.w, &pre.r_bar, self.d_opt);
        let p_hat = p_hat_for(&self.rls)?;
        self.rls.adapt(r, &pre, &p_hat)?;
        self.update_costs(r);
        self.d_opt = select_rank(&self.costs, self.d_min);
        Ok((y, sign_decision(y)))
    }

    pub fn symbol(&mut self, r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
        self.symbol_with(r, |_| Ok(p_hat.clone()))
    }

    /// `T_D w̄_D` at the selected rank.
    pub fn effective_filter(&self) -> CVec {
        let d = self.d_opt;
        self.rls.t.columns(0, d) * self.rls.w.rows(0, d)
    }
}

/// Argmin of `costs` (indexed from `d_min`); ties go to the smaller rank.
pub fn select_rank(costs: &[f64], d_min: usize) -> usize {
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
    }
    d_min + best
}
