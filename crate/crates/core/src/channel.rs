//! Clustered Saleh-Valenzuela channel impulse responses binned onto the Tτ grid.

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::linalg::{norm, CVec, C64};
use crate::signal_model::DimensionSet;
use crate::{Error, Result};

const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SvParams {
    /// Number of clusters drawn.
    pub clusters: usize,
    /// Rays drawn per cluster.
    pub rays: usize,
    /// Λ, cluster arrival rate (1/ns).
    pub cluster_rate: f64,
    /// λ_r, ray arrival rate (1/ns).
    pub ray_rate: f64,
    /// Γ, cluster power decay constant (ns).
    pub cluster_decay: f64,
    /// γ, ray power decay constant (ns).
    pub ray_decay: f64,
}

impl Default for SvParams {
    fn default() -> Self {
        SvParams {
            clusters: 4,
            rays: 40,
            cluster_rate: 0.047,
            ray_rate: 1.54,
            cluster_decay: 22.6,
            ray_decay: 12.5,
        }
    }
}

impl SvParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.cluster_rate,
            self.ray_rate,
            self.cluster_decay,
            self.ray_decay,
        ];
        if rates.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::config("S-V rates and decays must be positive"));
        }
        if self.clusters * self.rays == 0 {
            return Err(Error::config("S-V model needs at least one ray"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: CVec,
    /// Tap spacing in ns.
    pub ttau: f64,
}

impl ChannelRealization {
    /// One line per tap, `re im`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in self.taps.iter() {
            let _ = writeln!(s, "{} {}", t.re, t.im);
        }
        s
    }

    pub fn from_text(text: &str, ttau: f64) -> Result<Self> {
        let mut taps = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut field = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::config(format!("line {}: expected `re im`", n + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("line {}: {e}", n + 1)))
            };
            let re = field()?;
            let im = field()?;
            taps.push(C64::new(re, im));
        }
        if taps.is_empty() {
            return Err(Error::config("channel file has no taps"));
        }
        Ok(ChannelRealization {
            taps: CVec::from_vec(taps),
            ttau,
        })
    }
}

pub fn normalize_channel(h: &CVec) -> Result<CVec> {
    let n = norm(h);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::numerical("cannot normalize a zero channel"));
    }
    Ok(h / C64::new(n, 0.0))
}

/// Draws a channel with `dims.l` taps. Cluster and ray arrivals are Poisson,
/// the first of each at zero delay; arrivals at or beyond `L·Tτ` are dropped.
pub fn generate_sv_channel<R: Rng + ?Sized>(
    params: &SvParams,
    dims: &DimensionSet,
    ttau: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    params.validate()?;
    if dims.l == 0 {
        return Err(Error::dim("channel needs at least one tap"));
    }
    let horizon = dims.l as f64 * ttau;
    let cluster_gap = Exp::new(params.cluster_rate).expect("validated rate");
    let ray_gap = Exp::new(params.ray_rate).expect("validated rate");
    for _ in 0..MAX_RETRIES {
        let mut h = CVec::zeros(dims.l);
        let mut any = false;
        let mut t_cluster = 0.0;
        for u in 0..params.clusters {
            if u > 0 {
                t_cluster += cluster_gap.sample(rng);
            }
            let mut t_ray = 0.0;
            for v in 0..params.rays {
                if v > 0 {
                    t_ray += ray_gap.sample(rng);
                }
                let fade: f64 = Exp1.sample(rng);
                let phase = 2.0 * PI * rng.random::<f64>();
                let delay = t_cluster + t_ray;
                if delay >= horizon {
                    continue;
                }
                let l = (delay / ttau).round() as usize;
                if l >= dims.l {
                    continue;
                }
                let power =
                    (-t_cluster / params.cluster_decay).exp() * (-t_ray / params.ray_decay).exp();
                h[l] += C64::from_polar((power * fade).sqrt(), phase);
                any = true;
            }
        }
        if any && norm(&h) > 0.0 {
            return Ok(ChannelRealization {
                taps: normalize_channel(&h)?,
                ttau,
            });
        }
    }
    Err(Error::numerical(
        "every S-V arrival fell outside the delay spread",
    ))
}
