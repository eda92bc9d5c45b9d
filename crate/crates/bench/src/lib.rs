//! Fixtures shared by the benchmarks.

use rand::Rng;

use uwbjio::harness::{trial_matrices, trial_rng, ExperimentConfig};
use uwbjio::signal_model::assemble_received;
use uwbjio::{CVec, Result, SignalModelMatrices};

pub struct Scenario {
    pub mats: SignalModelMatrices,
    pub received: Vec<CVec>,
    /// Exact signature of user 0.
    pub signature: CVec,
}

impl Scenario {
    /// Default system at its configured SNR with `symbols` received vectors.
    pub fn new(seed: u64, symbols: usize) -> Result<Self> {
        let cfg = ExperimentConfig {
            seed,
            ..ExperimentConfig::default()
        };
        let mats = trial_matrices(&cfg, 0)?;
        let noise_var = cfg.system.noise_variance(mats.energies[0], mats.dims.m);
        let g = mats.dims.g;
        let k = mats.users.len();
        let mut rng = trial_rng(seed, 0, "bench", 0);
        let mut bits: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..symbols + 2 * g).map(|_| sign(rng.random())).collect())
            .collect();
        let mut received = Vec::with_capacity(symbols);
        for i in 0..symbols {
            let window: Vec<Vec<f64>> = bits.iter().map(|b| b[i..=i + 2 * g].to_vec()).collect();
            received.push(assemble_received(&mats, &window, noise_var, &mut rng, None)?);
        }
        bits.clear();
        let signature = mats.users[0].signature.clone();
        Ok(Scenario {
            mats,
            received,
            signature,
        })
    }

    pub fn m(&self) -> usize {
        self.mats.dims.m
    }
}

fn sign(b: bool) -> f64 {
    if b {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_has_requested_length() {
        let s = Scenario::new(1, 20).unwrap();
        assert_eq!(s.received.len(), 20);
        assert!(s.received.iter().all(|r| r.len() == s.m()));
        assert_eq!(s.signature.len(), s.m());
    }
}
