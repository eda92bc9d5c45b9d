//! Blind adaptive receivers for direct-sequence ultra-wideband links.
//!
//! The crate simulates a DS-UWB multiuser uplink at chip rate and implements
//! joint-iterative-optimization (JIO) reduced-rank receivers under the
//! constrained constant-modulus criterion, together with their blind channel
//! estimators, a RAKE baseline, a punctured convolutional code and a seeded
//! Monte Carlo harness that writes CSV.
//!
//! ```no_run
//! use uwbjio::harness::{ExperimentConfig, run_experiment};
//!
//! let cfg = ExperimentConfig::default();
//! let report = run_experiment(&cfg, 0).unwrap();
//! print!("{}", report.to_csv());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod blind_channel;
pub mod channel;
pub mod coding;
pub mod harness;
pub mod jio_nsg;
pub mod jio_rls;
pub mod linalg;
pub mod rank_adaptation;
pub mod receivers_baseline;
pub mod signal_model;

mod error;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};

pub use analysis::{channel_mse, hessian_min_eigenvalue, signature_mse, sinr_db};
pub use blind_channel::{BlindEstimator, Cadence, EstimatorKind, InverseCovariance};
pub use channel::{ChannelRealization, SvParams};
pub use coding::CodeConfig;
pub use jio_nsg::{FullRankNsg, JioNsg};
pub use jio_rls::{DbarForm, FullRankRls, JioRls};
pub use rank_adaptation::RankAdaptive;
pub use signal_model::{
    DimensionSet, NbiConfig, SignalModelMatrices, SnrReference, SpreadingCode, SystemConfig,
};
