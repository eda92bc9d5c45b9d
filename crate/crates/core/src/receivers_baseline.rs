//! RAKE with maximal-ratio combining.
//!
//! Combining every resolved finger with its channel weight and despreading
//! collapses, in the chip-rate matrix model, to the matched filter on the
//! effective signature: `y = p̂ᴴ r`.

use crate::linalg::{dotc, norm_sqr, CVec, C64};
use crate::signal_model::sign_decision;
use crate::{Error, Result};

pub fn rake_mrc(r: &CVec, p_hat: &CVec) -> Result<(C64, f64)> {
    if !(norm_sqr(p_hat) > 0.0) {
        return Err(Error::numerical("RAKE needs a non-zero signature"));
    }
    let y = dotc(p_hat, r);
    Ok((y, sign_decision(y)))
}
