//! Inference engines for discrete factor models and hidden Markov chains,
//! plus the receiver simulations that exercise them.
//!
//! - [`gdl`]: semiring reductions over factored tables with operator counting.
//! - [`hmc`]: exact smoothing and joint-MAP decoding for a known chain.
//! - [`vb`]: variational and point-mass (ICM) approximations with accelerated sweeps.
//! - [`channel`]: QAM over AWGN and quantized Rayleigh fading, Monte Carlo harness.
//! - [`freq`]: single-tone frequency estimators, VB and transformed VB.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod freq;
pub mod gdl;
pub mod hmc;
pub mod special;
pub mod vb;

pub use error::{Error, Result};

/// Stand-in for `log(0)` so that `0 * log 0` stays finite and zero.
pub const LOG_ZERO: f64 = -1e10;

/// Natural log with the [`LOG_ZERO`] sentinel for non-positive input.
#[inline]
pub fn safe_ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        LOG_ZERO
    }
}

/// Index of the largest element; ties resolve to the smallest index.
#[inline]
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// Index of the smallest element; ties resolve to the smallest index.
#[inline]
pub fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = k;
        }
    }
    best
}
