//! Variational approximations of the HMC posterior by independent per-time
//! marginals, and their point-mass restriction (iterated conditional modes).
//!
//! Both sweeps visit `i = 1..n` in order every cycle. The accelerated variants
//! keep one flag per time index and revisit `i` only after one of its
//! neighbours moved; with a zero threshold they reproduce the plain sweep.

mod fcvb;
mod ivb;
mod kld;

pub use fcvb::{fcvb_run, FcvbOutcome, LabelChange};
pub use ivb::{ivb_run, ivb_run_with, VbOutcome};
pub use kld::{kld_exhaustive, kld_vb, kld_vb_from_factors};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    /// KS threshold; a marginal whose update moves it by at most `xi` counts as settled.
    pub xi: f64,
    pub max_cycles: usize,
    pub accelerated: bool,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self { xi: 0.01, max_cycles: 100, accelerated: false }
    }
}

impl StoppingConfig {
    pub fn accelerated(self, on: bool) -> Self {
        Self { accelerated: on, ..self }
    }
    pub fn xi(self, xi: f64) -> Self {
        Self { xi, ..self }
    }
}

/// Largest absolute difference of the two CDFs over the state order `0..M`.
pub fn ks_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(ks_unchecked(p, q))
}

/// Accumulates differences rather than differencing two cumulative sums, so
/// the result is zero exactly when `p == q` entrywise.
#[inline]
pub(crate) fn ks_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let (mut c, mut d) = (0.0, 0.0f64);
    for (a, b) in p.iter().zip(q) {
        c += a - b;
        d = d.max(c.abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Uniform,
    /// `p_i ∝ Ψ_i`.
    Ml,
}

/// Initial shaping parameters, `n×M` row-major.
pub fn init_shaping(mode: InitMode, psi: &[f64], states: usize) -> Vec<f64> {
    match mode {
        InitMode::Uniform => vec![1.0 / states as f64; psi.len()],
        InitMode::Ml => {
            let mut p = psi.to_vec();
            for row in p.chunks_exact_mut(states) {
                crate::hmc::normalize(row);
            }
            p
        }
    }
}

/// `p ∝ exp(v)` computed after subtracting the maximum.
#[inline]
pub(crate) fn softmax_into(v: &[f64], out: &mut [f64]) {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, x) in out.iter_mut().zip(v) {
        *o = (x - mx).exp();
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
}

/// Accelerated-sweep bookkeeping: after visiting `i`, either retire it or
/// wake it and both neighbours.
#[inline]
pub(crate) fn update_flags(flags: &mut [bool], i: usize, settled: bool) {
    if settled {
        flags[i] = false;
    } else {
        if i > 0 {
            flags[i - 1] = true;
        }
        if i + 1 < flags.len() {
            flags[i + 1] = true;
        }
    }
}
