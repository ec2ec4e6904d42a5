//! Joint-MAP decoding: Viterbi in the log domain and the bi-directional
//! max-product recursions that yield per-time profile marginals.

use super::{normalize, HmcModel};
use crate::{argmax, argmin, safe_ln};

#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiTrace {
    pub states: usize,
    /// Accumulated weighted lengths, `n×M`.
    pub lambda: Vec<f64>,
    /// Back-pointers, `n×M`; row 0 is unused and zero.
    pub kappa: Vec<usize>,
    pub labels: Vec<usize>,
}

/// `λ_1 = -(log Ψ_1 + log p)`, `λ_i(j) = min_k [-log Ψ_i(j) - log T(j,k) + λ_{i-1}(k)]`,
/// then back-tracking from `argmin λ_n`.
pub fn viterbi(model: &HmcModel) -> ViterbiTrace {
    let (mm, n) = (model.states(), model.n());
    let neg_log_t: Vec<f64> = model.transition().iter().map(|&t| -safe_ln(t)).collect();
    let mut lambda = vec![0.0; n * mm];
    let mut kappa = vec![0usize; n * mm];
    for j in 0..mm {
        lambda[j] = -(safe_ln(model.psi(0)[j]) + safe_ln(model.initial()[j]));
    }
    let mut cand = vec![0.0; mm];
    for i in 1..n {
        let psi = model.psi(i);
        for j in 0..mm {
            let prev = &lambda[(i - 1) * mm..i * mm];
            for k in 0..mm {
                cand[k] = neg_log_t[j * mm + k] + prev[k];
            }
            let best = argmin(&cand);
            kappa[i * mm + j] = best;
            lambda[i * mm + j] = cand[best] - safe_ln(psi[j]);
        }
    }
    let mut labels = vec![0; n];
    labels[n - 1] = argmin(&lambda[(n - 1) * mm..]);
    for i in (1..n).rev() {
        labels[i - 1] = kappa[i * mm + labels[i]];
    }
    ViterbiTrace { states: mm, lambda, kappa, labels }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiViterbi {
    pub states: usize,
    /// `f_p(l_i | x)`: max over all other labels, normalized per row, `n×M`.
    pub profile: Vec<f64>,
    pub labels: Vec<usize>,
}

/// Forward `δ_i(j) ∝ Ψ_i(j) max_k T(j,k) δ_{i-1}(k)` and backward
/// `ε_i(l) ∝ max_k T(k,l) Ψ_{i+1}(k) ε_{i+1}(k)`; profile `∝ δ_i∘ε_i`.
pub fn bidirectional_viterbi(model: &HmcModel) -> BiViterbi {
    let (mm, n) = (model.states(), model.n());
    let mut delta = vec![0.0; n * mm];
    for j in 0..mm {
        delta[j] = model.psi(0)[j] * model.initial()[j];
    }
    normalize(&mut delta[..mm]);
    for i in 1..n {
        let psi = model.psi(i);
        for j in 0..mm {
            let prev = &delta[(i - 1) * mm..i * mm];
            let best = (0..mm).map(|k| model.t(j, k) * prev[k]).fold(0.0, f64::max);
            delta[i * mm + j] = psi[j] * best;
        }
        normalize(&mut delta[i * mm..(i + 1) * mm]);
    }
    let mut eps = vec![1.0; n * mm];
    for i in (0..n - 1).rev() {
        let psi = model.psi(i + 1);
        for l in 0..mm {
            let next = &eps[(i + 1) * mm..(i + 2) * mm];
            eps[i * mm + l] = (0..mm).map(|k| model.t(k, l) * psi[k] * next[k]).fold(0.0, f64::max);
        }
        normalize(&mut eps[i * mm..(i + 1) * mm]);
    }
    let mut profile: Vec<f64> = delta.iter().zip(&eps).map(|(d, e)| d * e).collect();
    let labels = profile
        .chunks_exact_mut(mm)
        .map(|row| {
            normalize(row);
            argmax(row)
        })
        .collect();
    BiViterbi { states: mm, profile, labels }
}
