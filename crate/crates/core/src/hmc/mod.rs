//! Exact inference for a homogeneous hidden Markov chain with known parameters.
//!
//! States are 0-based. `T(k, l) = P(l_i = k | l_{i-1} = l)`, so every column
//! of `T` is a distribution. `Ψ_i(k)` is the (unnormalized) likelihood of
//! observation `i` under state `k`.

mod brute;
mod smoothing;
mod viterbi;

pub use brute::{BrutePosterior, BRUTE_LIMIT};
pub use smoothing::{fb_algorithm, posterior_chain_factors, ChainFactors, Smoothing};
pub use viterbi::{bidirectional_viterbi, viterbi, BiViterbi, ViterbiTrace};

use crate::{argmax, Error, Result};
use rand::Rng;

const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HmcModel {
    states: usize,
    n: usize,
    t: Vec<f64>,
    p: Vec<f64>,
    psi: Vec<f64>,
}

impl HmcModel {
    /// `t` is `M×M` row-major (`t[k*M + l] = T(k, l)`); `psi` is `n×M` row-major.
    pub fn new(states: usize, t: Vec<f64>, p: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        let mm = states;
        if mm == 0 {
            return Err(Error::InvalidModel("state count must be at least 1".into()));
        }
        if t.len() != mm * mm {
            return Err(Error::LengthMismatch(t.len(), mm * mm));
        }
        if p.len() != mm {
            return Err(Error::LengthMismatch(p.len(), mm));
        }
        if psi.is_empty() || !psi.len().is_multiple_of(mm) {
            return Err(Error::InvalidModel(format!("Ψ has {} entries, not a positive multiple of {mm}", psi.len())));
        }
        if t.iter().chain(&p).chain(&psi).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidModel("T, p and Ψ must be finite and non-negative".into()));
        }
        for l in 0..mm {
            let s: f64 = (0..mm).map(|k| t[k * mm + l]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel(format!("column {} of T sums to {s}", l + 1)));
            }
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidModel(format!("p sums to {s}")));
        }
        let n = psi.len() / mm;
        if let Some(i) = (0..n).find(|&i| psi[i * mm..(i + 1) * mm].iter().all(|&v| v == 0.0)) {
            return Err(Error::DegenerateObservation(i + 1));
        }
        Ok(Self { states: mm, n, t, p, psi })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn t(&self, k: usize, l: usize) -> f64 {
        self.t[k * self.states + l]
    }

    pub fn transition(&self) -> &[f64] {
        &self.t
    }

    pub fn initial(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn psi(&self, i: usize) -> &[f64] {
        &self.psi[i * self.states..(i + 1) * self.states]
    }

    pub fn psi_all(&self) -> &[f64] {
        &self.psi
    }

    /// Same chain with a new observation matrix.
    pub fn with_psi(&self, psi: Vec<f64>) -> Result<Self> {
        Self::new(self.states, self.t.clone(), self.p.clone(), psi)
    }
}

/// Per-time maximum-likelihood labels, ignoring the chain.
pub fn ml_detect(psi: &[f64], states: usize) -> Vec<usize> {
    psi.chunks_exact(states).map(argmax).collect()
}

/// `M×M` matrix with entries drawn from `U(0,1)` and columns normalized.
pub fn random_transition_matrix<R: Rng>(states: usize, rng: &mut R) -> Vec<f64> {
    let mm = states;
    let mut t: Vec<f64> = (0..mm * mm).map(|_| rng.random::<f64>()).collect();
    for l in 0..mm {
        let s: f64 = (0..mm).map(|k| t[k * mm + l]).sum();
        for k in 0..mm {
            t[k * mm + l] /= s;
        }
    }
    t
}

/// Random chain for oracle checks: random `T` and `p`, `Ψ` entries in `[0.01, 1)`.
pub fn random_model<R: Rng>(states: usize, n: usize, rng: &mut R) -> HmcModel {
    let t = random_transition_matrix(states, rng);
    let mut p: Vec<f64> = (0..states).map(|_| rng.random_range(0.05..1.0)).collect();
    normalize(&mut p);
    let psi = (0..n * states).map(|_| rng.random_range(0.01..1.0)).collect();
    HmcModel::new(states, t, p, psi).expect("generated model is valid")
}

/// Scales `v` to sum to one and returns the original sum.
#[inline]
pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}
