//! Forward-backward smoothing and the posterior chain factors it yields.

use super::{normalize, HmcModel};
use crate::{argmax, Error, Result};

/// Filtering `α`, normalized backward `β` and smoothing `γ`, each `n×M`
/// row-major, plus the marginal-MAP labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothing {
    pub states: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub labels: Vec<usize>,
    /// `log f(x_1..x_n)` up to the scale of `Ψ`.
    pub log_evidence: f64,
}

impl Smoothing {
    pub fn alpha(&self, i: usize) -> &[f64] {
        &self.alpha[i * self.states..(i + 1) * self.states]
    }
    pub fn beta(&self, i: usize) -> &[f64] {
        &self.beta[i * self.states..(i + 1) * self.states]
    }
    pub fn gamma(&self, i: usize) -> &[f64] {
        &self.gamma[i * self.states..(i + 1) * self.states]
    }
}

/// `α_1 ∝ Ψ_1∘p`, `α_i ∝ Ψ_i∘(Tα_{i-1})`; `β_n ∝ 1`, `β_i ∝ T'(Ψ_{i+1}∘β_{i+1})`;
/// `γ_i ∝ α_i∘β_i`. Every vector is normalized as it is produced.
pub fn fb_algorithm(model: &HmcModel) -> Result<Smoothing> {
    let (mm, n) = (model.states(), model.n());
    let mut alpha = vec![0.0; n * mm];
    let mut log_evidence = 0.0;
    for k in 0..mm {
        alpha[k] = model.psi(0)[k] * model.initial()[k];
    }
    let c = normalize(&mut alpha[..mm]);
    if c <= 0.0 {
        return Err(Error::DegenerateObservation(1));
    }
    log_evidence += c.ln();
    for i in 1..n {
        let (prev, cur) = alpha.split_at_mut(i * mm);
        let prev = &prev[(i - 1) * mm..];
        let cur = &mut cur[..mm];
        let psi = model.psi(i);
        for k in 0..mm {
            let row = &model.transition()[k * mm..(k + 1) * mm];
            let pred: f64 = row.iter().zip(prev).map(|(t, a)| t * a).sum();
            cur[k] = psi[k] * pred;
        }
        let c = normalize(cur);
        if c <= 0.0 {
            return Err(Error::DegenerateObservation(i + 1));
        }
        log_evidence += c.ln();
    }

    let mut beta = vec![0.0; n * mm];
    beta[(n - 1) * mm..].fill(1.0 / mm as f64);
    let mut w = vec![0.0; mm];
    for i in (0..n - 1).rev() {
        let psi = model.psi(i + 1);
        for k in 0..mm {
            w[k] = psi[k] * beta[(i + 1) * mm + k];
        }
        let cur = &mut beta[i * mm..(i + 1) * mm];
        cur.fill(0.0);
        for k in 0..mm {
            let row = &model.transition()[k * mm..(k + 1) * mm];
            for (b, t) in cur.iter_mut().zip(row) {
                *b += t * w[k];
            }
        }
        if normalize(cur) <= 0.0 {
            return Err(Error::DegenerateObservation(i + 2));
        }
    }

    let mut gamma: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| a * b).collect();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let row = &mut gamma[i * mm..(i + 1) * mm];
        if normalize(row) <= 0.0 {
            return Err(Error::DegenerateObservation(i + 1));
        }
        labels.push(argmax(row));
    }
    Ok(Smoothing { states: mm, alpha, beta, gamma, labels, log_evidence })
}

/// Sufficient statistics of the posterior as a chain in either direction.
///
/// `a[i]` (for `i = 0..n-1`) is row-stochastic with row `k` equal to
/// `f(l_i | l_{i+1} = k, x)`; `b[i]` is column-stochastic with column `k` equal
/// to `f(l_{i+1} | l_i = k, x)`. Both are `M×M` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainFactors {
    pub states: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl ChainFactors {
    #[inline]
    pub fn a(&self, i: usize, next: usize, cur: usize) -> f64 {
        self.a[i][next * self.states + cur]
    }
    #[inline]
    pub fn b(&self, i: usize, next: usize, cur: usize) -> f64 {
        self.b[i][next * self.states + cur]
    }
}

/// `A_i(k,:) ∝ T(k,:)∘α_i'` and `B_i(:,k) ∝ β_{i+1}∘Ψ_{i+1}∘T(:,k)`.
pub fn posterior_chain_factors(model: &HmcModel, sm: &Smoothing) -> ChainFactors {
    let (mm, n) = (model.states(), model.n());
    let mut a = Vec::with_capacity(n.saturating_sub(1));
    let mut b = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let alpha = sm.alpha(i);
        let mut ai = vec![0.0; mm * mm];
        for k in 0..mm {
            let row = &mut ai[k * mm..(k + 1) * mm];
            for l in 0..mm {
                row[l] = model.t(k, l) * alpha[l];
            }
            normalize(row);
        }
        let (beta, psi) = (sm.beta(i + 1), model.psi(i + 1));
        let mut bi = vec![0.0; mm * mm];
        for k in 0..mm {
            let mut s = 0.0;
            for j in 0..mm {
                let v = beta[j] * psi[j] * model.t(j, k);
                bi[j * mm + k] = v;
                s += v;
            }
            if s > 0.0 {
                for j in 0..mm {
                    bi[j * mm + k] /= s;
                }
            }
        }
        a.push(ai);
        b.push(bi);
    }
    ChainFactors { states: mm, a, b }
}
