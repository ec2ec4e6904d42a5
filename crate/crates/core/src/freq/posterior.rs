//! Exact grid posterior for `x_i = a sin(Ωi) + z_i`, `z_i ~ N(0, r_e)`,
//! `a ~ N(μ_a, r_a)`, `Ω ~ U[0, π)`, and its VB and transformed-VB
//! approximations.
//!
//! Conditionally on `Ω` the amplitude is Gaussian with
//! `1/r(Ω) = Σ sin²(Ωi)/r_e + 1/r_a` and `μ(Ω) = r(Ω)(Σ x_i sin(Ωi)/r_e + μ_a/r_a)`,
//! so `a` is integrated out analytically and only `Ω` is gridded.

use super::estimators::spectrum;
use crate::vb::ks_distance;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqPrior {
    pub mu_a: f64,
    pub r_a: f64,
}

impl Default for FreqPrior {
    fn default() -> Self {
        Self { mu_a: 1.0, r_a: 0.1 }
    }
}

/// Frequency grid `Ω_g = 2πg/(pad·n)`, `g = 0..pad·n/2`, covering `[0, π)`,
/// with the regression energies `Σ_i sin²(Ω_g i)` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneGrid {
    pub n: usize,
    pub pad: usize,
    pub omega: Vec<f64>,
    sin_energy: Vec<f64>,
}

impl ToneGrid {
    pub fn new(n: usize, pad: usize) -> Result<Self> {
        if n < 2 || pad == 0 {
            return Err(Error::InvalidArgument(format!("grid needs n ≥ 2 and pad ≥ 1, got n = {n}, pad = {pad}")));
        }
        let len = pad * n;
        let omega: Vec<f64> = (0..len / 2).map(|g| 2.0 * PI * g as f64 / len as f64).collect();
        let sin_energy = omega.iter().map(|&w| (1..=n).map(|i| (w * i as f64).sin().powi(2)).sum()).collect();
        Ok(Self { n, pad, omega, sin_energy })
    }

    /// Single-point grid, for degenerate checks.
    pub fn single(n: usize, omega: f64) -> Self {
        let s = (1..=n).map(|i| (omega * i as f64).sin().powi(2)).sum();
        Self { n, pad: 0, omega: vec![omega], sin_energy: vec![s] }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `Σ_i sin²(Ω_g i)` per grid point.
    pub fn sin_energies(&self) -> &[f64] {
        &self.sin_energy
    }

    /// `Σ_i x_i sin(Ω_g i)` for every grid point; through the FFT when the
    /// grid is a padded DFT grid.
    pub fn sine_correlation(&self, x: &[f64]) -> Vec<f64> {
        if self.pad == 0 {
            return self.omega.iter().map(|&w| x.iter().enumerate().map(|(i, v)| v * (w * (i + 1) as f64).sin()).sum()).collect();
        }
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let f = spectrum(&xc, self.pad);
        // Σ_{i=1}^{n} x_i e^{-jΩi} = e^{-jΩ} F(Ω); its imaginary part is -Σ x_i sin(Ωi)
        self.omega.iter().zip(&f).map(|(&w, c)| -(Complex64::from_polar(1.0, -w) * c).im).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqPosterior {
    pub omega: Vec<f64>,
    pub r: Vec<f64>,
    pub mu: Vec<f64>,
    /// `f(Ω_g | x)`, summing to one over the grid.
    pub marginal: Vec<f64>,
    pub mean: f64,
    pub marginal_map: f64,
    /// Grid index of the joint MAP, `argmax μ²/(2r)`.
    pub joint_map_index: usize,
    pub joint_map_omega: f64,
    pub joint_map_amplitude: f64,
    pub prior: FreqPrior,
}

/// `p ∝ exp(v)` over the grid, after subtracting the maximum.
fn normalize_log(v: &[f64]) -> Vec<f64> {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = v.iter().map(|x| (x - mx).exp()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn expect(p: &[f64], v: &[f64]) -> f64 {
    p.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn freq_posterior(x: &[f64], r_e: f64, prior: &FreqPrior, grid: &ToneGrid) -> Result<FreqPosterior> {
    if x.len() != grid.n {
        return Err(Error::LengthMismatch(x.len(), grid.n));
    }
    if !(prior.r_a > 0.0) || !(r_e > 0.0) {
        return Err(Error::InvalidArgument("variances must be positive".into()));
    }
    let xs = grid.sine_correlation(x);
    let r: Vec<f64> = grid.sin_energy.iter().map(|s| 1.0 / (s / r_e + 1.0 / prior.r_a)).collect();
    let mu: Vec<f64> = r.iter().zip(&xs).map(|(r, c)| r * (c / r_e + prior.mu_a / prior.r_a)).collect();
    let joint: Vec<f64> = mu.iter().zip(&r).map(|(m, r)| m * m / (2.0 * r)).collect();
    let log_marg: Vec<f64> = joint.iter().zip(&r).map(|(j, r)| j + 0.5 * r.ln()).collect();
    let marginal = normalize_log(&log_marg);
    let jm = crate::argmax(&joint);
    Ok(FreqPosterior {
        mean: expect(&marginal, &grid.omega),
        marginal_map: grid.omega[crate::argmax(&marginal)],
        joint_map_index: jm,
        joint_map_omega: grid.omega[jm],
        joint_map_amplitude: mu[jm],
        prior: *prior,
        omega: grid.omega.clone(),
        r,
        mu,
        marginal,
    })
}

/// Starting point of the shaping iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqVbInit {
    /// Gaussian factor centred on the joint MAP: `(m(Ω̂), r(Ω̂))`.
    JointMap,
    /// Gaussian factor from the amplitude prior, `(μ_a, r_a)`, shifted by `û₁₂Ω̂` for TVB.
    Prior,
    /// Frequency factor set to the exact marginal.
    ExactMarginal,
}

/// Iteration control shared by VB and TVB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqVbConfig {
    pub cycles: usize,
    /// Stop early once successive marginals are within this KS distance.
    pub ks_tol: Option<f64>,
    pub init: FreqVbInit,
}

impl Default for FreqVbConfig {
    fn default() -> Self {
        Self { cycles: 5, ks_tol: None, init: FreqVbInit::JointMap }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqVb {
    /// Approximate marginal of `Ω` on the grid.
    pub marginal: Vec<f64>,
    /// Shaping scalars `(μ, σ²)` of the Gaussian factor after each cycle.
    pub trace: Vec<(f64, f64)>,
    pub estimate: f64,
    /// `û₁₂`; zero for plain VB.
    pub u12: f64,
}

impl FreqVb {
    pub fn shaping(&self) -> (f64, f64) {
        *self.trace.last().expect("at least one cycle")
    }
}

/// Each cycle sets `f̃(Ω) ∝ exp((2μ m(Ω) - μ² - σ²)/(2r(Ω)) + extra(Ω))`
/// then `μ = E[m(Ω)]`, `σ² = E[r(Ω)]` under it.
fn shaped_cycles(
    post: &FreqPosterior,
    m: &[f64],
    extra: &[f64],
    prior_shift: f64,
    cfg: &FreqVbConfig,
) -> (Vec<f64>, Vec<(f64, f64)>) {
    let j = post.joint_map_index;
    let mut f = post.marginal.clone();
    let (mut mu, mut s2) = match cfg.init {
        FreqVbInit::JointMap => (m[j], post.r[j]),
        FreqVbInit::Prior => (post.prior.mu_a + prior_shift, post.prior.r_a),
        FreqVbInit::ExactMarginal => (expect(&f, m), expect(&f, &post.r)),
    };
    let mut trace = Vec::with_capacity(cfg.cycles);
    let mut v = vec![0.0; f.len()];
    for cycle in 0..cfg.cycles {
        for g in 0..f.len() {
            v[g] = (2.0 * mu * m[g] - mu * mu - s2) / (2.0 * post.r[g]) + extra[g];
        }
        let next = normalize_log(&v);
        let settled =
            cycle > 0 && cfg.ks_tol.is_some_and(|tol| ks_distance(&f, &next).is_ok_and(|d| d <= tol));
        f = next;
        (mu, s2) = (expect(&f, m), expect(&f, &post.r));
        trace.push((mu, s2));
        if settled {
            break;
        }
    }
    (f, trace)
}

pub fn vb_freq(post: &FreqPosterior, cfg: &FreqVbConfig) -> FreqVb {
    let (marginal, trace) = shaped_cycles(post, &post.mu, &vec![0.0; post.mu.len()], 0.0, cfg);
    FreqVb { estimate: expect(&marginal, &post.omega), marginal, trace, u12: 0.0 }
}

/// `u₁₂ = H₁₂/H₁₁ = -r(Ω) Σ_i i cos(Ωi)(x_i - 2a sin(Ωi))/r_e`, with `H` the
/// negative Hessian of the log joint posterior in `(a, Ω)`.
pub fn ldu_u12(x: &[f64], r_e: f64, r: f64, a: f64, omega: f64) -> f64 {
    let s: f64 = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let i = (k + 1) as f64;
            i * (omega * i).cos() * (v - 2.0 * a * (omega * i).sin())
        })
        .sum();
    -r * s / r_e
}

/// VB in `λ = a + û₁₂Ω` with `û₁₂` fixed at the joint MAP. With
/// `μ₀(Ω) = μ(Ω) + û₁₂Ω` the `Ω` factor gains `(μ² - μ₀²)/(2r)`; mapping
/// back gives `f̃(a | Ω) = N(μ₂ - û₁₂Ω, σ₂²)`.
pub fn tvb_freq(post: &FreqPosterior, x: &[f64], r_e: f64, cfg: &FreqVbConfig) -> FreqVb {
    let j = post.joint_map_index;
    let u12 = ldu_u12(x, r_e, post.r[j], post.joint_map_amplitude, post.joint_map_omega);
    tvb_with_u12(post, u12, cfg)
}

pub fn tvb_with_u12(post: &FreqPosterior, u12: f64, cfg: &FreqVbConfig) -> FreqVb {
    let mu0: Vec<f64> = post.mu.iter().zip(&post.omega).map(|(m, w)| m + u12 * w).collect();
    let extra: Vec<f64> =
        post.mu.iter().zip(&mu0).zip(&post.r).map(|((m, m0), r)| (m * m - m0 * m0) / (2.0 * r)).collect();
    let (marginal, trace) = shaped_cycles(post, &mu0, &extra, u12 * post.joint_map_omega, cfg);
    FreqVb { estimate: expect(&marginal, &post.omega), marginal, trace, u12 }
}
