//! RMS frequency error of the grid estimators on `x_i = a sin(Ωi) + z_i`.
//! Trial `t` draws `a ~ N(μ_a, r_a)` then the noise from
//! `ChaCha8Rng::seed_from_u64(seed ^ t)`, identically at every SNR.

use super::estimators::{periodogram_ml, SearchRange};
use super::posterior::{freq_posterior, tvb_freq, vb_freq, FreqPrior, FreqVbConfig, ToneGrid};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreqMethod {
    /// Zero-padded periodogram peak on `[0, π)`.
    Periodogram,
    /// Least-squares fit, `argmax (Σ x_i sin(Ωi))² / Σ sin²(Ωi)`.
    Ml,
    /// Joint MAP, `argmax μ(Ω)²/(2r(Ω))`.
    Map,
    /// Mode of the exact marginal.
    MarginalMap,
    /// Mean of the exact marginal.
    Mean,
    Vb,
    Tvb,
}

impl FreqMethod {
    pub const ALL: [FreqMethod; 7] = [
        FreqMethod::Periodogram,
        FreqMethod::Ml,
        FreqMethod::Map,
        FreqMethod::MarginalMap,
        FreqMethod::Mean,
        FreqMethod::Vb,
        FreqMethod::Tvb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FreqMethod::Periodogram => "periodogram",
            FreqMethod::Ml => "ml",
            FreqMethod::Map => "map",
            FreqMethod::MarginalMap => "marginal-map",
            FreqMethod::Mean => "mean",
            FreqMethod::Vb => "vb",
            FreqMethod::Tvb => "tvb",
        }
    }
}

impl fmt::Display for FreqMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FreqMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        FreqMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown frequency method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqExperimentConfig {
    pub n: usize,
    /// True frequency in DFT bins, `Ω = omega_bins·2π/n`.
    pub omega_bins: f64,
    /// `SNR = (μ_a² + r_a)/(2 r_e)` in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub pad: usize,
    pub prior: FreqPrior,
    pub vb: FreqVbConfig,
    pub seed: u64,
    pub methods: Vec<FreqMethod>,
}

impl Default for FreqExperimentConfig {
    fn default() -> Self {
        Self {
            n: 64,
            omega_bins: 1.1,
            snr_db: vec![5.0, 15.0],
            trials: 1000,
            pad: 8,
            prior: FreqPrior::default(),
            vb: FreqVbConfig::default(),
            seed: 0,
            methods: FreqMethod::ALL.to_vec(),
        }
    }
}

impl FreqExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.pad == 0 || self.trials == 0 || self.methods.is_empty() || self.snr_db.is_empty() {
            return Err(Error::InvalidArgument("need n ≥ 2, pad ≥ 1, trials ≥ 1 and non-empty SNR and method lists".into()));
        }
        if !(self.omega_bins >= 0.0 && self.omega_bins < self.n as f64 / 2.0) {
            return Err(Error::InvalidArgument(format!("frequency {} bins outside [0, n/2)", self.omega_bins)));
        }
        if !(self.prior.r_a > 0.0) || self.vb.cycles == 0 {
            return Err(Error::InvalidArgument("prior variance must be positive and VB needs a cycle".into()));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.omega_bins * 2.0 * PI / self.n as f64
    }

    /// Noise variance `r_e` at `snr_db`.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        (self.prior.mu_a.powi(2) + self.prior.r_a) / (2.0 * 10f64.powf(snr_db / 10.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreqRow {
    pub method: FreqMethod,
    pub snr_db: f64,
    pub n: usize,
    pub omega_bins: f64,
    /// `√(mean (Ω̂ - Ω)²)` in DFT bins.
    pub rms_bins: f64,
    pub trials: usize,
}

/// One noisy record at noise variance `r_e`.
pub fn simulate_tone<R: Rng>(n: usize, omega: f64, prior: &FreqPrior, r_e: f64, rng: &mut R) -> Vec<f64> {
    let a = prior.mu_a + prior.r_a.sqrt() * rng.sample::<f64, _>(StandardNormal);
    (1..=n).map(|i| a * (omega * i as f64).sin() + r_e.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Every requested estimate for one record, in `methods` order.
pub fn estimate_all(
    x: &[f64],
    r_e: f64,
    prior: &FreqPrior,
    grid: &ToneGrid,
    vb: &FreqVbConfig,
    methods: &[FreqMethod],
) -> Result<Vec<f64>> {
    let post = freq_posterior(x, r_e, prior, grid)?;
    methods
        .iter()
        .map(|m| {
            Ok(match m {
                FreqMethod::Periodogram => {
                    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    periodogram_ml(&xc, grid.pad, SearchRange::Half)?
                }
                FreqMethod::Ml => {
                    let c = grid.sine_correlation(x);
                    let fit: Vec<f64> = c
                        .iter()
                        .zip(grid.sin_energies())
                        .map(|(c, s)| if *s > 0.0 { c * c / s } else { 0.0 })
                        .collect();
                    grid.omega[crate::argmax(&fit)]
                }
                FreqMethod::Map => post.joint_map_omega,
                FreqMethod::MarginalMap => post.marginal_map,
                FreqMethod::Mean => post.mean,
                FreqMethod::Vb => vb_freq(&post, vb).estimate,
                FreqMethod::Tvb => tvb_freq(&post, x, r_e, vb).estimate,
            })
        })
        .collect()
}

/// Rows ordered SNR outer, methods inner.
pub fn run_freq_experiment(cfg: &FreqExperimentConfig) -> Result<Vec<FreqRow>> {
    cfg.validate()?;
    let grid = ToneGrid::new(cfg.n, cfg.pad)?;
    let omega = cfg.omega();
    let bins = cfg.n as f64 / (2.0 * PI);
    let mut rows = Vec::new();
    for &snr in &cfg.snr_db {
        let r_e = cfg.noise_variance(snr);
        let sq: Vec<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ t as u64);
                let x = simulate_tone(cfg.n, omega, &cfg.prior, r_e, &mut rng);
                let est = estimate_all(&x, r_e, &cfg.prior, &grid, &cfg.vb, &cfg.methods)?;
                Ok(est.into_iter().map(|w| ((w - omega) * bins).powi(2)).collect())
            })
            .collect::<Result<_>>()?;
        for (j, &method) in cfg.methods.iter().enumerate() {
            let mse = sq.iter().map(|v| v[j]).sum::<f64>() / cfg.trials as f64;
            rows.push(FreqRow { method, snr_db: snr, n: cfg.n, omega_bins: cfg.omega_bins, rms_bins: mse.sqrt(), trials: cfg.trials });
        }
    }
    Ok(rows)
}
