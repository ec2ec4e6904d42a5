//! Receiver simulation: a Markov source mapped onto Gray-coded rectangular
//! QAM, observed through AWGN or through a quantized Rayleigh fading chain.
//!
//! Both scenarios produce one augmented HMC whose state `s = k·M + m` pairs
//! channel level `k` with source symbol `m`; AWGN is the single-level case
//! with unit gain.

mod experiment;
mod fading;

pub use experiment::{run_experiment, ExperimentConfig, Method, ResultRow, Scenario};
pub use fading::{bivariate_rayleigh, rayleigh_cdf, rayleigh_quantizer, rho_from_doppler, RayleighQuantizer};

use crate::hmc::{random_transition_matrix, HmcModel};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Rectangular Gray-coded QAM with unit average energy per bit.
///
/// State `k` carries the bit block `k`. Its upper `⌈b/2⌉` bits select the
/// in-phase level and the rest the quadrature level, each through a
/// binary-reflected Gray code, so axis neighbours differ in one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    m: usize,
    bits: u32,
    points: Vec<Complex64>,
}

const MAX_QAM_BITS: u32 = 16;

#[inline]
fn gray_inverse(mut g: usize) -> usize {
    let mut x = g;
    while g > 0 {
        g >>= 1;
        x ^= g;
    }
    x
}

impl QamConstellation {
    /// `m` must be a power of two. `m = 1` is a pilot carrying no bits.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() || m.trailing_zeros() > MAX_QAM_BITS {
            return Err(Error::UnsupportedConstellation(m));
        }
        let bits = m.trailing_zeros();
        if bits == 0 {
            return Ok(Self { m, bits, points: vec![Complex64::new(1.0, 0.0)] });
        }
        let bq = bits / 2;
        let (li, lq) = (1usize << (bits - bq), 1usize << bq);
        let pam_energy = |l: usize| ((l * l - 1) as f64) / 3.0;
        let c = (bits as f64 / (pam_energy(li) + pam_energy(lq))).sqrt();
        let points = (0..m)
            .map(|k| {
                let ix = gray_inverse(k >> bq) as f64;
                let iy = gray_inverse(k & (lq - 1)) as f64;
                Complex64::new(c * (2.0 * ix - (li - 1) as f64), c * (2.0 * iy - (lq - 1) as f64))
            })
            .collect();
        Ok(Self { m, bits, points })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit block carried by state `k`.
    #[inline]
    pub fn gray_bits(&self, k: usize) -> u32 {
        k as u32
    }

    /// `(Σ|a_k|²/M) / log₂M`; `NaN` for the pilot.
    pub fn energy_per_bit(&self) -> f64 {
        self.points.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.m as f64 / self.bits as f64
    }

    /// Axis coordinates `(ix, iy)` of state `k` on the integer lattice.
    pub fn lattice_position(&self, k: usize) -> (usize, usize) {
        let bq = self.bits / 2;
        (gray_inverse(k >> bq), gray_inverse(k & ((1 << bq) - 1)))
    }
}

/// Markov source: column-stochastic `T_s` and initial vector `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub states: usize,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
}

impl SourceSpec {
    /// `U(0,1)` entries with normalized columns and a uniform initial vector.
    pub fn random<R: Rng>(states: usize, rng: &mut R) -> Self {
        Self { states, t: random_transition_matrix(states, rng), p: vec![1.0 / states as f64; states] }
    }
}

/// One simulated block and the HMC the receiver sees.
#[derive(Debug, Clone)]
pub struct Trial {
    pub model: HmcModel,
    /// Source alphabet size `M`; augmented state `s` carries symbol `s % M`.
    pub source_states: usize,
    pub source_labels: Vec<usize>,
    pub channel_labels: Vec<usize>,
    /// Received samples `x_i`.
    pub observations: Vec<Complex64>,
}

impl Trial {
    pub fn decode_source(&self, labels: &[usize]) -> Vec<usize> {
        labels.iter().map(|&s| s % self.source_states).collect()
    }
}

/// Draws a chain of length `n` with initial vector `p` and column-stochastic `t`.
/// A single-state chain consumes no randomness.
pub fn sample_chain<R: Rng>(t: &[f64], p: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mm = p.len();
    if mm == 1 {
        return vec![0; n];
    }
    let draw = |rng: &mut R, w: &dyn Fn(usize) -> f64| {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for k in 0..mm {
            acc += w(k);
            if u < acc {
                return k;
            }
        }
        // rounding left `acc` just below 1; fall back to the last positive entry
        (0..mm).rev().find(|&k| w(k) > 0.0).unwrap_or(mm - 1)
    };
    let mut out = Vec::with_capacity(n);
    let mut cur = draw(rng, &|k| p[k]);
    out.push(cur);
    for _ in 1..n {
        let prev = cur;
        cur = draw(rng, &|k| t[k * mm + prev]);
        out.push(cur);
    }
    out
}

/// `A ⊗ B` for square row-major matrices of orders `ka` and `kb`.
pub fn kronecker(a: &[f64], ka: usize, b: &[f64], kb: usize) -> Vec<f64> {
    let s = ka * kb;
    let mut out = vec![0.0; s * s];
    for r1 in 0..ka {
        for c1 in 0..ka {
            let x = a[r1 * ka + c1];
            for r2 in 0..kb {
                for c2 in 0..kb {
                    out[(r1 * kb + r2) * s + c1 * kb + c2] = x * b[r2 * kb + c2];
                }
            }
        }
    }
    out
}

#[inline]
pub fn noise_density(ebn0_db: f64) -> f64 {
    10f64.powf(-ebn0_db / 10.0)
}

/// Shared generator: source chain, channel chain (skipped when single-level),
/// then complex noise with per-dimension variance `N₀/2`. `Ψ` rows are the
/// complex-Gaussian likelihoods scaled so each row peaks at one.
fn simulate<R: Rng>(
    source: &SourceSpec,
    qam: &QamConstellation,
    gains: &[f64],
    t_c: &[f64],
    ebn0_db: f64,
    n: usize,
    rng: &mut R,
) -> Result<Trial> {
    let (mm, kk) = (source.states, gains.len());
    if qam.m() != mm {
        return Err(Error::LengthMismatch(qam.m(), mm));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    let n0 = noise_density(ebn0_db);
    let source_labels = sample_chain(&source.t, &source.p, n, rng);
    let channel_labels = sample_chain(t_c, &vec![1.0 / kk as f64; kk], n, rng);
    let means: Vec<Complex64> =
        (0..kk * mm).map(|s| qam.points()[s % mm] * gains[s / mm]).collect();
    let sd = (n0 / 2.0).sqrt();
    let mut psi = vec![0.0; n * kk * mm];
    let mut observations = Vec::with_capacity(n);
    for i in 0..n {
        let a = means[channel_labels[i] * mm + source_labels[i]];
        let e = Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sd;
        let x = a + e;
        observations.push(x);
        let row = &mut psi[i * kk * mm..(i + 1) * kk * mm];
        for (r, mu) in row.iter_mut().zip(&means) {
            *r = -(x - mu).norm_sqr() / n0;
        }
        let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.iter_mut().for_each(|r| *r = (*r - mx).exp());
    }
    let t = kronecker(t_c, kk, &source.t, mm);
    let p = kronecker_vec(&vec![1.0 / kk as f64; kk], &source.p);
    Ok(Trial { model: HmcModel::new(kk * mm, t, p, psi)?, source_states: mm, source_labels, channel_labels, observations })
}

fn kronecker_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Markov source over AWGN at `E_b/N₀ = ebn0_db` dB, so `N₀ = 10^(-ebn0_db/10)`.
pub fn simulate_awgn_trial<R: Rng>(
    source: &SourceSpec,
    qam: &QamConstellation,
    ebn0_db: f64,
    n: usize,
    rng: &mut R,
) -> Result<Trial> {
    simulate(source, qam, &[1.0], &[1.0], ebn0_db, n, rng)
}

/// Markov source over the quantized fading chain; the receiver sees the
/// `MK`-state augmented HMC with `T_cs = T_c ⊗ T_s` and means `ḡ_k a_m`.
pub fn augmented_trial<R: Rng>(
    quantizer: &RayleighQuantizer,
    source: &SourceSpec,
    qam: &QamConstellation,
    ebn0_db: f64,
    n: usize,
    rng: &mut R,
) -> Result<Trial> {
    simulate(source, qam, &quantizer.levels, &quantizer.t, ebn0_db, n, rng)
}

/// Fraction of differing bits between the Gray blocks of two label sequences.
pub fn ber(truth: &[usize], est: &[usize], qam: &QamConstellation) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(truth.len(), est.len()));
    }
    if qam.bits_per_symbol() == 0 || truth.is_empty() {
        return Err(Error::InvalidArgument("no bits to compare".into()));
    }
    Ok(bit_errors(truth, est, qam) as f64 / (truth.len() as f64 * qam.bits_per_symbol() as f64))
}

pub(crate) fn bit_errors(truth: &[usize], est: &[usize], qam: &QamConstellation) -> u64 {
    truth.iter().zip(est).map(|(&a, &b)| (qam.gray_bits(a) ^ qam.gray_bits(b)).count_ones() as u64).sum()
}
