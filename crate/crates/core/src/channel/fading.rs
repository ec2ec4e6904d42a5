//! Equiprobable quantization of a Rayleigh envelope into a `K`-state Markov chain.

use crate::special::{adaptive_simpson, bessel_i0e, bessel_j0, simpson_2d_doubling};
use crate::{Error, Result};
use std::f64::consts::PI;

/// `ζ_K` in units of `√(2σ²)`; the cell above it carries `exp(-25)` of the mass.
const TRUNCATION: f64 = 5.0;
const CELL_RTOL: f64 = 1e-8;
/// Absolute floor for cells whose mass is negligible next to column sums of one.
const CELL_ATOL: f64 = 1e-13;
const CELL_N0: usize = 64;
const CELL_MAX_N: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighQuantizer {
    pub k: usize,
    pub sigma2: f64,
    pub rho: f64,
    /// `ζ_0 = 0 < ζ_1 < … < ζ_K`.
    pub thresholds: Vec<f64>,
    /// `ḡ_k = K ∫ g f(g) dg` over cell `k`.
    pub levels: Vec<f64>,
    /// `K×K` row-major, column-stochastic: `t[k*K + m] = P(next = k | prev = m)`.
    pub t: Vec<f64>,
    /// Rayleigh mass above `ζ_K`, dropped by the truncation.
    pub tail_residual: f64,
}

/// `ρ = J₀(2π f_D T_s)`.
pub fn rho_from_doppler(fdts: f64) -> Result<f64> {
    if !(fdts >= 0.0) || !fdts.is_finite() {
        return Err(Error::InvalidArgument(format!("normalized Doppler must be finite and non-negative, got {fdts}")));
    }
    Ok(bessel_j0(2.0 * PI * fdts))
}

/// Rayleigh CDF `1 - exp(-g²/(2σ²))`.
#[inline]
pub fn rayleigh_cdf(g: f64, sigma2: f64) -> f64 {
    if g <= 0.0 {
        0.0
    } else {
        -(-g * g / (2.0 * sigma2)).exp_m1()
    }
}

/// Bivariate Rayleigh density with correlation `ρ`, `|ρ| < 1`.
///
/// The exponent is combined with the scaled Bessel factor so the product
/// never overflows: `exp(-(x²+y²-2|ρ|xy)/(2σ²(1-ρ²))) · I0e(|ρ|xy/(σ²(1-ρ²)))`.
#[inline]
pub fn bivariate_rayleigh(x: f64, y: f64, sigma2: f64, rho: f64) -> f64 {
    let q = 1.0 - rho * rho;
    let z = (rho * x * y / (sigma2 * q)).abs();
    let expo = -(x * x + y * y) / (2.0 * sigma2 * q) + z;
    x * y / (sigma2 * sigma2 * q) * expo.exp() * bessel_i0e(z)
}

pub fn rayleigh_quantizer(k: usize, sigma2: f64, rho: f64) -> Result<RayleighQuantizer> {
    if k == 0 {
        return Err(Error::InvalidArgument("quantizer needs at least one level".into()));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidArgument(format!("σ² must be positive, got {sigma2}")));
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("correlation must satisfy |ρ| < 1, got {rho}")));
    }
    let kf = k as f64;
    let mut thresholds: Vec<f64> =
        (0..k).map(|j| (-2.0 * sigma2 * (-(j as f64) / kf).ln_1p()).sqrt()).collect();
    thresholds.push(TRUNCATION * (2.0 * sigma2).sqrt());
    let tail_residual = (-thresholds[k] * thresholds[k] / (2.0 * sigma2)).exp();

    let first_moment = |g: f64| g * g / sigma2 * (-g * g / (2.0 * sigma2)).exp();
    let levels = (0..k)
        .map(|j| adaptive_simpson(first_moment, thresholds[j], thresholds[j + 1], 1e-11).map(|v| kf * v))
        .collect::<Result<Vec<_>>>()?;

    let mut t = vec![0.0; k * k];
    let f = |x: f64, y: f64| bivariate_rayleigh(x, y, sigma2, rho);
    for m in 0..k {
        for j in m..k {
            let cell = (thresholds[m], thresholds[m + 1]);
            let other = (thresholds[j], thresholds[j + 1]);
            let v = simpson_2d_doubling(&f, cell, other, CELL_N0, CELL_RTOL, CELL_ATOL, CELL_MAX_N)?;
            t[j * k + m] = kf * v;
            t[m * k + j] = kf * v;
        }
    }
    for m in 0..k {
        let s: f64 = (0..k).map(|j| t[j * k + m]).sum();
        if !(s > 0.0) {
            return Err(Error::Quadrature(format!("column {} of the fading matrix has zero mass", m + 1)));
        }
        (0..k).for_each(|j| t[j * k + m] /= s);
    }
    Ok(RayleighQuantizer { k, sigma2, rho, thresholds, levels, t, tail_residual })
}
