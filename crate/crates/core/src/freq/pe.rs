//! Bivariate power-exponential target `f(θ) ∝ exp(-½ ((θ-μ)ᵀΣ⁻¹(θ-μ))²)` and
//! its mean-field approximations, either in the original coordinates or
//! after a unit-Jacobian linear map that diagonalizes the precision.
//!
//! Writing the precision in the working coordinates as `[[a, b], [b, c]]`,
//! the mean-field factor of the first coordinate is
//! `exp(-½ (a²t⁴ + 4ab m₁ t³ + (4b² + 2ac) m₂ t² + 4bc m₃ t))`
//! with `m_k` the `k`-th moment of the other factor; the second coordinate
//! swaps `a` and `c`. Both rotation and shear have unit Jacobian, so the
//! KLD can be evaluated in the working coordinates.

use crate::special::{adaptive_simpson, simpson_2d_doubling};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Half-width of every quadrature box, in standard deviations of `Σ`.
const SPAN: f64 = 8.0;
const MOMENT_RTOL: f64 = 1e-10;
const KLD_RTOL: f64 = 1e-7;
const KLD_ATOL: f64 = 1e-12;
const KLD_N0: usize = 64;
const KLD_MAX_N: usize = 4096;
const MAX_CYCLES: usize = 1000;
const MOMENT_TOL: f64 = 1e-12;
/// `exp(-745)` underflows; the integrand is zero beyond.
const LOG_UNDERFLOW: f64 = -745.0;
/// Factors are far narrower than the `±8σ` box at strong correlation; a
/// single adaptive pass can sample only their flat tails and stop early.
const PANELS: usize = 64;

fn panel_integral<F: Fn(f64) -> f64>(f: F, half_width: f64) -> Result<f64> {
    let h = 2.0 * half_width / PANELS as f64;
    (0..PANELS).map(|k| {
        let a = -half_width + h * k as f64;
        adaptive_simpson(&f, a, a + h, MOMENT_RTOL)
    }).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeModel {
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeMethod {
    /// Mean field in `θ`.
    Vb,
    /// Mean field in the eigen-coordinates `φ = Qᵀ(θ-μ)`.
    TvbEigen,
    /// Mean field in `φ = U(θ-μ)`, `U` the unit upper factor of `Σ⁻¹ = UᵀDU`.
    TvbLdu,
}

impl PeModel {
    pub fn new(mu: [f64; 2], sigma: [f64; 2], rho: f64) -> Result<Self> {
        if !(sigma[0] > 0.0 && sigma[1] > 0.0) || !(rho.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("Σ must be positive definite: σ = {sigma:?}, ρ = {rho}")));
        }
        Ok(Self { mu, sigma, rho })
    }

    pub fn covariance(&self) -> [f64; 3] {
        let [s1, s2] = self.sigma;
        [s1 * s1, self.rho * s1 * s2, s2 * s2]
    }

    /// `Σ⁻¹` as `[a, b, c]`.
    pub fn precision(&self) -> [f64; 3] {
        let [s11, s12, s22] = self.covariance();
        let det = s11 * s22 - s12 * s12;
        [s22 / det, -s12 / det, s11 / det]
    }

    /// `ln(√2/π^{3/2}) - ½ ln|Σ|`.
    pub fn log_norm(&self) -> f64 {
        let [s11, s12, s22] = self.covariance();
        0.5 * 2f64.ln() - 1.5 * PI.ln() - 0.5 * (s11 * s22 - s12 * s12).ln()
    }

    pub fn log_density(&self, theta: [f64; 2]) -> f64 {
        let d = [theta[0] - self.mu[0], theta[1] - self.mu[1]];
        self.log_norm() - 0.5 * quad_form(self.precision(), d).powi(2)
    }

    /// Row-major `A` of the working coordinates `φ = A(θ-μ)`; `|det A| = 1`.
    pub fn transform(&self, method: PeMethod) -> [[f64; 2]; 2] {
        let [a, b, c] = self.precision();
        match method {
            PeMethod::Vb => [[1.0, 0.0], [0.0, 1.0]],
            PeMethod::TvbLdu => [[1.0, b / a], [0.0, 1.0]],
            PeMethod::TvbEigen => {
                if b == 0.0 {
                    return [[1.0, 0.0], [0.0, 1.0]];
                }
                let half = 0.5 * (a - c);
                let l1 = 0.5 * (a + c) + half.hypot(b);
                // (b, l1 - a) is an eigenvector for l1; the other is its rotation
                let (vx, vy) = (b, l1 - a);
                let norm = vx.hypot(vy);
                let (ux, uy) = (vx / norm, vy / norm);
                [[ux, uy], [-uy, ux]]
            }
        }
    }
}

#[inline]
fn quad_form([a, b, c]: [f64; 3], d: [f64; 2]) -> f64 {
    a * d[0] * d[0] + 2.0 * b * d[0] * d[1] + c * d[1] * d[1]
}

/// `A⁻ᵀ P A⁻¹` as `[a, b, c]`.
fn congruence(p: [f64; 3], t: [[f64; 2]; 2]) -> [f64; 3] {
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
    let pm = [[p[0], p[1]], [p[1], p[2]]];
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| inv[k][i] * pm[k][l] * inv[l][j]).sum();
        }
    }
    [out[0][0], 0.5 * (out[0][1] + out[1][0]), out[1][1]]
}

/// `A Σ Aᵀ` diagonal.
fn transformed_variances(cov: [f64; 3], t: [[f64; 2]; 2]) -> [f64; 2] {
    let s = [[cov[0], cov[1]], [cov[1], cov[2]]];
    let mut out = [0.0; 2];
    for (i, v) in out.iter_mut().enumerate() {
        *v = (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| t[i][k] * s[k][l] * t[i][l]).sum();
    }
    out
}

/// `exp(-½ Σ_k c_k t^k)` on `[-half_width, half_width]`, normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticFactor {
    /// Coefficients of `t, t², t³, t⁴`.
    pub coeffs: [f64; 4],
    pub half_width: f64,
    log_z: f64,
}

impl QuarticFactor {
    fn new(coeffs: [f64; 4], half_width: f64) -> Result<Self> {
        let mut f = Self { coeffs, half_width, log_z: 0.0 };
        // shift by the grid maximum so the normalizer neither overflows nor underflows
        let shift = (0..=4000)
            .map(|i| f.exponent(-half_width + 2.0 * half_width * i as f64 / 4000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let z = panel_integral(|t| (f.exponent(t) - shift).exp(), half_width)?;
        if !(z > 0.0) {
            return Err(Error::Quadrature("mean-field factor has zero mass".into()));
        }
        f.log_z = shift + z.ln();
        Ok(f)
    }

    #[inline]
    fn exponent(&self, t: f64) -> f64 {
        let [c1, c2, c3, c4] = self.coeffs;
        -0.5 * t * (c1 + t * (c2 + t * (c3 + t * c4)))
    }

    #[inline]
    pub fn log_pdf(&self, t: f64) -> f64 {
        self.exponent(t) - self.log_z
    }

    /// `(E t, E t², E t³)`.
    pub fn moments(&self) -> Result<[f64; 3]> {
        let mut m = [0.0; 3];
        for (k, v) in m.iter_mut().enumerate() {
            let p = (k + 1) as i32;
            *v = panel_integral(|t| t.powi(p) * self.log_pdf(t).exp(), self.half_width)?;
        }
        Ok(m)
    }
}

/// Factor of coordinate `i` given the moments of the other one.
fn factor(p: [f64; 3], i: usize, other: [f64; 3], half_width: f64) -> Result<QuarticFactor> {
    let (a, b, c) = if i == 0 { (p[0], p[1], p[2]) } else { (p[2], p[1], p[0]) };
    let coeffs = [4.0 * b * c * other[2], (4.0 * b * b + 2.0 * a * c) * other[1], 4.0 * a * b * other[0], a * a];
    QuarticFactor::new(coeffs, half_width)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeApproximation {
    pub model: PeModel,
    pub method: PeMethod,
    pub transform: [[f64; 2]; 2],
    /// Precision in the working coordinates, `[a, b, c]`.
    pub working_precision: [f64; 3],
    pub factors: [QuarticFactor; 2],
    pub cycles: usize,
    /// `KL(f̃ ‖ f)`.
    pub kld: f64,
}

impl PeApproximation {
    pub fn log_density(&self, theta: [f64; 2]) -> f64 {
        let d = [theta[0] - self.model.mu[0], theta[1] - self.model.mu[1]];
        let t = self.transform;
        let phi = [t[0][0] * d[0] + t[0][1] * d[1], t[1][0] * d[0] + t[1][1] * d[1]];
        self.factors[0].log_pdf(phi[0]) + self.factors[1].log_pdf(phi[1])
    }
}

/// Iterates the two mean-field factors to a fixed point of their moments,
/// then integrates `f̃ ln(f̃/f)` on the `±8σ` box.
pub fn pe_approximate(model: &PeModel, method: PeMethod) -> Result<PeApproximation> {
    let transform = model.transform(method);
    let p = congruence(model.precision(), transform);
    let var = transformed_variances(model.covariance(), transform);
    let hw = [SPAN * var[0].sqrt(), SPAN * var[1].sqrt()];

    let mut m2 = [0.0, var[1], 0.0];
    let mut f1 = factor(p, 0, m2, hw[0])?;
    let mut m1 = f1.moments()?;
    let mut cycles = 1;
    let mut f2 = factor(p, 1, m1, hw[1])?;
    loop {
        let next2 = f2.moments()?;
        let settled = (0..3).all(|k| (next2[k] - m2[k]).abs() <= MOMENT_TOL * (1.0 + m2[k].abs()));
        m2 = next2;
        if settled || cycles >= MAX_CYCLES {
            break;
        }
        f1 = factor(p, 0, m2, hw[0])?;
        m1 = f1.moments()?;
        f2 = factor(p, 1, m1, hw[1])?;
        cycles += 1;
    }

    let log_norm = model.log_norm();
    let integrand = |x: f64, y: f64| {
        let lq = f1.log_pdf(x) + f2.log_pdf(y);
        if lq < LOG_UNDERFLOW {
            return 0.0;
        }
        let lf = log_norm - 0.5 * quad_form(p, [x, y]).powi(2);
        lq.exp() * (lq - lf)
    };
    let kld = simpson_2d_doubling(&integrand, (-hw[0], hw[0]), (-hw[1], hw[1]), KLD_N0, KLD_RTOL, KLD_ATOL, KLD_MAX_N)?;
    Ok(PeApproximation { model: *model, method, transform, working_precision: p, factors: [f1, f2], cycles, kld })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeRow {
    pub rho: f64,
    pub kld_vb: f64,
    pub kld_tvb: f64,
}

/// KLD of plain and transformed VB across correlations, `μ = [2.5, 1]`,
/// `σ = [0.5, 1.5]`.
pub fn pe_demo(rhos: &[f64], tvb: PeMethod) -> Result<Vec<PeRow>> {
    rhos.iter()
        .map(|&rho| {
            let model = PeModel::new([2.5, 1.0], [0.5, 1.5], rho)?;
            Ok(PeRow {
                rho,
                kld_vb: pe_approximate(&model, PeMethod::Vb)?.kld,
                kld_tvb: pe_approximate(&model, tvb)?.kld,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transforms_diagonalize() {
        let m = PeModel::new([0.0, 0.0], [0.5, 1.5], 0.6).unwrap();
        for method in [PeMethod::TvbEigen, PeMethod::TvbLdu] {
            let t = m.transform(method);
            assert!(((t[0][0] * t[1][1] - t[0][1] * t[1][0]).abs() - 1.0).abs() < 1e-14);
            let p = congruence(m.precision(), t);
            assert!(p[1].abs() < 1e-12 * (p[0] + p[2]), "{method:?}: {p:?}");
        }
    }
}
