//! Classical single-tone estimators for `x_i = a e^{jΩi} + w_i`.

use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// `|Σ_i x_i e^{-jΩ_g(i-1)}|²` on `Ω_g = 2πg/(pad·n)`, `g = 0..pad·n`.
pub fn periodogram(x: &[Complex64], pad: usize) -> Vec<f64> {
    spectrum(x, pad).iter().map(|c| c.norm_sqr()).collect()
}

/// Zero-padded forward DFT `Σ_{i=0}^{n-1} x_{i+1} e^{-j2πgi/(pad·n)}`.
pub(crate) fn spectrum(x: &[Complex64], pad: usize) -> Vec<Complex64> {
    let len = pad.max(1) * x.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..x.len()].copy_from_slice(x);
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchRange {
    /// `[0, 2π)`: complex exponentials.
    Full,
    /// `[0, π)`: real sinusoids, whose spectrum is mirrored.
    Half,
}

/// Grid maximizer of the periodogram; ties go to the lowest frequency.
pub fn periodogram_ml(x: &[Complex64], pad: usize, range: SearchRange) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument("periodogram needs n ≥ 2".into()));
    }
    let p = periodogram(x, pad);
    let len = p.len();
    let upto = match range {
        SearchRange::Full => len,
        SearchRange::Half => len / 2,
    };
    let g = crate::argmax(&p[..upto.max(1)]);
    Ok(2.0 * PI * g as f64 / len as f64)
}

/// Phase-increment weights `w_t = (3/2) n/(n²-1) [1 - ((2t-n)/n)²]` for
/// the increments `t = 1..n-1`; they sum to one.
pub fn kay_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let c = 1.5 * nf / (nf * nf - 1.0);
    (1..n)
        .map(|t| {
            let u = (2.0 * t as f64 - nf) / nf;
            c * (1.0 - u * u)
        })
        .collect()
}

/// Weighted average of `arg(x_i x*_{i-1})`.
pub fn kay_estimate(x: &[Complex64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument("Kay's estimator needs n ≥ 2".into()));
    }
    if let Some(i) = x.iter().position(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroSample(i + 1));
    }
    let w = kay_weights(x.len());
    Ok(x.windows(2).zip(&w).map(|(p, w)| w * (p[1] * p[0].conj()).arg()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitzWindow {
    /// Lags `1..=L`.
    Lags(usize),
    /// Every lag `1..=n-1`, normalized by `2/(n(n-1))`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitzEstimate {
    pub omega: f64,
    /// Some lag phase came within 10% of `±π`; the unwrapped sum is unreliable.
    pub wrap_warning: bool,
}

/// Sample autocorrelation `R[m] = (1/(n-m)) Σ_{i>m} x_i x*_{i-m}`.
pub fn autocorrelation(x: &[Complex64], m: usize) -> Complex64 {
    let n = x.len();
    let s: Complex64 = (m..n).map(|i| x[i] * x[i - m].conj()).sum();
    s / (n - m) as f64
}

/// `Ω̂ = 2/(L(L+1)) Σ_{m=1}^{L} arg R[m]`.
pub fn fitz_estimate(x: &[Complex64], window: FitzWindow) -> Result<FitzEstimate> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("Fitz's estimator needs n ≥ 2".into()));
    }
    let l = match window {
        FitzWindow::Full => n - 1,
        FitzWindow::Lags(l) if (1..n).contains(&l) => l,
        FitzWindow::Lags(l) => {
            return Err(Error::InvalidArgument(format!("lag window {l} outside 1..={}", n - 1)))
        }
    };
    let mut sum = 0.0;
    let mut wrap_warning = false;
    for m in 1..=l {
        let phase = autocorrelation(x, m).arg();
        wrap_warning |= phase.abs() > 0.9 * PI;
        sum += phase;
    }
    let norm = match window {
        FitzWindow::Full => 2.0 / (n as f64 * (n as f64 - 1.0)),
        FitzWindow::Lags(_) => 2.0 / (l as f64 * (l as f64 + 1.0)),
    };
    Ok(FitzEstimate { omega: norm * sum, wrap_warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(omega: f64, n: usize) -> Vec<Complex64> {
        (1..=n).map(|i| Complex64::from_polar(1.0, omega * i as f64)).collect()
    }

    #[test]
    fn on_bin_tone_hits_its_bin() {
        let x = tone(2.0 * PI * 5.0 / 64.0, 64);
        let w = periodogram_ml(&x, 1, SearchRange::Full).unwrap();
        assert!((w - 2.0 * PI * 5.0 / 64.0).abs() < 1e-12);
        let dc = [Complex64::new(1.0, 0.0); 2];
        assert_eq!(periodogram_ml(&dc, 1, SearchRange::Full).unwrap(), 0.0);
    }

    #[test]
    fn two_sample_kay_is_one_increment() {
        let x = [Complex64::from_polar(1.0, 0.2), Complex64::from_polar(2.0, 0.9)];
        let w = kay_weights(2)[0];
        assert_eq!(w, 1.0);
        assert!((kay_estimate(&x).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(kay_estimate(&[Complex64::new(0.0, 0.0), x[1]]), Err(Error::ZeroSample(1))));
    }

    #[test]
    fn full_window_forms_agree() {
        let x = tone(0.03, 20);
        let a = fitz_estimate(&x, FitzWindow::Full).unwrap().omega;
        let b = fitz_estimate(&x, FitzWindow::Lags(19)).unwrap().omega;
        assert!((a - b).abs() < 1e-15 && (a - 0.03).abs() < 1e-12);
    }
}
