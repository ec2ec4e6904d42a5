//! Bessel functions and Simpson quadrature.
//!
//! Both Bessel functions switch from the power series to the Hankel
//! asymptotic expansion at a fixed argument. The switch points are chosen so
//! that the truncated asymptotic series and the power series agree to better
//! than 1e-10 there.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Power series is used for |x| up to this value for J0.
const J0_SWITCH: f64 = 12.0;
/// Power series is used for |x| up to this value for I0.
pub const I0_SWITCH: f64 = 15.0;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= J0_SWITCH {
        j0_series(ax)
    } else {
        j0_asymptotic(ax)
    }
}

pub(crate) fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2.0 {
            break;
        }
        k += 1.0;
        if k > 300.0 {
            break;
        }
    }
    sum
}

pub(crate) fn j0_asymptotic(x: f64) -> f64 {
    // a_k = ((2k-1)!!)^2 / (k! (8x)^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            a *= (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        }
        if a > prev {
            break;
        }
        prev = a;
        // P = a_0 - a_2 + a_4 - ..., Q = -a_1 + a_3 - ...
        let even_pair = (k / 2) % 2 == 0;
        if k % 2 == 0 {
            p += if even_pair { a } else { -a };
        } else {
            q += if even_pair { -a } else { a };
        }
        if a < 1e-17 {
            break;
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= I0_SWITCH {
        i0_series(ax)
    } else {
        ax.exp() * i0e_asymptotic(ax)
    }
}

/// Exponentially scaled I0: `exp(-|x|) * I0(x)`. Finite for every finite x.
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= I0_SWITCH {
        (-ax).exp() * i0_series(ax)
    } else {
        i0e_asymptotic(ax)
    }
}

pub(crate) fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `exp(-x) I0(x)` from the asymptotic series; leading term is `1/sqrt(2 pi x)`.
pub(crate) fn i0e_asymptotic(x: f64) -> f64 {
    let mut a = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        let next = a * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        if next > a || next < 1e-17 * sum {
            break;
        }
        a = next;
        sum += a;
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Composite Simpson rule with `n` (rounded up to even) sub-intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Composite Simpson with interval doubling until the relative change drops
/// below `rtol` (or the absolute change below `atol`).
pub fn simpson_doubling<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n0: usize,
    rtol: f64,
    atol: f64,
    max_n: usize,
) -> Result<f64> {
    let mut n = n0.max(2);
    let mut prev = simpson(&f, a, b, n);
    while n < max_n {
        n *= 2;
        let cur = simpson(&f, a, b, n);
        let diff = (cur - prev).abs();
        if diff <= rtol * cur.abs() || diff <= atol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "1-D Simpson on [{a}, {b}] did not settle within {max_n} intervals"
    )))
}

/// Adaptive Simpson on `[a, b]` to relative tolerance `rtol`.
///
/// The absolute tolerance handed to the recursion is `rtol` times a
/// 256-interval composite estimate of the integral of `|f|`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let scale = simpson(|x| f(x).abs(), a, b, 256);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let eps = rtol * scale;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = 2_000_000usize;
    let r = asr(&f, a, b, fa, fm, fb, whole, eps, 60, &mut budget);
    if budget == 0 {
        return Err(Error::Quadrature("adaptive Simpson evaluation budget exhausted".into()));
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn asr<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    budget: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *budget = budget.saturating_sub(2);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || *budget == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    asr(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, budget)
        + asr(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, budget)
}

/// Tensor-product composite Simpson over a rectangle with `nx * ny` cells.
pub fn simpson_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    nx: usize,
    ny: usize,
) -> f64 {
    let nx = (nx.max(2) + 1) & !1;
    let ny = (ny.max(2) + 1) & !1;
    let hx = (bx - ax) / nx as f64;
    let hy = (by - ay) / ny as f64;
    let wy: Vec<f64> = (0..=ny).map(|j| simpson_weight(j, ny)).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| ay + hy * j as f64).collect();
    let mut total = 0.0;
    for i in 0..=nx {
        let wx = simpson_weight(i, nx);
        let x = ax + hx * i as f64;
        let mut row = 0.0;
        for j in 0..=ny {
            row += wy[j] * f(x, ys[j]);
        }
        total += wx * row;
    }
    total * hx * hy / 9.0
}

#[inline]
fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// 2-D Simpson with simultaneous doubling along both axes.
pub fn simpson_2d_doubling<F: Fn(f64, f64) -> f64>(
    f: &F,
    x: (f64, f64),
    y: (f64, f64),
    n0: usize,
    rtol: f64,
    atol: f64,
    max_n: usize,
) -> Result<f64> {
    let mut n = n0.max(2);
    let mut prev = simpson_2d(f, x, y, n, n);
    while n < max_n {
        n *= 2;
        let cur = simpson_2d(f, x, y, n, n);
        let diff = (cur - prev).abs();
        if diff <= rtol * cur.abs() || diff <= atol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "2-D Simpson did not settle within {max_n} intervals per axis"
    )))
}
