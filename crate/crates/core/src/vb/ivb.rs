use super::{ks_unchecked, softmax_into, update_flags, StoppingConfig};
use crate::hmc::HmcModel;
use crate::{argmax, safe_ln, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct VbOutcome {
    /// Final shaping parameters, `n×M` row-major.
    pub p: Vec<f64>,
    pub labels: Vec<usize>,
    /// Cycles run.
    pub nu_c: usize,
    /// Marginal updates divided by `n`.
    pub nu_e: f64,
    pub updates: usize,
    /// False when `max_cycles` ran out first.
    pub converged: bool,
}

pub fn ivb_run(model: &HmcModel, init: &[f64], cfg: &StoppingConfig) -> Result<VbOutcome> {
    ivb_run_with(model, init, cfg, |_, _| {})
}

/// As [`ivb_run`], calling `observe(cycle, p)` after every completed cycle.
///
/// The update for time `i` is
/// `p_i ∝ exp(log Ψ_i + Σ_l log T(·,l) p_{i-1}(l) + Σ_k log T(k,·) p_{i+1}(k))`
/// with `log p` in place of the first sum at `i = 1` and no second sum at `i = n`.
pub fn ivb_run_with<F: FnMut(usize, &[f64])>(
    model: &HmcModel,
    init: &[f64],
    cfg: &StoppingConfig,
    mut observe: F,
) -> Result<VbOutcome> {
    let (mm, n) = (model.states(), model.n());
    if init.len() != n * mm {
        return Err(Error::LengthMismatch(init.len(), n * mm));
    }
    if !(cfg.xi >= 0.0) {
        return Err(Error::InvalidArgument(format!("KS threshold must be non-negative, got {}", cfg.xi)));
    }
    let log_t: Vec<f64> = model.transition().iter().map(|&t| safe_ln(t)).collect();
    let log_p: Vec<f64> = model.initial().iter().map(|&v| safe_ln(v)).collect();
    let mut p = init.to_vec();
    let mut flags = vec![true; n];
    let mut v = vec![0.0; mm];
    let mut new = vec![0.0; mm];
    let (mut updates, mut cycles, mut converged) = (0usize, 0usize, false);

    while cycles < cfg.max_cycles {
        cycles += 1;
        let mut all_settled = true;
        for i in 0..n {
            if cfg.accelerated && !flags[i] {
                continue;
            }
            let psi = model.psi(i);
            for k in 0..mm {
                v[k] = safe_ln(psi[k]);
            }
            if i == 0 {
                for k in 0..mm {
                    v[k] += log_p[k];
                }
            } else {
                let prev = &p[(i - 1) * mm..i * mm];
                for k in 0..mm {
                    let row = &log_t[k * mm..(k + 1) * mm];
                    v[k] += row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            if i + 1 < n {
                let next = &p[(i + 1) * mm..(i + 2) * mm];
                for (j, &w) in next.iter().enumerate() {
                    let row = &log_t[j * mm..(j + 1) * mm];
                    for k in 0..mm {
                        v[k] += row[k] * w;
                    }
                }
            }
            softmax_into(&v, &mut new);
            let cur = &mut p[i * mm..(i + 1) * mm];
            let settled = ks_unchecked(&new, cur) <= cfg.xi;
            cur.copy_from_slice(&new);
            updates += 1;
            all_settled &= settled;
            update_flags(&mut flags, i, settled);
        }
        observe(cycles, &p);
        let done = if cfg.accelerated { flags.iter().all(|f| !f) } else { all_settled };
        if done {
            converged = true;
            break;
        }
    }
    let labels = p.chunks_exact(mm).map(argmax).collect();
    Ok(VbOutcome { p, labels, nu_c: cycles, nu_e: updates as f64 / n as f64, updates, converged })
}
