use super::{update_flags, StoppingConfig};
use crate::hmc::HmcModel;
use crate::{argmax, safe_ln, Error, Result};

/// One accepted label change: time index, old label, new label.
pub type LabelChange = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct FcvbOutcome {
    pub labels: Vec<usize>,
    pub nu_c: usize,
    pub nu_e: f64,
    pub updates: usize,
    pub converged: bool,
    /// Every label change in the order it was made.
    pub changes: Vec<LabelChange>,
}

/// Point-mass VB: `k̂_i = argmax_k [log Ψ_i(k) + log T(k̂_{i+1}, k) + log T(k, k̂_{i-1})]`,
/// with `log p` replacing the last term at `i = 1` and no middle term at `i = n`.
/// A cycle with no label change ends the run; `cfg.xi` is not used.
pub fn fcvb_run(model: &HmcModel, init: &[usize], cfg: &StoppingConfig) -> Result<FcvbOutcome> {
    // ϑ costs M³ memory; worth it only when no larger than the Ψ table.
    let (mm, n) = (model.states(), model.n());
    fcvb_impl(model, init, cfg, mm * mm <= n)
}

fn fcvb_impl(model: &HmcModel, init: &[usize], cfg: &StoppingConfig, precompute: bool) -> Result<FcvbOutcome> {
    let (mm, n) = (model.states(), model.n());
    if init.len() != n {
        return Err(Error::LengthMismatch(init.len(), n));
    }
    if let Some(&l) = init.iter().find(|&&l| l >= mm) {
        return Err(Error::InvalidArgument(format!("initial label {} outside 1..={mm}", l + 1)));
    }
    let log_t: Vec<f64> = model.transition().iter().map(|&t| safe_ln(t)).collect();
    let log_p: Vec<f64> = model.initial().iter().map(|&v| safe_ln(v)).collect();
    // ϑ[(a*M + b)*M + k] = log T(a, k) + log T(k, b)
    let theta: Option<Vec<f64>> = precompute.then(|| {
        let mut th = vec![0.0; mm * mm * mm];
        for a in 0..mm {
            for b in 0..mm {
                for k in 0..mm {
                    th[(a * mm + b) * mm + k] = log_t[a * mm + k] + log_t[k * mm + b];
                }
            }
        }
        th
    });
    let mut labels = init.to_vec();
    let mut flags = vec![true; n];
    let mut score = vec![0.0; mm];
    let mut changes = Vec::new();
    let (mut updates, mut cycles, mut converged) = (0usize, 0usize, false);

    while cycles < cfg.max_cycles {
        cycles += 1;
        let mut changed_any = false;
        for i in 0..n {
            if cfg.accelerated && !flags[i] {
                continue;
            }
            let psi = model.psi(i);
            let interior = i > 0 && i + 1 < n;
            match (&theta, interior) {
                (Some(th), true) => {
                    let base = (labels[i + 1] * mm + labels[i - 1]) * mm;
                    for k in 0..mm {
                        score[k] = safe_ln(psi[k]) + th[base + k];
                    }
                }
                _ => {
                    for k in 0..mm {
                        let back = if i == 0 { log_p[k] } else { log_t[k * mm + labels[i - 1]] };
                        let fwd = if i + 1 < n { log_t[labels[i + 1] * mm + k] } else { 0.0 };
                        score[k] = safe_ln(psi[k]) + back + fwd;
                    }
                }
            }
            let best = argmax(&score);
            updates += 1;
            let settled = best == labels[i];
            if !settled {
                changes.push((i, labels[i], best));
                labels[i] = best;
                changed_any = true;
            }
            update_flags(&mut flags, i, settled);
        }
        let done = if cfg.accelerated { flags.iter().all(|f| !f) } else { !changed_any };
        if done {
            converged = true;
            break;
        }
    }
    Ok(FcvbOutcome { labels, nu_c: cycles, nu_e: updates as f64 / n as f64, updates, converged, changes })
}
