//! `KLD(Π_i Mu(p_i) ‖ f(L | x))` through the backward chain factorization
//! `f(L | x) = α_n(l_n) Π_{i<n} A_i(l_{i+1}, l_i)`.

use crate::hmc::{BrutePosterior, ChainFactors, HmcModel, Smoothing};
use crate::safe_ln;

fn neg_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum()
}

/// `Σ_i p_i' log p_i - [Σ_{i<n} p_{i+1}' (log A_i) p_i + p_n' log α_n]`.
///
/// Uses `log A_i(k,l) = log T(k,l) + log α_i(l) - log Σ_l' T(k,l') α_i(l')`,
/// so each step costs `2M` logarithms instead of `M²`.
pub fn kld_vb(model: &HmcModel, sm: &Smoothing, p: &[f64]) -> f64 {
    let (mm, n) = (model.states(), model.n());
    let log_t: Vec<f64> = model.transition().iter().map(|&t| safe_ln(t)).collect();
    let row = |i: usize| &p[i * mm..(i + 1) * mm];
    let mut kld = neg_entropy(p);
    for i in 0..n - 1 {
        let (pi, pn, alpha) = (row(i), row(i + 1), sm.alpha(i));
        let mut cross = 0.0;
        for k in 0..mm {
            if pn[k] == 0.0 {
                continue;
            }
            let t = &model.transition()[k * mm..(k + 1) * mm];
            let z: f64 = t.iter().zip(alpha).map(|(a, b)| a * b).sum();
            let lt = &log_t[k * mm..(k + 1) * mm];
            let inner: f64 = lt.iter().zip(pi).map(|(a, b)| a * b).sum();
            cross += pn[k] * (inner - safe_ln(z));
        }
        cross += pi.iter().zip(alpha).filter(|(w, _)| **w > 0.0).map(|(w, a)| w * safe_ln(*a)).sum::<f64>();
        kld -= cross;
    }
    let last = row(n - 1);
    kld -= last.iter().zip(sm.alpha(n - 1)).filter(|(w, _)| **w > 0.0).map(|(w, a)| w * safe_ln(*a)).sum::<f64>();
    kld
}

/// Same quantity evaluated directly from the stored `A_i` matrices.
pub fn kld_vb_from_factors(cf: &ChainFactors, sm: &Smoothing, p: &[f64]) -> f64 {
    let mm = cf.states;
    let n = p.len() / mm;
    let row = |i: usize| &p[i * mm..(i + 1) * mm];
    let mut kld = neg_entropy(p);
    for i in 0..n - 1 {
        for k in 0..mm {
            for l in 0..mm {
                let w = row(i + 1)[k] * row(i)[l];
                if w > 0.0 {
                    kld -= w * safe_ln(cf.a(i, k, l));
                }
            }
        }
    }
    kld - row(n - 1).iter().zip(sm.alpha(n - 1)).filter(|(w, _)| **w > 0.0).map(|(w, a)| w * safe_ln(*a)).sum::<f64>()
}

/// `Σ_L f̃(L) log(f̃(L) / f(L | x))` over every trajectory.
pub fn kld_exhaustive(post: &BrutePosterior, p: &[f64]) -> f64 {
    let mm = post.states;
    let mut kld = 0.0;
    for (idx, &f) in post.prob.iter().enumerate() {
        let q: f64 = post.decode(idx).iter().enumerate().map(|(i, &l)| p[i * mm + l]).product();
        if q > 0.0 {
            kld += q * (q.ln() - safe_ln(f));
        }
    }
    kld
}
