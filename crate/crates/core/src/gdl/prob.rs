//! Probabilistic uses of the engine: the chain-rule conditional of a factored
//! joint and the expected log of a reference model via dual numbers.

use super::dual::Dual;
use super::factor::{product, reduce, Factor, FactorModel, OpCount};
use super::fb::fb_reduce_single;
use super::semiring::{DualSumProduct, SumProduct};
use super::topology::CiTopology;
use crate::{safe_ln, Error, Result};

/// `f(x_[i] | x_{η_i})` for the joint `f ∝ g_1 ⋯ g_n`, with `i` 1-based.
///
/// Equals `g_i ⊙ ĝ_{1:i-1}` normalized over the variables last needed by
/// factor `i`. Rows whose mass is zero come back as NaN.
pub fn conditional_nln(model: &FactorModel<f64>, i: usize) -> Result<Factor<f64>> {
    let n = model.n();
    if i == 0 || i > n {
        return Err(Error::InvalidSplit { index: i, max: n });
    }
    let topo = CiTopology::new(model.m(), model.index_sets());
    let g = model.factors();
    let mm = model.alphabet();
    let mut c = OpCount::default();
    let mut bar = g[0].clone();
    for j in 1..i {
        let hat = reduce(&SumProduct, &bar, topo.nln(j - 1), mm, &mut c);
        bar = product(&SumProduct, &g[j], &hat, mm, &mut c);
    }
    let z = reduce(&SumProduct, &bar, topo.nln(i - 1), mm, &mut c).map(|v| 1.0 / v);
    Ok(product(&SumProduct, &bar, &z, mm, &mut c))
}

/// `E_f[Σ_i log q_i]` where `f = g_1 ⋯ g_n` is a normalized joint and `q`
/// shares its factor structure. Zero entries of `q` contribute `LOG_ZERO`.
pub fn dual_entropy(f: &FactorModel<f64>, q: &FactorModel<f64>) -> Result<f64> {
    if f.m() != q.m() || f.alphabet() != q.alphabet() || f.index_sets() != q.index_sets() {
        return Err(Error::InvalidModel("f and q must share variables and index sets".into()));
    }
    if f.factors().iter().any(|g| g.table.iter().any(|&v| !(v >= 0.0))) {
        return Err(Error::InvalidModel("f tables must be non-negative".into()));
    }
    let all: Vec<usize> = (0..f.m()).collect();
    let total = fb_reduce_single(f, &SumProduct, &all, None)?.factor.table[0];
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidModel(format!("f sums to {total}, not 1")));
    }
    let factors = f
        .factors()
        .iter()
        .zip(q.factors())
        .map(|(fg, qg)| Factor {
            vars: fg.vars.clone(),
            table: fg.table.iter().zip(&qg.table).map(|(&a, &b)| Dual::new(a, a * safe_ln(b))).collect(),
        })
        .collect();
    let dual = FactorModel::new(f.m(), f.alphabet(), factors)?;
    let r = fb_reduce_single(&dual, &DualSumProduct, &all, None)?;
    Ok(r.factor.table[0].angle())
}
