//! Line-oriented model text format and random model generation.
//!
//! ```text
//! # comment
//! m M n
//! |ω| idx_1 .. idx_|ω| v_1 .. v_{M^|ω|}
//! ```
//! Indices are 1-based and may be listed in any order; the table is row-major
//! in the listed order, first index slowest.

use super::factor::{pow, Factor, FactorModel};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt::Write as _;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_model(text: &str) -> Result<FactorModel<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing `m M n` header"))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(hl, format!("bad integer `{t}`"))))
        .collect::<Result<_>>()?;
    let [m, mm, n] = head[..] else {
        return Err(perr(hl, "header must be exactly `m M n`"));
    };
    let mut factors = Vec::with_capacity(n);
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let d: usize = toks[0].parse().map_err(|_| perr(ln, "bad factor size"))?;
        if toks.len() < 1 + d {
            return Err(perr(ln, "truncated index list"));
        }
        let listed: Vec<usize> = toks[1..=d]
            .iter()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(perr(ln, format!("bad variable index `{t}`"))),
            })
            .collect::<Result<_>>()?;
        let want = pow(mm, d) as usize;
        if toks.len() != 1 + d + want {
            return Err(perr(ln, format!("expected {want} table values, found {}", toks.len() - 1 - d)));
        }
        let values: Vec<f64> = toks[1 + d..]
            .iter()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad value `{t}`"))))
            .collect::<Result<_>>()?;
        factors.push(to_ascending(&listed, values, mm).map_err(|e| perr(ln, e.to_string()))?);
    }
    if factors.len() != n {
        return Err(perr(hl, format!("header declares {n} factors, found {}", factors.len())));
    }
    FactorModel::new(m, mm, factors)
}

/// Re-lays a table given in `listed` variable order into ascending order.
fn to_ascending(listed: &[usize], values: Vec<f64>, mm: usize) -> Result<Factor<f64>> {
    let mut vars = listed.to_vec();
    vars.sort_unstable();
    if vars.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidModel("repeated variable in index set".into()));
    }
    if vars == listed {
        return Ok(Factor { vars, table: values });
    }
    let d = vars.len();
    // position in `listed` of each ascending variable
    let pos: Vec<usize> = vars.iter().map(|v| listed.iter().position(|w| w == v).unwrap()).collect();
    let mut table = vec![0.0; values.len()];
    let mut digits = vec![0usize; d];
    for slot in table.iter_mut() {
        let mut src = 0;
        for k in 0..d {
            let kk = pos.iter().position(|&p| p == k).unwrap();
            src = src * mm + digits[kk];
        }
        *slot = values[src];
        for k in (0..d).rev() {
            digits[k] += 1;
            if digits[k] < mm {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(Factor { vars, table })
}

pub fn write_model(model: &FactorModel<f64>) -> String {
    let mut s = format!("{} {} {}\n", model.m(), model.alphabet(), model.n());
    for f in model.factors() {
        let _ = write!(s, "{}", f.vars.len());
        for v in &f.vars {
            let _ = write!(s, " {}", v + 1);
        }
        for x in &f.table {
            let _ = write!(s, " {x:?}");
        }
        s.push('\n');
    }
    s
}

/// Random index sets over `m` variables for `n` factors, each set non-empty,
/// every variable covered.
pub fn random_index_sets<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut s: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.35)).collect();
            if s.is_empty() {
                s.push(rng.random_range(0..m));
            }
            s
        })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    for v in order {
        if !sets.iter().any(|s| s.contains(&v)) {
            let j = rng.random_range(0..n);
            sets[j].push(v);
        }
    }
    for s in &mut sets {
        s.sort_unstable();
        s.dedup();
    }
    sets
}

/// Random model with entries drawn by `value`.
pub fn random_model<R: Rng, V: Clone, F: FnMut(&mut R) -> V>(
    rng: &mut R,
    m: usize,
    alphabet: usize,
    n: usize,
    mut value: F,
) -> FactorModel<V> {
    let factors = random_index_sets(rng, m, n)
        .into_iter()
        .map(|vars| {
            let len = pow(alphabet, vars.len()) as usize;
            Factor { vars, table: (0..len).map(|_| value(rng)).collect() }
        })
        .collect();
    FactorModel::new(m, alphabet, factors).expect("generator covers every variable")
}
