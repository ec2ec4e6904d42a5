//! Dense factor tables and the two table primitives: ring-product of two
//! tables and ring-sum over a subset of their variables.
//!
//! Variables are 0-based in the API. A table over `vars = [v_0 < v_1 < ...]`
//! is row-major: the last (largest) variable varies fastest.

use super::semiring::Semiring;
use crate::{Error, Result};

/// Tally of executed ring-sums and ring-products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub ring_sum: u64,
    pub ring_product: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.ring_sum + self.ring_product
    }
}

impl std::ops::AddAssign for OpCount {
    fn add_assign(&mut self, o: OpCount) {
        self.ring_sum += o.ring_sum;
        self.ring_product += o.ring_product;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor<V> {
    pub vars: Vec<usize>,
    pub table: Vec<V>,
}

impl<V: Clone> Factor<V> {
    pub fn scalar(v: V) -> Self {
        Self { vars: Vec::new(), table: vec![v] }
    }

    /// Value at a full assignment given as `(variable, state)` lookups.
    pub fn at(&self, alphabet: usize, assignment: &[usize]) -> &V {
        let mut idx = 0;
        for &v in &self.vars {
            idx = idx * alphabet + assignment[v];
        }
        &self.table[idx]
    }

    pub fn map<W, F: Fn(&V) -> W>(&self, f: F) -> Factor<W> {
        Factor { vars: self.vars.clone(), table: self.table.iter().map(f).collect() }
    }
}

/// A product of factors over `m` variables, each taking `alphabet` values.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel<V> {
    m: usize,
    alphabet: usize,
    factors: Vec<Factor<V>>,
}

impl<V: Clone> FactorModel<V> {
    pub fn new(m: usize, alphabet: usize, factors: Vec<Factor<V>>) -> Result<Self> {
        if m == 0 || alphabet == 0 {
            return Err(Error::InvalidModel("m and M must be at least 1".into()));
        }
        if factors.is_empty() {
            return Err(Error::InvalidModel("at least one factor is required".into()));
        }
        let mut seen = vec![false; m];
        for (i, f) in factors.iter().enumerate() {
            if f.vars.is_empty() {
                return Err(Error::InvalidModel(format!("factor {} has an empty index set", i + 1)));
            }
            if f.vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidModel(format!(
                    "factor {} index set must be strictly ascending",
                    i + 1
                )));
            }
            if let Some(&v) = f.vars.iter().find(|&&v| v >= m) {
                return Err(Error::InvalidModel(format!(
                    "factor {} uses variable {} outside 1..={m}",
                    i + 1,
                    v + 1
                )));
            }
            let want = table_len(alphabet, f.vars.len())?;
            if f.table.len() as u128 != want {
                return Err(Error::InvalidModel(format!(
                    "factor {} table has {} entries, expected {want}",
                    i + 1,
                    f.table.len()
                )));
            }
            for &v in &f.vars {
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidModel(format!("variable {} appears in no factor", v + 1)));
        }
        Ok(Self { m, alphabet, factors })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor<V>] {
        &self.factors
    }

    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        self.factors.iter().map(|f| f.vars.clone()).collect()
    }

    pub fn map<W: Clone, F: Fn(&V) -> W>(&self, f: F) -> FactorModel<W> {
        FactorModel {
            m: self.m,
            alphabet: self.alphabet,
            factors: self.factors.iter().map(|g| g.map(&f)).collect(),
        }
    }
}

pub(crate) fn table_len(alphabet: usize, dims: usize) -> Result<u128> {
    (alphabet as u128)
        .checked_pow(dims as u32)
        .ok_or(Error::TooLarge { size: u128::MAX, limit: u128::MAX })
}

pub(crate) fn pow(alphabet: usize, dims: usize) -> u128 {
    (alphabet as u128).pow(dims as u32)
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

/// Stride of each variable of `out_vars` inside a table over `vars`; 0 if absent.
fn strides_in(out_vars: &[usize], vars: &[usize], alphabet: usize) -> Vec<usize> {
    let mut own = vec![0usize; vars.len()];
    let mut s = 1;
    for k in (0..vars.len()).rev() {
        own[k] = s;
        s *= alphabet;
    }
    out_vars
        .iter()
        .map(|v| vars.iter().position(|w| w == v).map_or(0, |k| own[k]))
        .collect()
}

/// Ring-product of two tables over the union of their variables.
pub fn product<S: Semiring>(
    sr: &S,
    f: &Factor<S::Value>,
    g: &Factor<S::Value>,
    alphabet: usize,
    count: &mut OpCount,
) -> Factor<S::Value> {
    let vars = sorted_union(&f.vars, &g.vars);
    let sf = strides_in(&vars, &f.vars, alphabet);
    let sg = strides_in(&vars, &g.vars, alphabet);
    let len = pow(alphabet, vars.len()) as usize;
    let mut table = Vec::with_capacity(len);
    let mut digits = vec![0usize; vars.len()];
    let (mut fi, mut gi) = (0usize, 0usize);
    for _ in 0..len {
        table.push(sr.mul(&f.table[fi], &g.table[gi]));
        // odometer step, last variable fastest
        for k in (0..vars.len()).rev() {
            digits[k] += 1;
            fi += sf[k];
            gi += sg[k];
            if digits[k] < alphabet {
                break;
            }
            digits[k] = 0;
            fi -= sf[k] * alphabet;
            gi -= sg[k] * alphabet;
        }
    }
    count.ring_product += len as u64;
    Factor { vars, table }
}

/// Ring-sum of `f` over every variable of `elim` present in `f`.
pub fn reduce<S: Semiring>(
    sr: &S,
    f: &Factor<S::Value>,
    elim: &[usize],
    alphabet: usize,
    count: &mut OpCount,
) -> Factor<S::Value> {
    let keep: Vec<usize> = f.vars.iter().copied().filter(|v| !elim.contains(v)).collect();
    if keep.len() == f.vars.len() {
        return f.clone();
    }
    let so = strides_in(&f.vars, &keep, alphabet);
    let out_len = pow(alphabet, keep.len()) as usize;
    let mut acc: Vec<Option<S::Value>> = vec![None; out_len];
    let mut digits = vec![0usize; f.vars.len()];
    let mut oi = 0usize;
    for v in &f.table {
        let slot = &mut acc[oi];
        *slot = Some(match slot.take() {
            None => v.clone(),
            Some(prev) => sr.add(&prev, v),
        });
        for k in (0..f.vars.len()).rev() {
            digits[k] += 1;
            oi += so[k];
            if digits[k] < alphabet {
                break;
            }
            digits[k] = 0;
            oi -= so[k] * alphabet;
        }
    }
    count.ring_sum += (f.table.len() - out_len) as u64;
    Factor { vars: keep, table: acc.into_iter().map(|x| x.expect("every slot is hit")).collect() }
}
