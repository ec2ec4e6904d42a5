//! Forward-backward evaluation of `⊞_{x_S} g_1 ⊙ ... ⊙ g_n`, the direct
//! evaluation it replaces, and the closed-form operator counts of both.

use super::factor::{pow, product, reduce, Factor, FactorModel, OpCount};
use super::semiring::Semiring;
use super::topology::{union, CiTopology};
use crate::{Error, Result};

/// Largest joint table `naive_reduce` will enumerate.
pub const NAIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<V> {
    pub factor: Factor<V>,
    pub count: OpCount,
}

/// `⌈n/2⌉`, a valid split for every `n >= 2`.
pub fn default_split(n: usize) -> usize {
    n.div_ceil(2)
}

fn check_subset(m: usize, s: &[usize]) -> Result<Vec<usize>> {
    if let Some(&v) = s.iter().find(|&&v| v >= m) {
        return Err(Error::OperatorOutsideUniverse(v + 1));
    }
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

fn check_split(n: usize, split: Option<usize>) -> Result<usize> {
    let i = split.unwrap_or_else(|| default_split(n));
    if n >= 2 && (i == 0 || i >= n) {
        return Err(Error::InvalidSplit { index: i, max: n - 1 });
    }
    Ok(i)
}

fn meet(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

fn minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| !b.contains(v)).collect()
}

/// Ring-sum over `x_S` of the ring-product of all factors, via one forward
/// recursion over `g_1..g_i`, one backward recursion over `g_n..g_{i+1}` and
/// a combine step. `split` defaults to `⌈n/2⌉`; it is ignored when `n == 1`.
pub fn fb_reduce_single<S: Semiring>(
    model: &FactorModel<S::Value>,
    sr: &S,
    s: &[usize],
    split: Option<usize>,
) -> Result<Reduction<S::Value>> {
    let s = check_subset(model.m(), s)?;
    let n = model.n();
    let i = check_split(n, split)?;
    let g = model.factors();
    let mm = model.alphabet();
    let mut count = OpCount::default();
    if n == 1 {
        let factor = reduce(sr, &g[0], &s, mm, &mut count);
        return Ok(Reduction { factor, count });
    }
    let topo = CiTopology::new(model.m(), model.index_sets());

    let mut left = reduce(sr, &g[0], &meet(&s, topo.nln(0)), mm, &mut count);
    for j in 1..i {
        let bar = product(sr, &g[j], &left, mm, &mut count);
        left = reduce(sr, &bar, &meet(&s, topo.nln(j)), mm, &mut count);
    }
    let mut right = reduce(sr, &g[n - 1], &meet(&s, topo.fa(n - 1)), mm, &mut count);
    for j in (i..n - 1).rev() {
        let bar = product(sr, &g[j], &right, mm, &mut count);
        right = reduce(sr, &bar, &meet(&s, topo.fa(j)), mm, &mut count);
    }
    let gamma = product(sr, &right, &left, mm, &mut count);
    let factor = reduce(sr, &gamma, &meet(&s, &topo.eta(i)), mm, &mut count);
    Ok(Reduction { factor, count })
}

/// Results of a sequence of objective sets sharing one pair of recursions.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialReduction<V> {
    /// `results[k]` is a table over exactly `objectives[k]`.
    pub results: Vec<Factor<V>>,
    /// Split used to extract each result.
    pub splits: Vec<usize>,
    pub count: OpCount,
}

/// Evaluates `⊞_{x_{Ω \ S̄_k}} g_1 ⊙ ... ⊙ g_n` for every objective set `S̄_k`.
///
/// Stage 1 stores `ḡ_{1:j} = g_j ⊙ ĝ_{1:j-1}` and `ḡ_{j:n} = g_j ⊙ ĝ_{j+1:n}`
/// with every no-longer-needed (resp. first-appearance) variable summed.
/// Stage 2 serves `S̄_k` from the first split `i` whose in-process set
/// `ω_i ∪ ω_{i+1}` contains it; no recursion is re-run.
pub fn fb_reduce_sequential<S: Semiring>(
    model: &FactorModel<S::Value>,
    sr: &S,
    objectives: &[Vec<usize>],
) -> Result<SequentialReduction<S::Value>> {
    let n = model.n();
    let mm = model.alphabet();
    let g = model.factors();
    let topo = CiTopology::new(model.m(), model.index_sets());
    let mut plan = Vec::with_capacity(objectives.len());
    for obj in objectives {
        let obj = check_subset(model.m(), obj)?;
        if obj.is_empty() {
            return Err(Error::InvalidArgument("objective sets must be non-empty".into()));
        }
        let i = (1..=n)
            .find(|&i| {
                let a = topo.in_process(i);
                obj.iter().all(|v| a.contains(v))
            })
            .ok_or_else(|| Error::NotNonOverflowed(obj.iter().map(|v| v + 1).collect()))?;
        plan.push((obj, i));
    }

    let mut count = OpCount::default();
    let mut fwd: Vec<Factor<S::Value>> = Vec::with_capacity(n);
    fwd.push(g[0].clone());
    for j in 1..n {
        let hat = reduce(sr, &fwd[j - 1], topo.nln(j - 1), mm, &mut count);
        fwd.push(product(sr, &g[j], &hat, mm, &mut count));
    }
    let mut bwd: Vec<Option<Factor<S::Value>>> = vec![None; n];
    bwd[n - 1] = Some(g[n - 1].clone());
    for j in (0..n - 1).rev() {
        let next = bwd[j + 1].as_ref().expect("filled on the previous step");
        let hat = reduce(sr, next, topo.fa(j + 1), mm, &mut count);
        bwd[j] = Some(product(sr, &g[j], &hat, mm, &mut count));
    }

    let mut results = Vec::with_capacity(plan.len());
    let mut splits = Vec::with_capacity(plan.len());
    for (obj, i) in plan {
        let left = reduce(sr, &fwd[i - 1], &minus(topo.nln(i - 1), &obj), mm, &mut count);
        let joined = if i < n {
            let b = bwd[i].as_ref().expect("stage 1 fills every slot");
            let right = reduce(sr, b, &minus(topo.fa(i), &obj), mm, &mut count);
            product(sr, &right, &left, mm, &mut count)
        } else {
            left
        };
        let rest = minus(&joined.vars, &obj);
        results.push(reduce(sr, &joined, &rest, mm, &mut count));
        splits.push(i);
    }
    Ok(SequentialReduction { results, splits, count })
}

/// Direct evaluation: every entry of the joint table is an `n`-fold product,
/// then all of `x_S` is summed out. Costs `(n-1)·M^m` products and
/// `M^m - M^{m-|S|}` sums.
pub fn naive_reduce<S: Semiring>(
    model: &FactorModel<S::Value>,
    sr: &S,
    s: &[usize],
) -> Result<Reduction<S::Value>> {
    let s = check_subset(model.m(), s)?;
    let (m, mm) = (model.m(), model.alphabet());
    let size = pow(mm, m);
    if size > NAIVE_LIMIT {
        return Err(Error::TooLarge { size, limit: NAIVE_LIMIT });
    }
    let keep: Vec<usize> = (0..m).filter(|v| !s.contains(v)).collect();
    let mut acc: Vec<Option<S::Value>> = vec![None; pow(mm, keep.len()) as usize];
    let mut x = vec![0usize; m];
    let mut count = OpCount::default();
    for _ in 0..size {
        let mut it = model.factors().iter();
        let mut v = it.next().expect("models are non-empty").at(mm, &x).clone();
        for f in it {
            v = sr.mul(&v, f.at(mm, &x));
            count.ring_product += 1;
        }
        let oi = keep.iter().fold(0, |a, &k| a * mm + x[k]);
        acc[oi] = Some(match acc[oi].take() {
            None => v,
            Some(p) => {
                count.ring_sum += 1;
                sr.add(&p, &v)
            }
        });
        for k in (0..m).rev() {
            x[k] += 1;
            if x[k] < mm {
                break;
            }
            x[k] = 0;
        }
    }
    let table = acc.into_iter().map(|v| v.expect("every slot is hit")).collect();
    Ok(Reduction { factor: Factor { vars: keep, table }, count })
}

/// Exact operator count of `naive_reduce`.
pub fn direct_count(m: usize, alphabet: usize, n: usize, s_len: usize) -> OpCount {
    let full = pow(alphabet, m) as u64;
    OpCount {
        ring_sum: full - pow(alphabet, m - s_len) as u64,
        ring_product: (n as u64 - 1) * full,
    }
}

/// `[M^m, n·M^m]`, bracketing the direct evaluation of one objective.
pub fn naive_bounds(m: usize, alphabet: usize, n: usize) -> (u128, u128) {
    let full = pow(alphabet, m);
    (full, n as u128 * full)
}

/// Domain dimensions `(F_1..F_i, B_{i+1}..B_n, W_i)` of `ḡ_{1:j}`, `ḡ_{j:n}`
/// and `γ_i` for operator set `s` and split `i`.
pub fn fb_dimensions(topo: &CiTopology, s: &[usize], i: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let n = topo.n();
    let mut f_dims = Vec::with_capacity(i);
    let mut hat: Vec<usize> = Vec::new();
    for j in 0..i {
        let bar = union(&[topo.index_set(j).to_vec(), hat]);
        f_dims.push(bar.len());
        hat = minus(&bar, &meet(s, topo.nln(j)));
    }
    let left = hat;
    let mut b_dims = vec![0; n - i];
    let mut hat: Vec<usize> = Vec::new();
    for j in (i..n).rev() {
        let bar = union(&[topo.index_set(j).to_vec(), hat]);
        b_dims[j - i] = bar.len();
        hat = minus(&bar, &meet(s, topo.fa(j)));
    }
    let w = union(&[left, hat]).len();
    (f_dims, b_dims, w)
}

/// `φ_S(i) = M^{W_i} + Σ_{j>i} M^{B_j} + Σ_{j≤i} M^{F_j}`.
///
/// Each term is the size of one table the recursion materializes, so the
/// executed ring-products equal `φ - M^{F_1} - M^{B_n}` exactly and the
/// executed ring-sums never exceed `φ`.
pub fn phi(topo: &CiTopology, alphabet: usize, s: &[usize], i: usize) -> u128 {
    let (f, b, w) = fb_dimensions(topo, s, i);
    pow(alphabet, w)
        + b.iter().map(|&d| pow(alphabet, d)).sum::<u128>()
        + f.iter().map(|&d| pow(alphabet, d)).sum::<u128>()
}

/// True when some recursion step (not the final combine) sums a variable,
/// which is when the forward-backward route is strictly cheaper than direct
/// evaluation.
pub fn gdl_step_applies(topo: &CiTopology, alphabet: usize, s: &[usize], i: usize) -> bool {
    let n = topo.n();
    alphabet >= 2
        && n >= 2
        && ((0..i).any(|j| !meet(s, topo.nln(j)).is_empty())
            || (i..n).any(|j| !meet(s, topo.fa(j)).is_empty()))
}
