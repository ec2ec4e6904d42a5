//! Commutative pre-semirings: a ring-sum and a ring-product, both associative
//! and commutative, with the product distributing over the sum. Identities are
//! not required; reductions fold from the first operand.

use super::dual::Dual;
use crate::{Error, Result};
use std::fmt::Debug;

pub trait Semiring {
    type Value: Clone + Debug + PartialEq;

    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn name(&self) -> &'static str;
}

/// Ordinary (+, ×) on reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct SumProduct;

/// (max, ×) on non-negative reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxProduct;

/// (max, +) on log-values.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxSum;

/// (+, ×) on dual numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct DualSumProduct;

impl Semiring for SumProduct {
    type Value = f64;
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn name(&self) -> &'static str {
        "sum-product"
    }
}

impl Semiring for MaxProduct {
    type Value = f64;
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn name(&self) -> &'static str {
        "max-product"
    }
}

impl Semiring for MaxSum {
    type Value = f64;
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn name(&self) -> &'static str {
        "max-sum"
    }
}

impl Semiring for DualSumProduct {
    type Value = Dual;
    fn add(&self, a: &Dual, b: &Dual) -> Dual {
        *a + *b
    }
    fn mul(&self, a: &Dual, b: &Dual) -> Dual {
        *a * *b
    }
    fn name(&self) -> &'static str {
        "dual-number"
    }
}

/// Checks commutativity, associativity and distributivity on `trials` sampled
/// triples. The laws are contracts; sampling can refute them, not prove them.
pub fn validate_laws<S, G, C>(sr: &S, mut sample: G, close: C, trials: usize) -> Result<()>
where
    S: Semiring,
    G: FnMut() -> S::Value,
    C: Fn(&S::Value, &S::Value) -> bool,
{
    for _ in 0..trials {
        let (a, b, c) = (sample(), sample(), sample());
        let checks = [
            ("sum commutativity", sr.add(&a, &b), sr.add(&b, &a)),
            ("product commutativity", sr.mul(&a, &b), sr.mul(&b, &a)),
            (
                "sum associativity",
                sr.add(&sr.add(&a, &b), &c),
                sr.add(&a, &sr.add(&b, &c)),
            ),
            (
                "product associativity",
                sr.mul(&sr.mul(&a, &b), &c),
                sr.mul(&a, &sr.mul(&b, &c)),
            ),
            (
                "distributivity",
                sr.mul(&a, &sr.add(&b, &c)),
                sr.add(&sr.mul(&a, &b), &sr.mul(&a, &c)),
            ),
        ];
        for (law, lhs, rhs) in checks {
            if !close(&lhs, &rhs) {
                return Err(Error::InvalidArgument(format!(
                    "{} violates {law} on {a:?}, {b:?}, {c:?}",
                    sr.name()
                )));
            }
        }
    }
    Ok(())
}
