//! Exhaustive posterior over all `M^n` trajectories. Reference only.

use super::HmcModel;
use crate::{Error, Result};

pub const BRUTE_LIMIT: u128 = 1_000_000;

/// Normalized `f(l_1..l_n | x)`. Trajectory index is mixed-radix with `l_1`
/// most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct BrutePosterior {
    pub states: usize,
    pub n: usize,
    pub prob: Vec<f64>,
}

impl BrutePosterior {
    pub fn new(model: &HmcModel) -> Result<Self> {
        let (mm, n) = (model.states(), model.n());
        let size = (mm as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > BRUTE_LIMIT {
            return Err(Error::TooLarge { size, limit: BRUTE_LIMIT });
        }
        let mut prob = Vec::with_capacity(size as usize);
        let mut labels = vec![0usize; n];
        for idx in 0..size as usize {
            Self::decode_into(mm, idx, &mut labels);
            let mut v = model.initial()[labels[0]] * model.psi(0)[labels[0]];
            for i in 1..n {
                v *= model.t(labels[i], labels[i - 1]) * model.psi(i)[labels[i]];
            }
            prob.push(v);
        }
        let z: f64 = prob.iter().sum();
        if z <= 0.0 {
            return Err(Error::DegenerateObservation(0));
        }
        prob.iter_mut().for_each(|p| *p /= z);
        Ok(Self { states: mm, n, prob })
    }

    fn decode_into(mm: usize, mut idx: usize, out: &mut [usize]) {
        for l in out.iter_mut().rev() {
            *l = idx % mm;
            idx /= mm;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let mut l = vec![0; self.n];
        Self::decode_into(self.states, idx, &mut l);
        l
    }

    pub fn index(&self, labels: &[usize]) -> usize {
        labels.iter().fold(0, |a, &l| a * self.states + l)
    }

    pub fn prob_of(&self, labels: &[usize]) -> f64 {
        self.prob[self.index(labels)]
    }

    /// `n×M` row-major per-time marginals.
    pub fn marginals(&self) -> Vec<f64> {
        let mm = self.states;
        let mut out = vec![0.0; self.n * mm];
        for (idx, &p) in self.prob.iter().enumerate() {
            for (i, l) in self.decode(idx).into_iter().enumerate() {
                out[i * mm + l] += p;
            }
        }
        out
    }

    /// Most probable trajectory; ties go to the lexicographically smallest.
    pub fn joint_argmax(&self) -> Vec<usize> {
        self.decode(crate::argmax(&self.prob))
    }

    /// `n×M` profile: for each `(i, k)`, the max probability over trajectories
    /// with `l_i = k`, normalized per row.
    pub fn profile(&self) -> Vec<f64> {
        let mm = self.states;
        let mut out = vec![0.0f64; self.n * mm];
        for (idx, &p) in self.prob.iter().enumerate() {
            for (i, l) in self.decode(idx).into_iter().enumerate() {
                out[i * mm + l] = out[i * mm + l].max(p);
            }
        }
        for row in out.chunks_exact_mut(mm) {
            super::normalize(row);
        }
        out
    }

    /// `f(l_i = cur | l_{i+1} = next, x)`.
    pub fn backward_conditional(&self, i: usize, next: usize, cur: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (idx, &p) in self.prob.iter().enumerate() {
            let l = self.decode(idx);
            if l[i + 1] == next {
                den += p;
                if l[i] == cur {
                    num += p;
                }
            }
        }
        num / den
    }

    /// `f(l_{i+1} = next | l_i = cur, x)`.
    pub fn forward_conditional(&self, i: usize, next: usize, cur: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (idx, &p) in self.prob.iter().enumerate() {
            let l = self.decode(idx);
            if l[i] == cur {
                den += p;
                if l[i + 1] == next {
                    num += p;
                }
            }
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_computed_three_step_table() {
        // T = [[0.9, 0.2], [0.1, 0.8]], p = (0.5, 0.5), Ψ rows (1, 2), (3, 1), (1, 1)
        let m = HmcModel::new(2, vec![0.9, 0.2, 0.1, 0.8], vec![0.5, 0.5], vec![1.0, 2.0, 3.0, 1.0, 1.0, 1.0]).unwrap();
        let b = BrutePosterior::new(&m).unwrap();
        let t = |k: usize, l: usize| [[0.9, 0.2], [0.1, 0.8]][k][l];
        let psi = [[1.0, 2.0], [3.0, 1.0]];
        let mut raw = [0.0; 8];
        for l1 in 0..2 {
            for l2 in 0..2 {
                for l3 in 0..2 {
                    raw[l1 * 4 + l2 * 2 + l3] = 0.5 * psi[0][l1] * t(l2, l1) * psi[1][l2] * t(l3, l2);
                }
            }
        }
        let z: f64 = raw.iter().sum();
        for (k, r) in raw.iter().enumerate() {
            assert_relative_eq!(b.prob[k], r / z, epsilon = 1e-15);
        }
        // (l1, l2, l3) = (0, 0, 0): 0.5 * 1 * 0.9 * 3 * 0.9
        assert_relative_eq!(raw[0], 1.215, epsilon = 1e-15);
    }

    #[test]
    fn uniform_everything_is_uniform() {
        let m = HmcModel::new(3, vec![1.0 / 3.0; 9], vec![1.0 / 3.0; 3], vec![1.0; 6]).unwrap();
        let b = BrutePosterior::new(&m).unwrap();
        assert!(b.prob.iter().all(|&p| (p - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn single_step_is_normalized_product() {
        let m = HmcModel::new(2, vec![0.5; 4], vec![0.25, 0.75], vec![0.8, 0.4]).unwrap();
        let b = BrutePosterior::new(&m).unwrap();
        assert_relative_eq!(b.prob[0], 0.2 / 0.5, epsilon = 1e-15);
    }
}
