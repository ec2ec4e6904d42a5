//! Conditionally-independent topology of a factor sequence.
//!
//! Factor positions are 0-based in storage. A split `i` counts factors in the
//! left segment, so `i = 1` separates `g_1` from `g_2..g_n`.

/// Occupancy, NLN and FA partitions of a factor sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiTopology {
    m: usize,
    sets: Vec<Vec<usize>>,
    nln: Vec<Vec<usize>>,
    fa: Vec<Vec<usize>>,
}

impl CiTopology {
    /// `sets[j]` is the ascending index set of factor `j`; every variable in `0..m`
    /// is assumed to appear somewhere.
    pub fn new(m: usize, sets: Vec<Vec<usize>>) -> Self {
        let n = sets.len();
        let mut first = vec![usize::MAX; m];
        let mut last = vec![usize::MAX; m];
        for (j, s) in sets.iter().enumerate() {
            for &v in s {
                if first[v] == usize::MAX {
                    first[v] = j;
                }
                last[v] = j;
            }
        }
        let mut nln = vec![Vec::new(); n];
        let mut fa = vec![Vec::new(); n];
        for v in 0..m {
            if last[v] != usize::MAX {
                nln[last[v]].push(v);
                fa[first[v]].push(v);
            }
        }
        Self { m, sets, nln, fa }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn index_set(&self, j: usize) -> &[usize] {
        &self.sets[j]
    }

    /// Variables whose last appearance is factor `j`.
    pub fn nln(&self, j: usize) -> &[usize] {
        &self.nln[j]
    }

    /// Variables whose first appearance is factor `j`.
    pub fn fa(&self, j: usize) -> &[usize] {
        &self.fa[j]
    }

    /// Entry `(k, c)` is true iff variable `m-1-k` belongs to factor `n-1-c`:
    /// rows run from the last variable down, columns from the last factor down.
    pub fn occupancy(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        (0..self.m)
            .rev()
            .map(|v| (0..n).rev().map(|j| self.sets[j].contains(&v)).collect())
            .collect()
    }

    /// Variables shared by `g_1..g_i` and `g_{i+1}..g_n`; empty for `i >= n`.
    pub fn eta(&self, i: usize) -> Vec<usize> {
        let left = union(&self.sets[..i.min(self.n())]);
        let right = union(&self.sets[i.min(self.n())..]);
        left.into_iter().filter(|v| right.contains(v)).collect()
    }

    /// Union of the two factors that meet at split `i`.
    pub fn in_process(&self, i: usize) -> Vec<usize> {
        let n = self.n();
        let mut s: Vec<usize> = self.sets[i - 1].clone();
        if i < n {
            s.extend_from_slice(&self.sets[i]);
        }
        s.sort_unstable();
        s.dedup();
        s
    }

    /// `(FA(i+1:n), η_i, NLN(1:i))`, a partition of the universe for `1 <= i <= n`.
    pub fn ternary_partition(&self, i: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut fa: Vec<usize> = self.fa[i..].concat();
        let mut nln: Vec<usize> = self.nln[..i].concat();
        fa.sort_unstable();
        nln.sort_unstable();
        (fa, self.eta(i), nln)
    }
}

pub(crate) fn union(sets: &[Vec<usize>]) -> Vec<usize> {
    let mut u: Vec<usize> = sets.concat();
    u.sort_unstable();
    u.dedup();
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    // 1-based sets from the worked example, shifted to 0-based.
    fn example() -> CiTopology {
        let sets = [vec![1, 2], vec![2, 3], vec![3, 4], vec![1, 3, 5]];
        CiTopology::new(5, sets.iter().map(|s| s.iter().map(|v| v - 1).collect()).collect())
    }

    fn chain() -> CiTopology {
        CiTopology::new(5, (0..4).map(|i| vec![i, i + 1]).collect())
    }

    fn one_based(s: &[usize]) -> Vec<usize> {
        s.iter().map(|v| v + 1).collect()
    }

    #[test]
    fn example_nln_and_fa() {
        let t = example();
        let nln: Vec<_> = (0..4).map(|j| one_based(t.nln(j))).collect();
        assert_eq!(nln, vec![vec![], vec![2], vec![4], vec![1, 3, 5]]);
        let fa: Vec<_> = (0..4).map(|j| one_based(t.fa(j))).collect();
        assert_eq!(fa, vec![vec![1, 2], vec![3], vec![4], vec![5]]);
    }

    #[test]
    fn chain_nln_and_fa() {
        let t = chain();
        let nln: Vec<_> = (0..4).map(|j| one_based(t.nln(j))).collect();
        assert_eq!(nln, vec![vec![1], vec![2], vec![3], vec![4, 5]]);
        let fa: Vec<_> = (0..4).map(|j| one_based(t.fa(j))).collect();
        assert_eq!(fa, vec![vec![1, 2], vec![3], vec![4], vec![5]]);
    }

    #[test]
    fn example_occupancy_matrix() {
        // rows x5..x1, columns ω4..ω1
        let want = vec![
            vec![true, false, false, false],
            vec![false, true, false, false],
            vec![true, true, true, false],
            vec![false, false, true, true],
            vec![true, false, false, true],
        ];
        assert_eq!(example().occupancy(), want);
    }

    #[test]
    fn example_ternary_partition_at_three() {
        let (fa, eta, nln) = example().ternary_partition(3);
        assert_eq!(one_based(&fa), vec![5]);
        assert_eq!(one_based(&eta), vec![1, 3]);
        assert_eq!(one_based(&nln), vec![2, 4]);
    }

    #[test]
    fn chain_eta_at_two() {
        assert_eq!(one_based(&chain().eta(2)), vec![3]);
    }

    #[test]
    fn disjoint_sets_have_empty_eta() {
        let t = CiTopology::new(4, vec![vec![0], vec![1, 2], vec![3]]);
        for i in 1..3 {
            assert!(t.eta(i).is_empty());
        }
        for j in 0..3 {
            assert_eq!(t.nln(j), t.index_set(j));
            assert_eq!(t.fa(j), t.index_set(j));
        }
    }

    #[test]
    fn single_factor_occupancy_is_all_ones() {
        let t = CiTopology::new(3, vec![vec![0, 1, 2]]);
        assert_eq!(t.occupancy(), vec![vec![true]; 3]);
    }
}
