use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub n_items: usize,
    pub k_folds: usize,
    pub seed: u64,
    /// `assignment[i]` is the fold holding item `i`.
    pub assignment: Vec<usize>,
}

/// Shuffles `0..n` with the seeded generator and deals the permutation into
/// `k` contiguous blocks. The first `n % k` folds get one extra item.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 || k > n {
        return Err(Error::contract(format!("cannot split {n} items into {k} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut assignment = vec![0; n];
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &item in &perm[start..start + size] {
            assignment[item] = fold;
        }
        start += size;
    }
    Ok(FoldSplit {
        n_items: n,
        k_folds: k,
        seed,
        assignment,
    })
}

impl FoldSplit {
    /// Items in fold `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_items).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_items).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k_folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_division() {
        assert_eq!(make_folds(100, 10, 3).unwrap().sizes(), vec![10; 10]);
    }

    #[test]
    fn remainder_goes_to_leading_folds() {
        assert_eq!(make_folds(13, 10, 3).unwrap().sizes(), vec![2, 2, 2, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn rejects_too_many_folds() {
        assert!(matches!(make_folds(3, 4, 0), Err(Error::Contract(_))));
        assert!(make_folds(3, 1, 0).is_err());
    }

    #[test]
    fn train_and_test_are_complementary() {
        let f = make_folds(23, 4, 9).unwrap();
        for fold in 0..4 {
            let mut all = f.test_indices(fold);
            all.extend(f.train_indices(fold));
            all.sort_unstable();
            assert_eq!(all, (0..23).collect::<Vec<_>>());
        }
    }

    proptest! {
        #[test]
        fn folds_partition_and_repeat(n in 2usize..400, k_raw in 2usize..40, seed in any::<u64>()) {
            let k = k_raw.min(n);
            let f = make_folds(n, k, seed).unwrap();
            prop_assert_eq!(f.assignment.len(), n);
            let sizes = f.sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
            prop_assert!(spread <= 1);
            prop_assert_eq!(make_folds(n, k, seed).unwrap(), f);
        }
    }
}
