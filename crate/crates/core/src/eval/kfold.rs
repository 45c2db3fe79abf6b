use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;

/// How samples are assigned to folds.
#[derive(Debug, Clone, Copy)]
pub enum Folding<'a> {
    /// Consecutive blocks; the first `n % k` folds get one extra sample.
    Contiguous,
    /// One fold per distinct group id, in ascending id order.
    Grouped(&'a [u32]),
    /// Contiguous blocks over a seeded permutation.
    Shuffled(u64),
}

/// Splits `0..n` into `k` disjoint held-out index sets covering every index once.
pub fn kfold_split(n: usize, k: usize, folding: Folding<'_>) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::InvalidK { k, n });
    }
    match folding {
        Folding::Contiguous => Ok(blocks(&(0..n).collect::<Vec<_>>(), k)),
        Folding::Shuffled(seed) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut folds = blocks(&order, k);
            for f in &mut folds {
                f.sort_unstable();
            }
            Ok(folds)
        }
        Folding::Grouped(groups) => {
            if groups.len() != n {
                return Err(EvalError::GroupLength {
                    expected: n,
                    got: groups.len(),
                });
            }
            let mut ids: Vec<u32> = groups.to_vec();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != k {
                return Err(EvalError::GroupCount {
                    k,
                    groups: ids.len(),
                });
            }
            let mut folds = vec![Vec::new(); k];
            for (i, g) in groups.iter().enumerate() {
                let f = ids.binary_search(g).expect("id collected above");
                folds[f].push(i);
            }
            Ok(folds)
        }
    }
}

fn blocks(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    let (base, extra) = (n / k, n % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn contiguous_pairs() {
        let f = kfold_split(8, 4, Folding::Contiguous).unwrap();
        assert_eq!(f, vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
        let uneven = kfold_split(7, 3, Folding::Contiguous).unwrap();
        assert_eq!(uneven, vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn grouped_by_recording() {
        let sizes = [4897usize, 3771, 4843, 5127, 4963, 4848, 4983, 4728];
        let mut groups = Vec::new();
        for (id, &s) in sizes.iter().enumerate() {
            groups.extend(std::iter::repeat(id as u32 * 10).take(s));
        }
        let f = kfold_split(groups.len(), 8, Folding::Grouped(&groups)).unwrap();
        let got: Vec<usize> = f.iter().map(Vec::len).collect();
        assert_eq!(got, sizes);
        assert_eq!(sizes.iter().sum::<usize>(), 38160);
    }

    #[test]
    fn grouped_orders_ids_ascending() {
        let groups = [5, 5, 1, 3, 1, 3];
        let f = kfold_split(6, 3, Folding::Grouped(&groups)).unwrap();
        assert_eq!(f, vec![vec![2, 4], vec![3, 5], vec![0, 1]]);
    }

    #[test]
    fn errors() {
        assert!(matches!(kfold_split(5, 1, Folding::Contiguous), Err(EvalError::InvalidK { .. })));
        assert!(kfold_split(3, 4, Folding::Contiguous).is_err());
        assert!(matches!(
            kfold_split(4, 3, Folding::Grouped(&[0, 0, 1, 1])),
            Err(EvalError::GroupCount { k: 3, groups: 2 })
        ));
        assert!(kfold_split(4, 2, Folding::Grouped(&[0, 1])).is_err());
    }

    proptest! {
        #[test]
        fn partitions(n in 2usize..200, k in 2usize..20, seed in any::<u64>()) {
            prop_assume!(k <= n);
            for folding in [Folding::Contiguous, Folding::Shuffled(seed)] {
                let folds = kfold_split(n, k, folding).unwrap();
                prop_assert_eq!(folds.len(), k);
                let mut all: Vec<usize> = folds.concat();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
            prop_assert_eq!(
                kfold_split(n, k, Folding::Shuffled(seed)).unwrap(),
                kfold_split(n, k, Folding::Shuffled(seed)).unwrap()
            );
        }
    }
}
