use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random oversampling: every class below the majority count is topped up by
/// drawing its own rows with replacement. Originals come first, in input
/// order, followed by the draws.
pub fn oversample<T: Clone>(items: &[T], label: impl Fn(&T) -> usize, seed: u64) -> Vec<T> {
    let Some(n_classes) = items.iter().map(&label).max().map(|m| m + 1) else {
        return Vec::new();
    };
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, item) in items.iter().enumerate() {
        by_class[label(item)].push(i);
    }
    let majority = by_class.iter().map(Vec::len).max().unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = items.to_vec();
    for rows in by_class.iter().filter(|r| !r.is_empty()) {
        for _ in rows.len()..majority {
            out.push(items[rows[rng.random_range(0..rows.len())]].clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(v: &[(usize, usize)]) -> Vec<usize> {
        let mut c = vec![0; 3];
        for &(l, _) in v {
            c[l] += 1;
        }
        c
    }

    fn labeled(sizes: &[usize]) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (l, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                v.push((l, i));
            }
        }
        v
    }

    #[test]
    fn tops_up_minorities() {
        let out = oversample(&labeled(&[10, 2]), |x| x.0, 1);
        assert_eq!(&counts(&out)[..2], &[10, 10]);
    }

    #[test]
    fn balanced_is_unchanged() {
        let input = labeled(&[4, 4, 4]);
        assert_eq!(oversample(&input, |x| x.0, 1), input);
    }

    #[test]
    fn originals_retained() {
        let input = labeled(&[5, 3, 1]);
        let out = oversample(&input, |x| x.0, 7);
        assert_eq!(counts(&out), vec![5, 5, 5]);
        assert_eq!(&out[..input.len()], input.as_slice());
        assert!(out[input.len()..].iter().all(|x| input.contains(x)));
    }

    proptest! {
        #[test]
        fn all_counts_reach_majority(sizes in prop::collection::vec(1usize..20, 1..4), seed in 0u64..100) {
            let input = labeled(&sizes);
            let out = oversample(&input, |x| x.0, seed);
            let majority = *sizes.iter().max().unwrap();
            let c = counts(&out);
            for &count in &c[..sizes.len()] {
                prop_assert_eq!(count, majority);
            }
            prop_assert_eq!(oversample(&input, |x| x.0, seed), out);
        }
    }
}
