// Data-parallel helpers. With the `parallel` feature off every helper runs
// sequentially, which is also what small inputs do regardless of the feature.

use crate::bitset::Bitset;

/// Below this many work items the sequential path is always taken.
pub const PAR_THRESHOLD: usize = 64;

/// Builds a bitset of capacity `cap` by letting `f` mark bits for every item.
/// Partial bitsets are OR-merged, so the result is independent of scheduling.
pub fn union_over<T, F>(cap: usize, items: &[T], f: F) -> Bitset
where
    T: Sync,
    F: Fn(&T, &mut Bitset) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if items.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return items
            .par_iter()
            .fold(
                || Bitset::new(cap),
                |mut acc, it| {
                    f(it, &mut acc);
                    acc
                },
            )
            .reduce(
                || Bitset::new(cap),
                |mut a, b| {
                    a.union_with(&b);
                    a
                },
            );
    }
    let mut acc = Bitset::new(cap);
    for it in items {
        f(it, &mut acc);
    }
    acc
}

/// Order-preserving map.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if items.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Adds per-item count vectors of length `len`. Integer addition is
/// associative, so the result does not depend on the reduction order.
pub fn sum_counts<T, F>(len: usize, items: &[T], f: F) -> Vec<u64>
where
    T: Sync,
    F: Fn(&T, &mut [u64]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if items.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return items
            .par_iter()
            .fold(
                || vec![0u64; len],
                |mut acc, it| {
                    f(it, &mut acc);
                    acc
                },
            )
            .reduce(
                || vec![0u64; len],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
    }
    let mut acc = vec![0u64; len];
    for it in items {
        f(it, &mut acc);
    }
    acc
}

/// First index in `0..n` satisfying `pred`, or `None`. Deterministic: the
/// smallest witness is returned even when searched in parallel.
pub fn find_first<F>(n: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return (0..n).into_par_iter().find_first(|&i| pred(i));
    }
    (0..n).find(|&i| pred(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_over_matches_sequential() {
        let items: Vec<u32> = (0..500).collect();
        let s = union_over(1000, &items, |&i, acc| {
            acc.insert((i * 7) % 1000);
        });
        let expected = Bitset::from_ids(1000, (0..500).map(|i| (i * 7) % 1000));
        assert_eq!(s, expected);
    }

    #[test]
    fn find_first_is_smallest() {
        assert_eq!(find_first(10_000, |i| i % 997 == 996), Some(996));
        assert_eq!(find_first(10, |_| false), None);
    }

    #[test]
    fn sum_counts_totals() {
        let items: Vec<usize> = (0..300).collect();
        let v = sum_counts(3, &items, |&i, acc| acc[i % 3] += 1);
        assert_eq!(v, vec![100, 100, 100]);
    }
}
