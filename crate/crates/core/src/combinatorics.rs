//! Binomial coefficients and fixed-weight enumeration helpers.

use num_bigint::BigUint;

/// Exact binomial coefficient as a big integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Binomial coefficient clamped into `usize`; panics on overflow.
pub fn binomial_usize(n: usize, k: usize) -> usize {
    use std::convert::TryFrom;
    usize::try_from(binomial(n, k)).expect("binomial overflows usize")
}

/// Number of bits needed to represent `x`, i.e. `floor(log2 x) + 1` for
/// `x >= 1` and 0 for `x = 0`.
pub fn bit_length(x: &BigUint) -> usize {
    x.bits() as usize
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: &BigUint) -> usize {
    if *x <= BigUint::from(1u32) {
        0
    } else {
        bit_length(&(x - 1u32))
    }
}

/// Visit every `k`-subset of `0..n` in lexicographic order. The callback
/// receives the sorted index slice and returns `false` to stop early.
/// Returns `false` when stopped early.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_usize(4, 2), 6);
        assert_eq!(binomial_usize(22, 2), 231);
        assert_eq!(binomial_usize(0, 0), 1);
        assert_eq!(binomial_usize(3, 5), 0);
        assert_eq!(binomial_usize(24, 11), 2_496_144);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(ceil_log2(&BigUint::from(1u32)), 0);
        assert_eq!(ceil_log2(&BigUint::from(7u32)), 3);
        assert_eq!(ceil_log2(&BigUint::from(8u32)), 3);
        assert_eq!(ceil_log2(&BigUint::from(9u32)), 4);
        assert_eq!(bit_length(&BigUint::from(16u32)), 5);
    }

    #[test]
    fn combinations_cover_all_subsets() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen.len(), 10);
        assert_eq!(seen.first().unwrap(), &vec![0, 1, 2]);
        assert_eq!(seen.last().unwrap(), &vec![2, 3, 4]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn combinations_edge_cases() {
        let mut count = 0;
        for_each_combination(4, 0, |c| {
            assert!(c.is_empty());
            count += 1;
            true
        });
        assert_eq!(count, 1);

        let mut count = 0;
        for_each_combination(3, 3, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);

        // Early stop.
        let mut count = 0;
        let finished = for_each_combination(6, 2, |_| {
            count += 1;
            count < 4
        });
        assert!(!finished);
        assert_eq!(count, 4);
    }
}
