//! Lexicographic enumeration of index subsets.

use std::ops::ControlFlow;

/// Calls `visit` with every `size`-subset of `0..n` in lexicographic order,
/// stopping early when it breaks.
pub fn for_each_combination<B>(
    n: usize,
    size: usize,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> Option<B> {
    if size > n {
        return None;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if let ControlFlow::Break(b) = visit(&idx) {
            return Some(b);
        }
        // advance to the next combination
        let mut i = size;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] < n - size + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}
