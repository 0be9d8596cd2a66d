//! Floating-point bookkeeping shared by every module: fixed-order summation
//! and the outward slack that absorbs rounding in accumulated sums.

/// Units in the last place charged to every accumulated term.
pub const ULPS_PER_TERM: f64 = 4.0;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (tree) summation over the slice in index order.
///
/// The order of additions depends only on the length of the slice, so the
/// result is reproducible bit for bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n`, without materialising a buffer
/// larger than one block per tree level.
pub fn pairwise_sum_by(n: usize, f: &mut impl FnMut(usize) -> f64) -> f64 {
    fn go(lo: usize, hi: usize, f: &mut impl FnMut(usize) -> f64) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    if n == 0 {
        return 0.0;
    }
    go(0, n, f)
}

/// Rounding slack for a sum of `terms` products whose absolute values add up
/// to `abs_sum`: four ulps per term plus the depth of the summation tree.
pub fn sum_slack(abs_sum: f64, terms: usize) -> f64 {
    let depth = if terms > 1 {
        (terms as f64).log2().ceil()
    } else {
        0.0
    };
    (ULPS_PER_TERM + depth) * f64::EPSILON * abs_sum
}

/// A few ulps of `x`, used to widen single evaluated values outward.
pub fn ulps(x: f64, k: f64) -> f64 {
    k * f64::EPSILON * x.abs() + k * f64::MIN_POSITIVE
}

/// Round-to-nearest result nudged one step toward -inf.
pub fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Round-to-nearest result nudged one step toward +inf.
pub fn next_up(x: f64) -> f64 {
    -next_down(-x)
}
