//! Threshold location for monotone predicates over a scalar interval.
//!
//! Two independent routes are provided: bisection and a brute-force grid
//! scan. Callers that report a threshold check one against the other.

/// Smallest `x` in `[lo, hi]` at which `pred` becomes true, to within `tol`.
///
/// `pred` must be monotone (false then true). Returns `None` if `pred(hi)` is
/// false. The returned point always satisfies `pred`.
pub fn first_true_bisect<F>(mut lo: f64, mut hi: f64, tol: f64, pred: F) -> Option<f64>
where
    F: Fn(f64) -> bool,
{
    debug_assert!(tol > 0.0 && lo <= hi);
    if !pred(hi) {
        return None;
    }
    if pred(lo) {
        return Some(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// First grid point `lo + k·step` in `[lo, hi]` at which `pred` holds.
pub fn first_true_scan<F>(lo: f64, hi: f64, step: f64, pred: F) -> Option<f64>
where
    F: Fn(f64) -> bool,
{
    let n = ((hi - lo) / step).round() as u64;
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n.max(1) as f64)
        .find(|&x| pred(x))
}

/// Root of a function that is increasing across `[lo, hi]` (`f(lo) < 0 < f(hi)`).
pub fn bisect_root<F>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let increasing = f(hi) >= f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
