//! Grid generation helpers shared by the curve, sweep, and oracle paths.

/// `n` log-spaced points from `lo` to `hi` inclusive, strictly increasing.
///
/// Endpoints are pinned exactly so downstream range checks see the caller's
/// bounds rather than a rounded exponential.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "log_spaced needs at least two points");
    assert!(
        lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo,
        "log_spaced needs finite bounds with 0 < lo < hi"
    );
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| (ln_lo + step * i as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}
