/// Neumaier-compensated summation. Non-finite terms give the plain IEEE sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        if !v.is_finite() || !sum.is_finite() {
            sum += v;
            continue;
        }
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    if sum.is_finite() {
        sum + comp
    } else {
        sum
    }
}

/// Linear-interpolated quantile (R type 7) of an ascending slice.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if lo == hi || a == b {
        return a;
    }
    a + (h - lo as f64) * (b - a)
}

/// Sample standard deviation (divisor n - 1). Infinite members propagate.
pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (ss / (n - 1) as f64).sqrt()
}
