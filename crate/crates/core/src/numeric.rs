//! Small numerical helpers shared across modules: compensated summation,
//! sample moments, interpolated quantiles and the trigamma function.

/// Neumaier-compensated sum. Faithful to the exact sum to well under one ulp
/// for the sample sizes used here, and independent of accumulation drift.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values) / values.len() as f64
}

/// Unbiased (n-1) sample variance, two-pass with compensated sums.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let d = v - m;
        let sq = d * d;
        let t = sum + sq;
        if sum.abs() >= sq {
            comp += (sum - t) + sq;
        } else {
            comp += (sq - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / (n - 1) as f64
}

/// Standardized third central moment g1 = m3 / m2^(3/2) with 1/n moments.
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let nf = n as f64;
    let m2 = compensated_sum(&values.iter().map(|v| (v - m).powi(2)).collect::<Vec<_>>()) / nf;
    let m3 = compensated_sum(&values.iter().map(|v| (v - m).powi(3)).collect::<Vec<_>>()) / nf;
    if m2 <= 0.0 {
        return f64::NAN;
    }
    m3 / m2.powf(1.5)
}

/// Linearly interpolated quantile (R type 7) on an ascending-sorted slice.
/// Used only for bandwidth selection, where the convention is immaterial.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Trigamma function psi'(x) for x > 0: recurrence up to x >= 20, then the
/// standard asymptotic series (Abramowitz & Stegun 6.4.12). The truncation
/// error at the shift point is below 4e-16 absolute.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0f64;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)
    acc + inv
        + 0.5 * inv2
        + inv2 * inv * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

/// Number of representable f64 values strictly between a and b (saturating).
/// Both arguments must be finite and of the same sign class for a meaningful
/// answer; used in tests asserting "within k ulp".
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    let to_ordered = |x: f64| -> i64 {
        let bits = x.to_bits() as i64;
        // Map the sign-magnitude bit pattern onto a monotone integer line.
        if bits < 0 {
            i64::MIN.wrapping_sub(bits)
        } else {
            bits
        }
    };
    let (ia, ib) = (to_ordered(a), to_ordered(b));
    ia.abs_diff(ib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_matches_exact_on_ill_conditioned_input() {
        // 1.0 + 1e100 - 1e100 + 1.0 = 2 exactly with compensation.
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&vals), 2.0);
    }

    #[test]
    fn variance_of_constant_shifted() {
        let vals = [1e9 + 4.0, 1e9 + 7.0, 1e9 + 13.0, 1e9 + 16.0];
        assert_relative_eq!(sample_variance(&vals), 30.0, epsilon = 1e-9);
    }

    #[test]
    fn skewness_of_symmetric_sample_is_zero() {
        let vals = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(skewness(&vals).abs() < 1e-14);
    }

    #[test]
    fn trigamma_known_values() {
        // psi'(1) = pi^2/6
        assert_relative_eq!(
            trigamma(1.0),
            std::f64::consts::PI * std::f64::consts::PI / 6.0,
            epsilon = 1e-12
        );
        // psi'(1/2) = pi^2/2
        assert_relative_eq!(
            trigamma(0.5),
            std::f64::consts::PI * std::f64::consts::PI / 2.0,
            epsilon = 1e-12
        );
        // Recurrence: psi'(x+1) = psi'(x) - 1/x^2
        for &x in &[0.1, 0.9, 2.3, 7.7, 42.0] {
            assert_relative_eq!(
                trigamma(x + 1.0),
                trigamma(x) - 1.0 / (x * x),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_relative_eq!(quantile_sorted(&v, 0.5), 2.5);
    }

    #[test]
    fn ulp_distance_basics() {
        assert_eq!(ulp_distance(1.0, 1.0), 0);
        assert_eq!(ulp_distance(1.0, f64::from_bits(1.0f64.to_bits() + 1)), 1);
        assert_eq!(ulp_distance(-1.0, f64::from_bits((-1.0f64).to_bits() + 1)), 1);
    }
}
