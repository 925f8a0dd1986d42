//! Small numeric helpers shared across modules.

/// Neumaier-compensated sum in iteration order.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub(crate) fn mean<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut n = 0usize;
    let s = compensated_sum(values.into_iter().inspect(|_| n += 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

#[inline]
pub(crate) fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn mean_of_empty_is_zero() {
        assert_eq!(mean(core::iter::empty()), 0.0);
    }
}
