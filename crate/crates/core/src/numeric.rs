//! Small numeric helpers shared by the statistics modules.
//!
//! All reductions go through [`sum`], a Neumaier-compensated summation, and
//! always consume their input in the given order. Callers that parallelize
//! collect partial results first and reduce them here in a fixed order, which
//! keeps every aggregate bitwise reproducible across thread counts.

/// Neumaier compensated sum.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut total = 0.0_f64;
    let mut compensation = 0.0_f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            compensation += (total - t) + v;
        } else {
            compensation += (v - t) + total;
        }
        total = t;
    }
    total + compensation
}

/// Arithmetic mean, `None` for an empty input.
pub fn mean<I: IntoIterator<Item = f64>>(values: I) -> Option<f64> {
    let mut n = 0usize;
    let s = sum(values.into_iter().inspect(|_| n += 1));
    (n > 0).then(|| s / n as f64)
}

/// Population standard deviation, `None` for an empty input.
pub fn population_std(values: &[f64]) -> Option<f64> {
    let m = mean(values.iter().copied())?;
    let var = sum(values.iter().map(|v| (v - m) * (v - m))) / values.len() as f64;
    Some(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16];
        assert_eq!(sum(values), 1.0);
    }

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(mean(std::iter::empty()), None);
        assert_eq!(mean([2.0, 4.0]), Some(3.0));
    }

    #[test]
    fn population_std_of_constant_is_zero() {
        assert_eq!(population_std(&[3.0, 3.0, 3.0]), Some(0.0));
        assert_eq!(population_std(&[1.0, 3.0]), Some(1.0));
    }
}
