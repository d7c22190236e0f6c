//! Compensated summation.

use crate::error::{Error, Result};

/// Kahan–Babuška–Neumaier running sum.
///
/// Unlike plain Kahan summation the correction also survives when an
/// incoming term is larger in magnitude than the running total.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for term in iter {
            acc.add(term);
        }
        acc
    }
}

/// Compensated sum of `terms`; a non-finite term is an error.
pub fn compensated_sum<I>(terms: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut acc = NeumaierSum::new();
    for (index, term) in terms.into_iter().enumerate() {
        if !term.is_finite() {
            return Err(Error::NonFinite { index });
        }
        acc.add(term);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation() {
        assert_eq!(compensated_sum([1.0, 1e-16, -1.0]).unwrap(), 1e-16);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(compensated_sum(std::iter::empty()).unwrap(), 0.0);
    }

    #[test]
    fn many_tenths() {
        // The double nearest 0.1 is 0.1000000000000000055511151231257827...,
        // so the exact sum of 1e5 copies is 10000.000000000000555...
        let s = compensated_sum(std::iter::repeat_n(0.1, 100_000)).unwrap();
        assert!((s - 1e4).abs() <= 1e-9);
        assert_eq!(s, 1e4);
    }

    #[test]
    fn non_finite_terms_are_rejected() {
        assert_eq!(compensated_sum([1.0, f64::NAN, 2.0]), Err(Error::NonFinite { index: 1 }));
        assert!(compensated_sum([f64::INFINITY]).is_err());
    }

    proptest! {
        // Integer-valued terms scaled by a power of two are summed exactly in
        // i128, which serves as the exact reference.
        #[test]
        fn matches_exact_integer_sum(ints in prop::collection::vec(-1_000_000_000i64..1_000_000_000, 0..2000),
                                     shift in -40i32..40) {
            let scale = 2f64.powi(shift);
            let exact: i128 = ints.iter().map(|&v| v as i128).sum();
            let got = compensated_sum(ints.iter().map(|&v| v as f64 * scale)).unwrap();
            prop_assert_eq!(got, exact as f64 * scale);
        }
    }
}
