//! Uniformly sampled complex baseband records.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// A block of uniformly spaced complex baseband samples with rate metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries<T> {
    pub samples: Vec<Complex<T>>,
    /// Samples per second.
    pub sample_rate: T,
    /// Absolute time of `samples[0]`, in seconds.
    pub start_time: T,
}

impl<T: Scalar> ComplexSeries<T> {
    pub fn new(samples: Vec<Complex<T>>, sample_rate: T, start_time: T) -> Result<Self> {
        let s = Self {
            samples,
            sample_rate,
            start_time,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::shape("series must be non-empty"));
        }
        if !(self.sample_rate > T::zero()) {
            return Err(Error::config("sample rate must be positive"));
        }
        if self
            .samples
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::shape("series contains non-finite samples"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sampling interval in seconds.
    pub fn sample_interval(&self) -> T {
        T::one() / self.sample_rate
    }

    /// Record length in seconds.
    pub fn duration(&self) -> T {
        T::cast(self.len() as f64) / self.sample_rate
    }

    /// Absolute time of sample `k`.
    pub fn time_at(&self, k: usize) -> T {
        self.start_time + T::cast(k as f64) / self.sample_rate
    }

    /// Mean of |x|^2, accumulated in f64 regardless of the sample type.
    pub fn mean_power(&self) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|z| z.re.as_f64().powi(2) + z.im.as_f64().powi(2))
            .sum();
        sum / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(ComplexSeries::<f64>::new(vec![], 1.0, 0.0).is_err());
        let bad = vec![Complex::new(f64::NAN, 0.0)];
        assert!(ComplexSeries::new(bad, 1.0, 0.0).is_err());
    }

    #[test]
    fn timing_metadata() {
        let s = ComplexSeries::new(vec![Complex::new(1.0f64, 0.0); 8], 4.0, 0.5).unwrap();
        assert_eq!(s.duration(), 2.0);
        assert_eq!(s.time_at(2), 1.0);
        assert_eq!(s.mean_power(), 1.0);
    }
}
