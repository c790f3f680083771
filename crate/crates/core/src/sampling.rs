//! Bernoulli nonuniform acquisition and lag-product formation.
//!
//! One pseudorandom clock selects grid instants shared by every channel;
//! each channel sees an integer-sample delayed copy of the input. Lag
//! products are then digital products across channels, which commutes with
//! the sample selection.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::series::ComplexSeries;

/// The Bernoulli selection pattern shared by all channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    pub bits: Vec<bool>,
    /// Target selection probability in (0, 1].
    pub gamma: f64,
    pub seed: u64,
    /// Number of selected instants.
    pub ones: usize,
    /// How many times generation re-seeded because no instant was selected.
    pub resampled: u32,
    /// Set when the empirical rate strays past five binomial sigmas of
    /// `gamma`; statistical outlier, not an error.
    pub rate_warning: bool,
}

impl SamplingMask {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Selected grid indices, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Draws an IID Bernoulli(gamma) mask of length `len`. A draw with no
/// selected instant is retried with an incremented seed and the retry count
/// is recorded.
pub fn make_mask(len: usize, gamma: f64, seed: u64) -> Result<SamplingMask> {
    if len == 0 {
        return Err(Error::config("mask length must be at least 1"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::config(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let mut resampled = 0u32;
    loop {
        let draw_seed = seed.wrapping_add(resampled as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
        let bits: Vec<bool> = (0..len).map(|_| rng.random::<f64>() < gamma).collect();
        let ones = bits.iter().filter(|&&b| b).count();
        if ones == 0 {
            resampled += 1;
            continue;
        }
        let sigma = (gamma * (1.0 - gamma) / len as f64).sqrt();
        let rate_warning = (ones as f64 / len as f64 - gamma).abs() > 5.0 * sigma;
        return Ok(SamplingMask {
            bits,
            gamma,
            seed,
            ones,
            resampled,
            rate_warning,
        });
    }
}

/// One lag product: order, conjugation count and per-factor delays
/// quantized to integer grid samples. The first `conjugations` factors are
/// the conjugated ones, and the first delay is zero by convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagSpec {
    pub conjugations: usize,
    pub delay_samples: Vec<i64>,
}

impl LagSpec {
    /// Quantizes `delays_seconds` onto the grid `1/sample_rate`.
    pub fn new<T: Scalar>(
        delays_seconds: &[T],
        conjugations: usize,
        sample_rate: T,
    ) -> Result<Self> {
        let delay_samples = delays_seconds
            .iter()
            .map(|&d| (d * sample_rate).as_f64().round() as i64)
            .collect();
        Self::from_samples(delay_samples, conjugations)
    }

    pub fn from_samples(delay_samples: Vec<i64>, conjugations: usize) -> Result<Self> {
        if delay_samples.is_empty() {
            return Err(Error::config("lag product needs at least one factor"));
        }
        if conjugations > delay_samples.len() {
            return Err(Error::config(format!(
                "conjugation count {} exceeds order {}",
                conjugations,
                delay_samples.len()
            )));
        }
        if delay_samples[0] != 0 {
            return Err(Error::config("first lag must be zero by convention"));
        }
        Ok(LagSpec {
            conjugations,
            delay_samples,
        })
    }

    /// All-zero-delay spec of the given order.
    pub fn zero_delay(order: usize, conjugations: usize) -> Result<Self> {
        Self::from_samples(vec![0; order], conjugations)
    }

    pub fn order(&self) -> usize {
        self.delay_samples.len()
    }

    /// Distinct delays in order of first appearance; one physical channel
    /// per entry.
    pub fn distinct_delays(&self) -> Vec<i64> {
        let mut seen = Vec::new();
        for &d in &self.delay_samples {
            if !seen.contains(&d) {
                seen.push(d);
            }
        }
        seen
    }

    /// (min, max) delay in samples.
    pub fn delay_span(&self) -> (i64, i64) {
        let min = *self.delay_samples.iter().min().unwrap();
        let max = *self.delay_samples.iter().max().unwrap();
        (min, max)
    }

    pub fn is_conjugated(&self, factor: usize) -> bool {
        factor < self.conjugations
    }
}

/// Samples retained by the nonuniform clock, with their grid positions.
///
/// All channels driven by one mask share `sample_indices`; entries whose
/// delayed grid position fell outside the record are kept as zero-valued
/// placeholders with `valid` cleared so the shared clock stays aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct NonuniformStream<T> {
    pub values: Vec<Complex<T>>,
    pub sample_indices: Vec<usize>,
    pub valid: Vec<bool>,
    /// Length of the underlying uniform grid.
    pub grid_len: usize,
    pub sample_rate: T,
    pub gamma: f64,
}

impl<T: Scalar> NonuniformStream<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Record length of the underlying grid, seconds.
    pub fn observation(&self) -> T {
        T::cast(self.grid_len as f64) / self.sample_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.sample_indices.len() || self.values.len() != self.valid.len()
        {
            return Err(Error::shape("stream field lengths differ"));
        }
        if !self.sample_indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::shape("sample indices must be strictly increasing"));
        }
        if self.sample_indices.last().is_some_and(|&i| i >= self.grid_len) {
            return Err(Error::shape("sample index beyond grid length"));
        }
        Ok(())
    }
}

/// Gathers `x[m - delay]` at every selected instant `m`. Out-of-range
/// delayed positions produce invalid placeholder entries.
pub fn apply_mask<T: Scalar>(
    x: &ComplexSeries<T>,
    mask: &SamplingMask,
    delay_samples: i64,
) -> Result<NonuniformStream<T>> {
    if x.len() != mask.len() {
        return Err(Error::shape(format!(
            "series length {} does not match mask length {}",
            x.len(),
            mask.len()
        )));
    }
    let mut values = Vec::with_capacity(mask.ones);
    let mut sample_indices = Vec::with_capacity(mask.ones);
    let mut valid = Vec::with_capacity(mask.ones);
    for (m, &bit) in mask.bits.iter().enumerate() {
        if !bit {
            continue;
        }
        let src = m as i64 - delay_samples;
        if src >= 0 && (src as usize) < x.len() {
            values.push(x.samples[src as usize]);
            valid.push(true);
        } else {
            values.push(Complex::new(T::zero(), T::zero()));
            valid.push(false);
        }
        sample_indices.push(m);
    }
    Ok(NonuniformStream {
        values,
        sample_indices,
        valid,
        grid_len: mask.len(),
        sample_rate: x.sample_rate,
        gamma: mask.gamma,
    })
}

/// Forms the digital lag product across channel streams sharing one clock:
/// `w[k] = prod_i w_ch(delay_i)[k]`, first `q` factors conjugated. Entries
/// with any invalid factor are dropped.
///
/// `channels` holds one stream per distinct delay, ordered as
/// `spec.distinct_delays()`.
pub fn lag_product_nonuniform<T: Scalar>(
    channels: &[NonuniformStream<T>],
    spec: &LagSpec,
) -> Result<NonuniformStream<T>> {
    let all: Vec<usize> = (0..spec.order()).collect();
    block_lag_product(channels, spec, &all)
}

/// Lag product restricted to the factors listed in `block` (indices into
/// the spec's delay vector). Conjugation follows the parent spec.
pub fn block_lag_product<T: Scalar>(
    channels: &[NonuniformStream<T>],
    spec: &LagSpec,
    block: &[usize],
) -> Result<NonuniformStream<T>> {
    let distinct = spec.distinct_delays();
    if channels.len() != distinct.len() {
        return Err(Error::config(format!(
            "expected {} channels (one per distinct delay), got {}",
            distinct.len(),
            channels.len()
        )));
    }
    if block.is_empty() || block.iter().any(|&i| i >= spec.order()) {
        return Err(Error::config("block must select existing factors"));
    }
    let first = &channels[0];
    for ch in channels.iter().skip(1) {
        if ch.sample_indices != first.sample_indices || ch.grid_len != first.grid_len {
            return Err(Error::ClockMismatch(
                "channel streams disagree on selected instants".into(),
            ));
        }
    }
    // factor index -> channel index
    let channel_of: Vec<usize> = block
        .iter()
        .map(|&i| {
            let d = spec.delay_samples[i];
            distinct.iter().position(|&x| x == d).unwrap()
        })
        .collect();

    let mut values = Vec::new();
    let mut sample_indices = Vec::new();
    for k in 0..first.len() {
        if channel_of.iter().any(|&c| !channels[c].valid[k]) {
            continue;
        }
        let mut product = Complex::new(T::one(), T::zero());
        for (&i, &c) in block.iter().zip(&channel_of) {
            let v = channels[c].values[k];
            product *= if spec.is_conjugated(i) { v.conj() } else { v };
        }
        values.push(product);
        sample_indices.push(first.sample_indices[k]);
    }
    let valid = vec![true; values.len()];
    Ok(NonuniformStream {
        values,
        sample_indices,
        valid,
        grid_len: first.grid_len,
        sample_rate: first.sample_rate,
        gamma: first.gamma,
    })
}

/// Full-rate lag product `y[k] = prod_i x[k - d_i]`, trimmed to the index
/// window where every factor stays inside the record.
pub fn lag_product_uniform<T: Scalar>(
    x: &ComplexSeries<T>,
    spec: &LagSpec,
) -> Result<ComplexSeries<T>> {
    let (d_min, d_max) = spec.delay_span();
    let len = x.len() as i64;
    if d_max - d_min >= len {
        return Err(Error::config(format!(
            "delay span {} samples exceeds record length {len}",
            d_max - d_min
        )));
    }
    let start = d_max;
    let end = len - 1 + d_min; // inclusive
    let mut samples = Vec::with_capacity((end - start + 1) as usize);
    for k in start..=end {
        let mut product = Complex::new(T::one(), T::zero());
        for (i, &d) in spec.delay_samples.iter().enumerate() {
            let v = x.samples[(k - d) as usize];
            product *= if spec.is_conjugated(i) { v.conj() } else { v };
        }
        samples.push(product);
    }
    ComplexSeries::new(
        samples,
        x.sample_rate,
        x.start_time + T::cast(start as f64) / x.sample_rate,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate_signal, Modulation, PulseShape, SignalParams};

    fn ramp_series(len: usize) -> ComplexSeries<f64> {
        let samples = (0..len)
            .map(|i| Complex::new(i as f64, -(i as f64) / 2.0))
            .collect();
        ComplexSeries::new(samples, 10.0, 0.0).unwrap()
    }

    fn mask_from_bits(bits: Vec<bool>, gamma: f64) -> SamplingMask {
        let ones = bits.iter().filter(|&&b| b).count();
        SamplingMask {
            bits,
            gamma,
            seed: 0,
            ones,
            resampled: 0,
            rate_warning: false,
        }
    }

    #[test]
    fn full_rate_mask_selects_everything() {
        let m = make_mask(100, 1.0, 7).unwrap();
        assert_eq!(m.ones, 100);
        assert!(m.bits.iter().all(|&b| b));
    }

    #[test]
    fn mask_count_in_reference_band() {
        // gamma = 0.1 on the 32768 grid; binomial concentration puts the
        // count well inside [2950, 3600].
        for seed in 0..20 {
            let m = make_mask(32768, 0.1, seed).unwrap();
            assert!(
                (2950..=3600).contains(&m.ones),
                "seed {seed}: ones {}",
                m.ones
            );
        }
    }

    #[test]
    fn mask_mean_rate_matches_gamma() {
        let mut total = 0usize;
        let trials = 10_000;
        for seed in 0..trials {
            total += make_mask(1000, 0.3, seed as u64).unwrap().ones;
        }
        let mean_rate = total as f64 / (trials as f64 * 1000.0);
        assert!((mean_rate - 0.3).abs() < 0.005, "mean rate {mean_rate}");
    }

    #[test]
    fn mask_rejects_bad_gamma() {
        assert!(make_mask(10, 0.0, 1).is_err());
        assert!(make_mask(10, 1.2, 1).is_err());
        assert!(make_mask(0, 0.5, 1).is_err());
    }

    #[test]
    fn degenerate_mask_resamples() {
        // Tiny L * gamma: some seed in here must produce an all-zero first
        // draw and recover by re-seeding.
        let mut saw_resample = false;
        for seed in 0..4000 {
            let m = make_mask(3, 0.02, seed).unwrap();
            assert!(m.ones >= 1);
            saw_resample |= m.resampled > 0;
        }
        assert!(saw_resample);
    }

    #[test]
    fn identity_mask_is_verbatim() {
        let x = ramp_series(32);
        let mask = make_mask(32, 1.0, 3).unwrap();
        let w = apply_mask(&x, &mask, 0).unwrap();
        assert_eq!(w.values, x.samples);
        assert_eq!(w.sample_indices, (0..32).collect::<Vec<_>>());
        assert_eq!(w.valid_count(), 32);
    }

    #[test]
    fn fixed_selection_pattern() {
        // Ones at {0, 3, 4, 9} on a length-10 record picks those samples.
        let x = ramp_series(10);
        let mut bits = vec![false; 10];
        for i in [0usize, 3, 4, 9] {
            bits[i] = true;
        }
        let w = apply_mask(&x, &mask_from_bits(bits, 0.4), 0).unwrap();
        assert_eq!(w.sample_indices, vec![0, 3, 4, 9]);
        let want: Vec<_> = [0, 3, 4, 9].iter().map(|&i| x.samples[i]).collect();
        assert_eq!(w.values, want);
    }

    #[test]
    fn delayed_gather_matches_index_loop() {
        let x = ramp_series(64);
        let mask = make_mask(64, 0.4, 9).unwrap();
        let delay = 5i64;
        let w = apply_mask(&x, &mask, delay).unwrap();
        let mut pos = 0;
        for (m, &bit) in mask.bits.iter().enumerate() {
            if !bit {
                continue;
            }
            let src = m as i64 - delay;
            if src >= 0 && (src as usize) < x.len() {
                assert!(w.valid[pos]);
                assert_eq!(w.values[pos], x.samples[src as usize]);
            } else {
                assert!(!w.valid[pos]);
            }
            assert_eq!(w.sample_indices[pos], m);
            pos += 1;
        }
        assert_eq!(pos, w.len());
    }

    #[test]
    fn conjugate_square_case() {
        let x = ramp_series(24);
        let mask = make_mask(24, 0.5, 4).unwrap();
        let ch = apply_mask(&x, &mask, 0).unwrap();
        let spec = LagSpec::zero_delay(2, 1).unwrap();
        let w = lag_product_nonuniform(&[ch.clone()], &spec).unwrap();
        for (k, v) in w.values.iter().enumerate() {
            let expect = ch.values[k].conj() * ch.values[k];
            assert_eq!(*v, expect);
            assert!((v.re - ch.values[k].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn masking_commutes_with_lag_product() {
        let params = SignalParams::<f64> {
            amplitude: 1.0,
            symbol_period: 1.0 / 64.0,
            carrier_offset: 1.5,
            carrier_phase: 0.3,
            timing_offset: 0.0,
            rolloff: 0.3,
            modulation: Modulation::Qpsk,
            pulse: PulseShape::RaisedCosine,
            sample_rate: 1024.0,
            duration: 0.5,
        };
        let x = generate_signal(&params, 21).unwrap();
        let mask = make_mask(x.len(), 0.3, 8).unwrap();
        let spec = LagSpec::zero_delay(3, 1).unwrap();

        let ch = apply_mask(&x, &mask, 0).unwrap();
        let direct = lag_product_nonuniform(&[ch], &spec).unwrap();

        let y_lag = lag_product_uniform(&x, &spec).unwrap();
        let masked_after = apply_mask(&y_lag, &mask, 0).unwrap();

        assert_eq!(direct.sample_indices, masked_after.sample_indices);
        assert_eq!(direct.values, masked_after.values);
    }

    #[test]
    fn fourth_order_product_matches_scalar_loop() {
        let x = ramp_series(16);
        let mask = make_mask(16, 0.7, 2).unwrap();
        let ch = apply_mask(&x, &mask, 0).unwrap();
        let spec = LagSpec::zero_delay(4, 0).unwrap();
        let w = lag_product_nonuniform(&[ch.clone()], &spec).unwrap();
        for k in 0..w.len() {
            let v = ch.values[k];
            let expect = v * v * v * v;
            assert_eq!(w.values[k], expect);
        }
    }

    #[test]
    fn first_order_uniform_product_is_identity() {
        let x = ramp_series(12);
        let spec = LagSpec::zero_delay(1, 0).unwrap();
        let y = lag_product_uniform(&x, &spec).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn third_order_uniform_product_matches_triple_loop() {
        // delays (0, 2, 5) samples, second factor conjugated region q=1
        let x = ramp_series(32);
        let spec = LagSpec::from_samples(vec![0, 2, 5], 1).unwrap();
        let y = lag_product_uniform(&x, &spec).unwrap();
        assert_eq!(y.len(), 32 - 5);
        assert_eq!(y.start_time, 0.5); // 5 samples at fs=10
        for (i, k) in (5..32).enumerate() {
            let expect = x.samples[k].conj() * x.samples[k - 2] * x.samples[k - 5];
            assert!((y.samples[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn duplicate_delays_collapse_to_one_channel() {
        let x = ramp_series(40);
        let mask = make_mask(40, 0.5, 5).unwrap();
        let spec = LagSpec::from_samples(vec![0, 3, 3], 1).unwrap();
        assert_eq!(spec.distinct_delays(), vec![0, 3]);

        let ch0 = apply_mask(&x, &mask, 0).unwrap();
        let ch3 = apply_mask(&x, &mask, 3).unwrap();
        let collapsed = lag_product_nonuniform(&[ch0.clone(), ch3.clone()], &spec).unwrap();

        // Simulate three physical channels by multiplying factor streams
        // directly.
        let mut values = Vec::new();
        let mut indices = Vec::new();
        for k in 0..ch0.len() {
            if ch0.valid[k] && ch3.valid[k] {
                values.push(ch0.values[k].conj() * ch3.values[k] * ch3.values[k]);
                indices.push(ch0.sample_indices[k]);
            }
        }
        assert_eq!(collapsed.sample_indices, indices);
        assert_eq!(collapsed.values, values);
    }

    #[test]
    fn conjugation_count_is_symmetric_on_real_series() {
        let samples = (0..20)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), 0.0))
            .collect();
        let x = ComplexSeries::new(samples, 10.0, 0.0).unwrap();
        let a = lag_product_uniform(&x, &LagSpec::from_samples(vec![0, 1, 2], 1).unwrap()).unwrap();
        let b = lag_product_uniform(&x, &LagSpec::from_samples(vec![0, 1, 2], 2).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shared_clock_invariant() {
        let x = ramp_series(50);
        let mask = make_mask(50, 0.4, 12).unwrap();
        let a = apply_mask(&x, &mask, 0).unwrap();
        let b = apply_mask(&x, &mask, 7).unwrap();
        let c = apply_mask(&x, &mask, -3).unwrap();
        assert_eq!(a.sample_indices, b.sample_indices);
        assert_eq!(a.sample_indices, c.sample_indices);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let x = ramp_series(10);
        let mask = make_mask(12, 0.5, 1).unwrap();
        assert!(apply_mask(&x, &mask, 0).is_err());

        let spec = LagSpec::from_samples(vec![0, 9], 0).unwrap();
        let short = ramp_series(8);
        assert!(lag_product_uniform(&short, &spec).is_err());
    }

    #[test]
    fn lag_spec_convention_checks() {
        assert!(LagSpec::from_samples(vec![1, 0], 0).is_err());
        assert!(LagSpec::from_samples(vec![0], 2).is_err());
        assert!(LagSpec::from_samples(vec![], 0).is_err());
        let spec = LagSpec::new(&[0.0f64, 2.4e-4, 5.1e-4], 1, 10_000.0).unwrap();
        assert_eq!(spec.delay_samples, vec![0, 2, 5]);
    }
}
