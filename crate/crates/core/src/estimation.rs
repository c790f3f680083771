//! Compressive cyclic moment and cyclic cumulant estimation.
//!
//! Per block of each index-set partition, the channel streams are multiplied
//! into a block lag product, candidate cycle frequencies are screened by
//! CFAR on the zero-padded spectrum, surviving candidates are evaluated by
//! exact-frequency projection (already 1/gamma rescaled), and the block
//! moments are combined with partition weights and the frequency-sum
//! constraint into the cumulant at the target cycle frequency.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{sinc, Scalar};
use crate::partitions::{
    enumerate_partitions, frequency_sum_tuple_indices, BlockSignature,
};
use crate::sampling::{
    apply_mask, block_lag_product, make_mask, LagSpec, NonuniformStream,
};
use crate::seed::derive_seed;
use crate::signal::{add_noise_at_cnr, generate_signal, SignalParams};
use crate::spectral::{cfar_detect, project_at_frequency, zero_padded_dft, CfarConfig};

/// Whether an estimate is a raw spectral-line moment or an assembled
/// cumulant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    Moment,
    Cumulant,
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StatKind::Moment => "moment",
            StatKind::Cumulant => "cumulant",
        })
    }
}

/// One (order, cycle frequency, value) record with provenance.
#[derive(Debug, Clone)]
pub struct CyclicStatEstimate<T> {
    pub kind: StatKind,
    pub order: usize,
    pub conjugations: usize,
    pub delay_samples: Vec<i64>,
    /// Cycle frequency (alpha for moments, beta for cumulants), Hz.
    pub cycle_frequency: T,
    pub value: Complex<T>,
    pub gamma: f64,
    /// Observation length in seconds.
    pub observation: T,
    /// True when the 1/gamma compression rescale is already applied.
    pub rescaled: bool,
    pub mask_seed: Option<u64>,
}

/// Detected block moments: per block signature, the list of surviving
/// (cycle frequency, rescaled value) pairs.
pub type MomentTable<T> = BTreeMap<BlockSignature, Vec<(T, Complex<T>)>>;

/// Candidate cycle frequencies per block signature `(n_i, q_i)`:
/// `(n_i - 2 q_i) dfc + k/T` for `|k| <= harmonics`, clipped to Nyquist.
#[derive(Debug, Clone)]
pub struct CandidateFrequencyPlan<T> {
    entries: BTreeMap<(usize, usize), Vec<T>>,
    /// Target cumulant cycle frequency `(n - 2q) dfc`.
    pub beta: T,
    pub harmonics: usize,
    /// Frequency-sum matching tolerance, default half the analysis
    /// resolution `1/(2 T_obs)`.
    pub tolerance: T,
    /// Skip partitions containing odd-size blocks (their moments vanish
    /// for the symmetric constellations synthesized here).
    pub prune_odd_blocks: bool,
}

impl<T: Scalar> CandidateFrequencyPlan<T> {
    pub fn for_lag_spec(
        spec: &LagSpec,
        carrier_offset: T,
        symbol_rate: T,
        harmonics: usize,
        nyquist: T,
        observation: T,
        prune_odd_blocks: bool,
    ) -> Result<Self> {
        let n = spec.order();
        let q = spec.conjugations;
        let mut entries = BTreeMap::new();
        for order in 1..=n {
            let q_lo = order.saturating_sub(n - q);
            let q_hi = q.min(order);
            for conj in q_lo..=q_hi {
                let mut freqs = Vec::new();
                let base = T::cast(order as f64 - 2.0 * conj as f64) * carrier_offset;
                for k in -(harmonics as i64)..=harmonics as i64 {
                    let f = base + T::cast(k as f64) * symbol_rate;
                    if f.abs() <= nyquist {
                        freqs.push(f);
                    }
                }
                entries.insert((order, conj), freqs);
            }
        }
        if !(observation > T::zero()) {
            return Err(Error::config("observation length must be positive"));
        }
        Ok(CandidateFrequencyPlan {
            entries,
            beta: T::cast(n as f64 - 2.0 * q as f64) * carrier_offset,
            harmonics,
            tolerance: T::one() / (T::cast(2.0) * observation),
            prune_odd_blocks,
        })
    }

    pub fn candidates(&self, order: usize, conjugations: usize) -> Option<&[T]> {
        self.entries
            .get(&(order, conjugations))
            .map(Vec::as_slice)
    }

    /// Replaces the candidate list of one signature.
    pub fn set_candidates(&mut self, order: usize, conjugations: usize, freqs: Vec<T>) {
        self.entries.insert((order, conjugations), freqs);
    }
}

/// Direct compressive cyclic-moment estimate at one exact frequency. The
/// projection embeds the 1/gamma rescale.
pub fn estimate_compressive_cyclic_moment<T: Scalar>(
    w_lag: &NonuniformStream<T>,
    spec: &LagSpec,
    alpha: T,
) -> CyclicStatEstimate<T> {
    CyclicStatEstimate {
        kind: StatKind::Moment,
        order: spec.order(),
        conjugations: spec.conjugations,
        delay_samples: spec.delay_samples.clone(),
        cycle_frequency: alpha,
        value: project_at_frequency(w_lag, alpha),
        gamma: w_lag.gamma,
        observation: w_lag.observation(),
        rescaled: true,
        mask_seed: None,
    }
}

/// CFAR-screens every block signature's candidate list and evaluates the
/// survivors by exact projection.
pub fn detect_moments<T: Scalar>(
    channels: &[NonuniformStream<T>],
    spec: &LagSpec,
    plan: &CandidateFrequencyPlan<T>,
    cfar: &CfarConfig,
) -> Result<MomentTable<T>> {
    let set = enumerate_partitions(spec.order())?;
    let mut table = MomentTable::new();
    for partition in &set.partitions {
        if plan.prune_odd_blocks && !partition.all_blocks_even() {
            continue;
        }
        for block in &partition.blocks {
            let sig = BlockSignature::of_block(block, spec.conjugations, &spec.delay_samples);
            if table.contains_key(&sig) {
                continue;
            }
            let candidates = plan
                .candidates(sig.order(), sig.conjugations())
                .ok_or(Error::IncompletePlan {
                    order: sig.order(),
                    conjugations: sig.conjugations(),
                })?;
            let stream = block_lag_product(channels, spec, block)?;
            let spectrum = zero_padded_dft(&stream, stream.grid_len)?;
            let peaks = cfar_detect(&spectrum, Some(candidates), cfar)?;
            let moments = peaks
                .peaks
                .iter()
                .map(|p| (p.frequency, project_at_frequency(&stream, p.frequency)))
                .collect();
            table.insert(sig, moments);
        }
    }
    Ok(table)
}

/// Combines detected block moments into the cumulant at `beta`: the outer
/// sum runs over partitions with weight `(-1)^(d-1) (d-1)!`, the inner sum
/// over per-block frequency tuples summing to `beta`.
pub fn assemble_cumulant<T: Scalar>(
    table: &MomentTable<T>,
    spec: &LagSpec,
    beta: T,
    tolerance: T,
    prune_odd_blocks: bool,
) -> Result<Complex<T>> {
    let set = enumerate_partitions(spec.order())?;
    let mut total = Complex::new(T::zero(), T::zero());
    for partition in &set.partitions {
        if prune_odd_blocks && !partition.all_blocks_even() {
            continue;
        }
        let detected: Vec<&Vec<(T, Complex<T>)>> = partition
            .blocks
            .iter()
            .map(|block| {
                let sig =
                    BlockSignature::of_block(block, spec.conjugations, &spec.delay_samples);
                table
                    .get(&sig)
                    .ok_or_else(|| Error::MissingBlockMoment(sig.to_string()))
            })
            .collect::<Result<_>>()?;
        if detected.iter().any(|list| list.is_empty()) {
            continue;
        }
        let freq_lists: Vec<Vec<T>> = detected
            .iter()
            .map(|list| list.iter().map(|&(f, _)| f).collect())
            .collect();
        let mut partition_sum = Complex::new(T::zero(), T::zero());
        for tuple in frequency_sum_tuple_indices(&freq_lists, beta, tolerance) {
            let mut product = Complex::new(T::one(), T::zero());
            for (block_idx, &cand_idx) in tuple.iter().enumerate() {
                product *= detected[block_idx][cand_idx].1;
            }
            partition_sum += product;
        }
        total += partition_sum * T::cast(partition.conversion_weight());
    }
    Ok(total)
}

/// Full compressive cyclic-cumulant estimator: detect block moments, then
/// assemble at the plan's target frequency.
pub fn estimate_compressive_cyclic_cumulant<T: Scalar>(
    channels: &[NonuniformStream<T>],
    spec: &LagSpec,
    plan: &CandidateFrequencyPlan<T>,
    cfar: &CfarConfig,
) -> Result<CyclicStatEstimate<T>> {
    if channels.is_empty() {
        return Err(Error::config("at least one channel stream required"));
    }
    let table = detect_moments(channels, spec, plan, cfar)?;
    let value = assemble_cumulant(&table, spec, plan.beta, plan.tolerance, plan.prune_odd_blocks)?;
    let first = &channels[0];
    Ok(CyclicStatEstimate {
        kind: StatKind::Cumulant,
        order: spec.order(),
        conjugations: spec.conjugations,
        delay_samples: spec.delay_samples.clone(),
        cycle_frequency: plan.beta,
        value,
        gamma: first.gamma,
        observation: first.observation(),
        rescaled: true,
        mask_seed: None,
    })
}

/// Predicted mean of the finite-window cyclic-moment estimator: the target
/// line scaled by the shrunken window, plus sinc-weighted leakage from every
/// other line.
///
/// `moments` holds the true cyclic moments (cycle frequency, value) of the
/// lag product; `window_center` is the absolute center of the observation
/// window.
pub fn bias_oracle<T: Scalar>(
    moments: &[(T, Complex<T>)],
    alpha: T,
    spec: &LagSpec,
    sample_rate: T,
    observation: T,
    window_center: T,
) -> Complex<T> {
    let ts = T::one() / sample_rate;
    let (d_min, d_max) = spec.delay_span();
    let tau_left = T::cast(d_max as f64) * ts; // largest delay
    let tau_right = T::cast(d_min as f64) * ts; // smallest delay
    let tau_span = tau_right - tau_left; // <= 0
    let window = tau_span + observation;
    let scale = window / observation;
    let two = T::cast(2.0);

    let mut mean = Complex::new(T::zero(), T::zero());
    let freq_tol = T::cast(1e-9);
    for &(b, value) in moments {
        let df = alpha - b;
        if df.abs() <= freq_tol {
            mean += value * scale;
        } else {
            let phase = Complex::cis(-T::PI() * df * (tau_left + tau_right))
                * Complex::cis(-two * T::PI() * df * window_center);
            mean += value * sinc(df * window) * scale * phase;
        }
    }
    mean
}

/// Empirical estimator variance per compression rate.
#[derive(Debug, Clone)]
pub struct VarianceProbeRow {
    pub gamma: f64,
    /// Total complex variance `E|R - mean|^2` over trials.
    pub variance: f64,
    /// Standard error of the variance estimate.
    pub std_error: f64,
    pub trials: usize,
}

/// Measures the compressive cyclic-moment estimator variance over fresh
/// symbols, noise and masks at each compression rate. Symbol and noise
/// seeds are keyed by trial only, so rates are compared on common signal
/// realizations.
pub fn variance_probe<T: Scalar>(
    params: &SignalParams<T>,
    cnr_db: f64,
    spec: &LagSpec,
    alpha: T,
    gammas: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<VarianceProbeRow>> {
    if trials < 100 {
        return Err(Error::config("variance probe needs at least 100 trials"));
    }
    params.validate()?;
    let mut rows = Vec::with_capacity(gammas.len());
    for (gi, &gamma) in gammas.iter().enumerate() {
        let estimates: Vec<Complex<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let sym_seed = derive_seed(base_seed, &[0x53, trial as u64]);
                let noise_seed = derive_seed(base_seed, &[0x4e, trial as u64]);
                let mask_seed = derive_seed(base_seed, &[0x4d, gi as u64, trial as u64]);
                let x = generate_signal(params, sym_seed)?;
                let x = add_noise_at_cnr(&x, cnr_db, noise_seed)?;
                let mask = make_mask(x.len(), gamma, mask_seed)?;
                let channels: Vec<NonuniformStream<T>> = spec
                    .distinct_delays()
                    .iter()
                    .map(|&d| apply_mask(&x, &mask, d))
                    .collect::<Result<_>>()?;
                let w = crate::sampling::lag_product_nonuniform(&channels, spec)?;
                let v = project_at_frequency(&w, alpha);
                Ok(Complex::new(v.re.as_f64(), v.im.as_f64()))
            })
            .collect::<Result<_>>()?;
        let n = estimates.len() as f64;
        let mean = estimates.iter().sum::<Complex<f64>>() / n;
        let sq_devs: Vec<f64> = estimates.iter().map(|z| (z - mean).norm_sqr()).collect();
        let variance = sq_devs.iter().sum::<f64>() / (n - 1.0);
        let sq_mean = sq_devs.iter().sum::<f64>() / n;
        let sq_var = sq_devs.iter().map(|u| (u - sq_mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std_error = (sq_var / n).sqrt();
        rows.push(VarianceProbeRow {
            gamma,
            variance,
            std_error,
            trials,
        });
    }
    Ok(rows)
}
