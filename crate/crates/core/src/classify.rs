//! Single-feature minimum-distance modulation classification and the
//! normalized mean square error measure.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::estimation::{
    estimate_compressive_cyclic_cumulant, CandidateFrequencyPlan,
};
use crate::num::Scalar;
use crate::sampling::{LagSpec, NonuniformStream};
use crate::signal::{theoretical_feature, Modulation, SignalParams, SymbolAlphabet};
use crate::spectral::CfarConfig;

/// The fourth-order feature order used for classification.
pub const FEATURE_ORDER: usize = 4;
pub const FEATURE_CONJUGATIONS: usize = 0;

/// Magnitude of the assembled cyclic cumulant used as the classification
/// feature.
#[derive(Debug, Clone)]
pub struct FeatureValue<T> {
    pub value: T,
    /// True class when known, for confusion-matrix bookkeeping.
    pub true_label: Option<Modulation>,
    pub order: usize,
    pub conjugations: usize,
    /// Cycle frequency the feature was read at, `(n - 2q) dfc`.
    pub cycle_frequency: T,
}

/// Extracts `|C(beta)_{4,0}|` at `beta = 4 dfc` from single-channel
/// (zero-delay) streams.
pub fn extract_feature<T: Scalar>(
    channels: &[NonuniformStream<T>],
    params: &SignalParams<T>,
    harmonics: usize,
    cfar: &CfarConfig,
    prune_odd_blocks: bool,
) -> Result<FeatureValue<T>> {
    let spec = LagSpec::zero_delay(FEATURE_ORDER, FEATURE_CONJUGATIONS)?;
    let plan = CandidateFrequencyPlan::for_lag_spec(
        &spec,
        params.carrier_offset,
        params.symbol_rate(),
        harmonics,
        params.sample_rate / T::cast(2.0),
        params.duration,
        prune_odd_blocks,
    )?;
    let est = estimate_compressive_cyclic_cumulant(channels, &spec, &plan, cfar)?;
    Ok(FeatureValue {
        value: est.value.norm(),
        true_label: Some(params.modulation),
        order: FEATURE_ORDER,
        conjugations: FEATURE_CONJUGATIONS,
        cycle_frequency: plan.beta,
    })
}

/// Theoretical feature list for a class set under common signal parameters.
pub fn theory_features<T: Scalar>(
    params: &SignalParams<T>,
    classes: &[Modulation],
) -> Result<Vec<(Modulation, T)>> {
    classes
        .iter()
        .map(|&m| {
            let mut p = *params;
            p.modulation = m;
            let alphabet = SymbolAlphabet::for_modulation(m);
            Ok((m, theoretical_feature(&p, &alphabet)?))
        })
        .collect()
}

/// Classification outcome; `tied` records that at least two theory values
/// were equidistant and the first-listed label won.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub label: Modulation,
    pub tied: bool,
}

/// Picks the label whose theoretical feature is nearest to the measured
/// one. Ties break toward the earlier list entry.
pub fn classify_min_distance<T: Scalar>(
    feature: &FeatureValue<T>,
    theory: &[(Modulation, T)],
) -> Result<Decision> {
    if theory.is_empty() {
        return Err(Error::config("theory feature list must be non-empty"));
    }
    for (i, (a, _)) in theory.iter().enumerate() {
        if theory.iter().skip(i + 1).any(|(b, _)| a == b) {
            return Err(Error::config(format!("duplicate label {a} in theory list")));
        }
    }
    let mut best = 0usize;
    let mut best_dist = (feature.value - theory[0].1).abs();
    let mut tied = false;
    for (i, &(_, f)) in theory.iter().enumerate().skip(1) {
        let dist = (feature.value - f).abs();
        if dist < best_dist {
            best = i;
            best_dist = dist;
            tied = false;
        } else if dist == best_dist {
            tied = true;
        }
    }
    Ok(Decision {
        label: theory[best].0,
        tied,
    })
}

/// Trial-averaged squared magnitude error normalized by the squared true
/// value: `(1/N) sum (|est_i| - |truth|)^2 / |truth|^2`.
pub fn nmse<T: Scalar>(estimates: &[Complex<T>], truth: Complex<T>) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::config("NMSE needs at least one estimate"));
    }
    let t = truth.norm().as_f64();
    if t == 0.0 {
        return Err(Error::UndefinedNmse);
    }
    let sum: f64 = estimates
        .iter()
        .map(|e| {
            let d = e.norm().as_f64() - t;
            d * d
        })
        .sum();
    Ok(sum / (estimates.len() as f64 * t * t))
}

/// Trial counts of decided class per true class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub classes: Vec<Modulation>,
    /// `counts[true][decided]`.
    pub counts: Vec<Vec<u32>>,
    pub trials_per_class: u32,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<Modulation>, trials_per_class: u32) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; n]; n],
            trials_per_class,
        }
    }

    fn index_of(&self, m: Modulation) -> usize {
        self.classes
            .iter()
            .position(|&c| c == m)
            .expect("label in class list")
    }

    pub fn record(&mut self, true_label: Modulation, decided: Modulation) {
        let t = self.index_of(true_label);
        let d = self.index_of(decided);
        self.counts[t][d] += 1;
    }

    /// Average probability of correct classification.
    pub fn pcc(&self) -> f64 {
        let correct: u32 = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        correct as f64 / (self.classes.len() as u32 * self.trials_per_class) as f64
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.counts.iter().enumerate() {
            let sum: u32 = row.iter().sum();
            if sum != self.trials_per_class {
                return Err(Error::shape(format!(
                    "row {} sums to {sum}, expected {}",
                    self.classes[i], self.trials_per_class
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConfusionMatrix {
    /// Rows are the true class, columns the decided class.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8}", "")?;
        for c in &self.classes {
            write!(f, "{:>8}", c.to_string())?;
        }
        writeln!(f)?;
        for (i, row) in self.counts.iter().enumerate() {
            write!(f, "{:>8}", self.classes[i].to_string())?;
            for v in row {
                write!(f, "{v:>8}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
