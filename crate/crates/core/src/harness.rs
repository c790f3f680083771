//! Monte Carlo experiment driver: estimator-quality (NMSE) sweeps and
//! four-class classification runs over compression rate, record length and
//! noise level.
//!
//! Determinism: every trial's randomness is derived from the base seed and
//! the trial's cell coordinates (by value, not list position), so results
//! are identical across runs and worker counts. Symbol and noise seeds do
//! not include the compression rate, so cells at different rates are
//! compared on common signal realizations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_min_distance, extract_feature, nmse, theory_features, ConfusionMatrix,
};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_compressive_cyclic_cumulant, CandidateFrequencyPlan, CyclicStatEstimate,
};
use crate::num::Scalar;
use crate::sampling::{apply_mask, make_mask, LagSpec, NonuniformStream};
use crate::seed::derive_seed;
use crate::signal::{
    add_noise_at_cnr, generate_signal, theoretical_cumulant_magnitude, Modulation, PulseShape,
    SignalParams,
};
use crate::spectral::CfarConfig;

const SEED_SYMBOLS: u64 = 1;
const SEED_NOISE: u64 = 2;
const SEED_MASK: u64 = 3;

/// One record-length configuration: the processing-symbol label with its
/// symbol and sampling rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCell {
    pub symbols: u32,
    pub symbol_rate_hz: f64,
    pub sample_rate_hz: f64,
}

/// The six standard record lengths (per one-second observations).
pub const STANDARD_CELLS: [SymbolCell; 6] = [
    SymbolCell { symbols: 13000, symbol_rate_hz: 12999.5625, sample_rate_hz: 131072.0 },
    SymbolCell { symbols: 6500, symbol_rate_hz: 6499.5625, sample_rate_hz: 65536.0 },
    SymbolCell { symbols: 3250, symbol_rate_hz: 3249.5625, sample_rate_hz: 32768.0 },
    SymbolCell { symbols: 1625, symbol_rate_hz: 1624.5625, sample_rate_hz: 16384.0 },
    SymbolCell { symbols: 800, symbol_rate_hz: 799.5625, sample_rate_hz: 8192.0 },
    SymbolCell { symbols: 400, symbol_rate_hz: 399.5625, sample_rate_hz: 4096.0 },
];

/// Looks up a standard cell by its symbol-count label.
pub fn standard_cell(symbols: u32) -> Option<SymbolCell> {
    STANDARD_CELLS.iter().copied().find(|c| c.symbols == symbols)
}

/// Full experiment protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub modulations: Vec<Modulation>,
    pub symbol_cells: Vec<SymbolCell>,
    /// Carrier-to-noise ratios in dB; `None` runs noiseless.
    pub cnrs_db: Vec<Option<f64>>,
    pub gammas: Vec<f64>,
    pub trials: u32,
    pub base_seed: u64,
    /// (order, conjugations) pairs for the NMSE sweep.
    pub orders: Vec<(usize, usize)>,
    /// Candidate harmonic span `K`.
    pub harmonics: usize,
    pub cfar: CfarConfig,
    pub amplitude: f64,
    pub carrier_offset_hz: f64,
    pub carrier_phase_rad: f64,
    pub timing_offset_s: f64,
    pub rolloff: f64,
    pub duration_s: f64,
    pub prune_odd_blocks: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            modulations: Modulation::ALL.to_vec(),
            symbol_cells: STANDARD_CELLS.to_vec(),
            cnrs_db: vec![None, Some(9.0), Some(6.0), Some(3.0)],
            gammas: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            trials: 50,
            base_seed: 0x5EED,
            orders: vec![(4, 0), (4, 2), (6, 3)],
            harmonics: 6,
            cfar: CfarConfig::default(),
            amplitude: 1.0,
            carrier_offset_hz: 23.0625,
            carrier_phase_rad: 0.0,
            timing_offset_s: 0.0,
            rolloff: 0.3,
            duration_s: 1.0,
            prune_odd_blocks: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.modulations.is_empty() || self.symbol_cells.is_empty() {
            return Err(Error::config("modulations and symbol cells must be non-empty"));
        }
        if self.gammas.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::config("every gamma must lie in (0, 1]"));
        }
        if self.cnrs_db.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::config("finite CNR values only (None for noiseless)"));
        }
        if self.orders.iter().any(|&(n, q)| n == 0 || q > n) {
            return Err(Error::config("orders must satisfy n >= 1, q <= n"));
        }
        for cell in &self.symbol_cells {
            self.signal_params::<f64>(self.modulations[0], cell).validate()?;
        }
        Ok(())
    }

    /// Signal parameters of one cell.
    pub fn signal_params<T: Scalar>(
        &self,
        modulation: Modulation,
        cell: &SymbolCell,
    ) -> SignalParams<T> {
        SignalParams {
            amplitude: T::cast(self.amplitude),
            symbol_period: T::one() / T::cast(cell.symbol_rate_hz),
            carrier_offset: T::cast(self.carrier_offset_hz),
            carrier_phase: T::cast(self.carrier_phase_rad),
            timing_offset: T::cast(self.timing_offset_s),
            rolloff: T::cast(self.rolloff),
            modulation,
            pulse: PulseShape::RaisedCosine,
            sample_rate: T::cast(cell.sample_rate_hz),
            duration: T::cast(self.duration_s),
        }
    }

    /// Stable hex digest of the serialized protocol.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn cnr_as_f64(cnr: Option<f64>) -> f64 {
    cnr.unwrap_or(f64::INFINITY)
}

/// Seed coordinates shared by one trial. Keyed by parameter values so that
/// reordering config lists cannot change results.
fn trial_keys<T: Scalar>(params: &SignalParams<T>) -> [u64; 3] {
    [
        params.modulation as u64,
        params.num_samples().unwrap_or(0) as u64,
        params.symbol_period.as_f64().to_bits(),
    ]
}

/// Runs one acquisition-plus-estimation trial for a zero-delay lag spec.
pub fn run_cumulant_trial<T: Scalar>(
    params: &SignalParams<T>,
    cnr_db: Option<f64>,
    gamma: f64,
    spec: &LagSpec,
    plan: &CandidateFrequencyPlan<T>,
    cfar: &CfarConfig,
    base_seed: u64,
    trial: u64,
) -> Result<CyclicStatEstimate<T>> {
    let keys = trial_keys(params);
    let sym_seed = derive_seed(base_seed, &[SEED_SYMBOLS, keys[0], keys[1], keys[2], trial]);
    let noise_seed = derive_seed(base_seed, &[SEED_NOISE, keys[0], keys[1], keys[2], trial]);
    let mask_seed = derive_seed(
        base_seed,
        &[SEED_MASK, keys[0], keys[1], keys[2], gamma.to_bits(), trial],
    );

    let clean = generate_signal(params, sym_seed)?;
    let received = add_noise_at_cnr(&clean, cnr_as_f64(cnr_db), noise_seed)?;
    let mask = make_mask(received.len(), gamma, mask_seed)?;
    let channels: Vec<NonuniformStream<T>> = spec
        .distinct_delays()
        .iter()
        .map(|&d| apply_mask(&received, &mask, d))
        .collect::<Result<_>>()?;
    let mut est = estimate_compressive_cyclic_cumulant(&channels, spec, plan, cfar)?;
    est.mask_seed = Some(mask_seed);
    Ok(est)
}

/// Status of one experiment cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    /// The theoretical cumulant is zero, so NMSE is undefined; cell kept
    /// as an explicit marker.
    SkippedZeroTruth,
    Failed(String),
}

/// One NMSE grid entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NmseCell {
    pub modulation: Modulation,
    pub order: usize,
    pub conjugations: usize,
    pub symbols: u32,
    pub cnr_db: Option<f64>,
    pub gamma: f64,
    pub trials: u32,
    pub truth: f64,
    pub nmse: Option<f64>,
    pub status: CellStatus,
}

/// Estimator-quality sweep: per cell, estimate the cyclic cumulant over
/// fresh trials and report the NMSE against the closed-form value.
pub fn run_nmse_experiment<T: Scalar>(config: &ExperimentConfig) -> Result<Vec<NmseCell>> {
    config.validate()?;
    let mut cells = Vec::new();
    for &(order, conjugations) in &config.orders {
        let spec = LagSpec::zero_delay(order, conjugations)?;
        for cell in &config.symbol_cells {
            for &modulation in &config.modulations {
                let params = config.signal_params::<T>(modulation, cell);
                let alphabet = params.alphabet();
                let truth =
                    theoretical_cumulant_magnitude(&params, &alphabet, order, conjugations)?
                        .as_f64();
                let plan = CandidateFrequencyPlan::for_lag_spec(
                    &spec,
                    params.carrier_offset,
                    params.symbol_rate(),
                    config.harmonics,
                    params.sample_rate / T::cast(2.0),
                    params.duration,
                    config.prune_odd_blocks,
                )?;
                for &cnr_db in &config.cnrs_db {
                    for &gamma in &config.gammas {
                        let mut out = NmseCell {
                            modulation,
                            order,
                            conjugations,
                            symbols: cell.symbols,
                            cnr_db,
                            gamma,
                            trials: config.trials,
                            truth,
                            nmse: None,
                            status: CellStatus::Ok,
                        };
                        if truth < 1e-9 {
                            out.status = CellStatus::SkippedZeroTruth;
                            cells.push(out);
                            continue;
                        }
                        let estimates: Result<Vec<_>> = (0..config.trials as u64)
                            .into_par_iter()
                            .map(|trial| {
                                run_cumulant_trial(
                                    &params,
                                    cnr_db,
                                    gamma,
                                    &spec,
                                    &plan,
                                    &config.cfar,
                                    config.base_seed,
                                    trial,
                                )
                                .map(|e| e.value)
                            })
                            .collect();
                        match estimates {
                            Ok(values) => {
                                let truth_c = num_complex::Complex::new(T::cast(truth), T::zero());
                                out.nmse = Some(nmse(&values, truth_c)?);
                            }
                            Err(err) => out.status = CellStatus::Failed(err.to_string()),
                        }
                        cells.push(out);
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// One classification cell: the confusion matrix over the class set.
#[derive(Debug, Clone)]
pub struct ClassificationCell {
    pub symbols: u32,
    pub cnr_db: Option<f64>,
    pub gamma: f64,
    pub matrix: ConfusionMatrix,
    pub pcc: f64,
    /// Count of tie-broken decisions, recorded for the audit log.
    pub ties: u32,
}

/// Four-class minimum-distance classification over the experiment grid.
pub fn run_classification_experiment<T: Scalar>(
    config: &ExperimentConfig,
) -> Result<Vec<ClassificationCell>> {
    config.validate()?;
    let mut cells = Vec::new();
    for cell in &config.symbol_cells {
        // Theory features depend on the cell rates only.
        let base_params = config.signal_params::<T>(config.modulations[0], cell);
        let theory = theory_features(&base_params, &config.modulations)?;
        for &cnr_db in &config.cnrs_db {
            for &gamma in &config.gammas {
                let mut matrix =
                    ConfusionMatrix::new(config.modulations.to_vec(), config.trials);
                let mut ties = 0u32;
                for &modulation in &config.modulations {
                    let params = config.signal_params::<T>(modulation, cell);
                    let keys = trial_keys(&params);
                    let decisions: Result<Vec<_>> = (0..config.trials as u64)
                        .into_par_iter()
                        .map(|trial| {
                            let sym_seed = derive_seed(
                                config.base_seed,
                                &[SEED_SYMBOLS, keys[0], keys[1], keys[2], trial],
                            );
                            let noise_seed = derive_seed(
                                config.base_seed,
                                &[SEED_NOISE, keys[0], keys[1], keys[2], trial],
                            );
                            let mask_seed = derive_seed(
                                config.base_seed,
                                &[SEED_MASK, keys[0], keys[1], keys[2], gamma.to_bits(), trial],
                            );
                            let clean = generate_signal(&params, sym_seed)?;
                            let received =
                                add_noise_at_cnr(&clean, cnr_as_f64(cnr_db), noise_seed)?;
                            let mask = make_mask(received.len(), gamma, mask_seed)?;
                            let channel = apply_mask(&received, &mask, 0)?;
                            let feature = extract_feature(
                                &[channel],
                                &params,
                                config.harmonics,
                                &config.cfar,
                                config.prune_odd_blocks,
                            )?;
                            classify_min_distance(&feature, &theory)
                        })
                        .collect();
                    for decision in decisions? {
                        matrix.record(modulation, decision.label);
                        if decision.tied {
                            ties += 1;
                        }
                    }
                }
                matrix.validate()?;
                let pcc = matrix.pcc();
                cells.push(ClassificationCell {
                    symbols: cell.symbols,
                    cnr_db,
                    gamma,
                    matrix,
                    pcc,
                    ties,
                });
            }
        }
    }
    Ok(cells)
}

fn cnr_label(cnr: Option<f64>) -> String {
    match cnr {
        None => "inf".to_string(),
        Some(v) => format!("{v}"),
    }
}

/// `nmse.csv` body: one row per cell.
pub fn nmse_csv(cells: &[NmseCell]) -> String {
    let mut out = String::from(
        "modulation,order,conjugations,symbols,cnr_db,gamma,trials,truth,nmse,status\n",
    );
    for c in cells {
        let status = match &c.status {
            CellStatus::Ok => "ok".to_string(),
            CellStatus::SkippedZeroTruth => "skipped_zero_truth".to_string(),
            CellStatus::Failed(msg) => format!("failed: {}", msg.replace(',', ";")),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.modulation,
            c.order,
            c.conjugations,
            c.symbols,
            cnr_label(c.cnr_db),
            c.gamma,
            c.trials,
            c.truth,
            c.nmse.map(|v| v.to_string()).unwrap_or_default(),
            status,
        ));
    }
    out
}

/// File-name fragment identifying one classification cell.
pub fn cell_tag(symbols: u32, cnr_db: Option<f64>, gamma: f64) -> String {
    format!("cnr{}_sym{}_g{:.2}", cnr_label(cnr_db), symbols, gamma)
}

/// `confusion_<cell>.csv` body: true class rows, decided class columns.
pub fn confusion_csv(cell: &ClassificationCell) -> String {
    let mut out = String::from("true_class");
    for c in &cell.matrix.classes {
        out.push_str(&format!(",{c}"));
    }
    out.push('\n');
    for (i, row) in cell.matrix.counts.iter().enumerate() {
        out.push_str(&cell.matrix.classes[i].to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// `pcc.csv` body over all classification cells.
pub fn pcc_csv(cells: &[ClassificationCell]) -> String {
    let mut out = String::from("symbols,cnr_db,gamma,pcc,ties\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.symbols,
            cnr_label(c.cnr_db),
            c.gamma,
            c.pcc,
            c.ties
        ));
    }
    out
}

/// Reproducibility record for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub base_seed: u64,
    pub cells: usize,
    pub wall_ms: u128,
}
