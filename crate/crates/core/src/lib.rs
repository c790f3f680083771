//! Estimation of temporal higher-order cyclostationary statistics (cyclic
//! moments and cyclic cumulants) directly from low-rate nonuniform samples,
//! with Monte Carlo drivers for estimator-quality and modulation-
//! classification experiments.
//!
//! The pipeline: synthesize a PSK/QAM record ([`signal`]), thin it with a
//! shared Bernoulli clock and form lag products ([`sampling`]), estimate the
//! lag-product spectrum by zero-padded DFT or exact projection and gate
//! candidate lines with CA-CFAR ([`spectral`]), combine detected cyclic
//! moments into cyclic cumulants over set partitions ([`partitions`],
//! [`estimation`]), then classify and score ([`classify`], [`harness`]).
//! [`rip`] holds a desk-scale verifier for the coefficient-error bound of
//! the thinned DFT estimate.
//!
//! All numeric kernels are generic over the scalar type via [`num::Scalar`]
//! (`f32` or `f64`); the aliases below fix the common double-precision
//! instantiations.

pub mod classify;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod io;
pub mod num;
pub mod partitions;
pub mod rip;
pub mod sampling;
pub mod seed;
pub mod series;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use num::Scalar;

pub use classify::{ConfusionMatrix, Decision, FeatureValue};
pub use estimation::{CandidateFrequencyPlan, CyclicStatEstimate, MomentTable, StatKind};
pub use harness::{ExperimentConfig, NmseCell, SymbolCell};
pub use partitions::{BlockSignature, Partition, PartitionSet};
pub use rip::RipReport;
pub use sampling::{LagSpec, NonuniformStream, SamplingMask};
pub use series::ComplexSeries;
pub use signal::{Modulation, PulseShape, SignalParams, SymbolAlphabet};
pub use spectral::{CfarConfig, Peak, PeakList, Spectrum};

/// Double-precision instantiations of the generic core types.
pub type Series64 = ComplexSeries<f64>;
pub type Stream64 = NonuniformStream<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type SignalParams64 = SignalParams<f64>;
pub type Alphabet64 = SymbolAlphabet<f64>;
pub type Estimate64 = CyclicStatEstimate<f64>;
pub type Plan64 = CandidateFrequencyPlan<f64>;
pub type Feature64 = FeatureValue<f64>;

/// Single-precision aliases for memory-constrained capture paths.
pub type Series32 = ComplexSeries<f32>;
pub type Stream32 = NonuniformStream<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type SignalParams32 = SignalParams<f32>;
