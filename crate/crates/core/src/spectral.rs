//! Spectrum estimation from nonuniform samples and peak detection.
//!
//! The zero-padded DFT scatters the retained samples onto the full grid and
//! applies a length-L FFT under a 1/L time-average scaling, so a full-rate
//! unit tone lands on a unit-magnitude bin. Exact-frequency projection
//! avoids grid straddle when candidate cycle frequencies fall between bins.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::sampling::NonuniformStream;

/// Scaling convention attached to a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumScaling {
    /// 1/L forward scaling: bins are time averages.
    TimeAverage,
    /// 1/sqrt(L) forward scaling: the unitary transform.
    Unitary,
}

/// DFT bins of one record, length equal to the originating grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub bins: Vec<Complex<T>>,
    /// Hz between adjacent bins, `1/(L Ts)`.
    pub bin_spacing: T,
    pub scaling: SpectrumScaling,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn nyquist(&self) -> T {
        self.bin_spacing * T::cast(self.len() as f64 / 2.0)
    }

    /// Frequency of bin `k`, wrapped into (-Nyquist, Nyquist].
    pub fn frequency(&self, bin: usize) -> T {
        let l = self.len();
        let k = if bin <= l / 2 {
            bin as f64
        } else {
            bin as f64 - l as f64
        };
        self.bin_spacing * T::cast(k)
    }

    /// Nearest bin to `freq` (Hz, may be negative), modulo the grid.
    pub fn bin_for(&self, freq: T) -> usize {
        let l = self.len() as i64;
        let k = (freq / self.bin_spacing).round().as_f64() as i64;
        k.rem_euclid(l) as usize
    }

    /// |bin|^2 at index `k`.
    pub fn power(&self, k: usize) -> T {
        self.bins[k].norm_sqr()
    }
}

/// Zero-padded DFT of a nonuniform stream: scatter, FFT, scale by 1/L.
pub fn zero_padded_dft<T: Scalar>(w: &NonuniformStream<T>, len: usize) -> Result<Spectrum<T>> {
    w.validate()?;
    if w.sample_indices.last().is_some_and(|&i| i >= len) {
        return Err(Error::shape(format!(
            "stream index beyond requested transform length {len}"
        )));
    }
    if len == 0 {
        return Err(Error::shape("transform length must be positive"));
    }
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    for ((&idx, &ok), &v) in w.sample_indices.iter().zip(&w.valid).zip(&w.values) {
        if ok {
            buf[idx] = v;
        }
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = T::one() / T::cast(len as f64);
    for b in &mut buf {
        *b = *b * scale;
    }
    Ok(Spectrum {
        bins: buf,
        bin_spacing: w.sample_rate / T::cast(len as f64),
        scaling: SpectrumScaling::TimeAverage,
    })
}

/// Time-average projection without compression rescaling:
/// `(1/L) sum_k w[k] exp(-j 2 pi alpha t_k)` with `t_k = index_k * Ts`.
pub fn project_at_frequency_unrescaled<T: Scalar>(
    w: &NonuniformStream<T>,
    alpha: T,
) -> Complex<T> {
    let ts = T::one() / w.sample_rate;
    let minus_two_pi = -T::cast(2.0) * T::PI();
    let mut acc = Complex::new(T::zero(), T::zero());
    for ((&idx, &ok), &v) in w.sample_indices.iter().zip(&w.valid).zip(&w.values) {
        if !ok {
            continue;
        }
        let theta = minus_two_pi * alpha * ts * T::cast(idx as f64);
        acc += v * Complex::cis(theta);
    }
    acc / T::cast(w.grid_len as f64)
}

/// Compressive projection at an exact frequency, including the 1/gamma
/// rescaling that undoes the average thinning loss.
pub fn project_at_frequency<T: Scalar>(w: &NonuniformStream<T>, alpha: T) -> Complex<T> {
    project_at_frequency_unrescaled(w, alpha) / T::cast(w.gamma)
}

/// Cell-averaging CFAR layout and threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfarConfig {
    /// Cells skipped on each side of the cell under test.
    pub guard_cells: usize,
    /// Averaged cells per side beyond the guards.
    pub training_cells: usize,
    /// Design false-alarm probability per tested cell.
    pub pfa: f64,
    /// Half-width (bins) of the local-maximum veto used in blind scans.
    pub neighborhood: usize,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig {
            guard_cells: 2,
            training_cells: 16,
            pfa: 1e-3,
            neighborhood: 3,
        }
    }
}

impl CfarConfig {
    /// CA-CFAR scale factor `N (pfa^(-1/N) - 1)` for `N` training cells.
    pub fn threshold_factor(&self) -> f64 {
        let n = (2 * self.training_cells) as f64;
        n * (self.pfa.powf(-1.0 / n) - 1.0)
    }
}

/// One detected spectral line.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T> {
    /// Tested frequency in Hz (the candidate itself, or the bin center in
    /// blind scans).
    pub frequency: T,
    /// Complex bin value at the tested cell.
    pub value: Complex<T>,
    pub magnitude: T,
    /// Ratio of cell power to mean training power.
    pub statistic: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakList<T> {
    pub peaks: Vec<Peak<T>>,
}

impl<T: Scalar> PeakList<T> {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn contains_frequency(&self, freq: T, tol: T) -> bool {
        self.peaks.iter().any(|p| (p.frequency - freq).abs() <= tol)
    }
}

fn cfar_cell_test<T: Scalar>(spec: &Spectrum<T>, bin: usize, cfg: &CfarConfig) -> (bool, T) {
    let l = spec.len() as i64;
    let mut training_sum = T::zero();
    let lo = cfg.guard_cells + 1;
    let hi = cfg.guard_cells + cfg.training_cells;
    for off in lo..=hi {
        let a = (bin as i64 + off as i64).rem_euclid(l) as usize;
        let b = (bin as i64 - off as i64).rem_euclid(l) as usize;
        training_sum += spec.power(a) + spec.power(b);
    }
    let mean_training = training_sum / T::cast((2 * cfg.training_cells) as f64);
    let power = spec.power(bin);
    let statistic = if mean_training > T::zero() {
        power / mean_training
    } else if power > T::zero() {
        T::infinity()
    } else {
        T::zero()
    };
    let factor = T::cast(cfg.threshold_factor());
    (statistic > factor, statistic)
}

/// Cell-averaging CFAR detection.
///
/// With `candidates` given, only the bins nearest those frequencies are
/// tested and each detection reports the candidate frequency. With `None`,
/// every bin is tested and a detection must also be the largest magnitude
/// within `cfg.neighborhood` bins.
pub fn cfar_detect<T: Scalar>(
    spec: &Spectrum<T>,
    candidates: Option<&[T]>,
    cfg: &CfarConfig,
) -> Result<PeakList<T>> {
    if !(cfg.pfa > 0.0 && cfg.pfa < 1.0) {
        return Err(Error::config(format!("pfa must lie in (0,1), got {}", cfg.pfa)));
    }
    let window = 2 * (cfg.guard_cells + cfg.training_cells) + 1;
    if spec.len() < window {
        return Err(Error::config(format!(
            "spectrum length {} shorter than CFAR window {window}",
            spec.len()
        )));
    }
    let mut peaks = Vec::new();
    match candidates {
        Some(freqs) => {
            let nyquist = spec.nyquist();
            for &f in freqs {
                if f.abs() > nyquist {
                    return Err(Error::config(format!(
                        "candidate {f} beyond Nyquist {nyquist}"
                    )));
                }
                let bin = spec.bin_for(f);
                let (detected, statistic) = cfar_cell_test(spec, bin, cfg);
                if detected {
                    peaks.push(Peak {
                        frequency: f,
                        value: spec.bins[bin],
                        magnitude: spec.bins[bin].norm(),
                        statistic,
                    });
                }
            }
        }
        None => {
            let l = spec.len() as i64;
            for bin in 0..spec.len() {
                let (detected, statistic) = cfar_cell_test(spec, bin, cfg);
                if !detected {
                    continue;
                }
                let mag = spec.bins[bin].norm();
                let local_max = (1..=cfg.neighborhood as i64).all(|off| {
                    let a = (bin as i64 + off).rem_euclid(l) as usize;
                    let b = (bin as i64 - off).rem_euclid(l) as usize;
                    mag >= spec.bins[a].norm() && mag >= spec.bins[b].norm()
                });
                if local_max {
                    peaks.push(Peak {
                        frequency: spec.frequency(bin),
                        value: spec.bins[bin],
                        magnitude: mag,
                        statistic,
                    });
                }
            }
        }
    }
    Ok(PeakList { peaks })
}
