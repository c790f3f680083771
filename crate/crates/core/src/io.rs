//! Dump formats: binary sample records, run-length-encoded masks and CSV
//! tables for streams, spectra, peaks and estimates.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::estimation::CyclicStatEstimate;
use crate::num::Scalar;
use crate::sampling::{NonuniformStream, SamplingMask};
use crate::series::ComplexSeries;
use crate::spectral::{PeakList, Spectrum};

const SERIES_MAGIC: &[u8; 4] = b"CTH1";
const MASK_MAGIC: &[u8; 4] = b"CTHM";

/// Binary sample dump: magic "CTH1", u32 length, f64 sample rate, then
/// little-endian interleaved f64 re/im pairs.
pub fn write_series_binary<T: Scalar>(series: &ComplexSeries<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SERIES_MAGIC)?;
    w.write_all(&(series.len() as u32).to_le_bytes())?;
    w.write_all(&series.sample_rate.as_f64().to_le_bytes())?;
    for z in &series.samples {
        w.write_all(&z.re.as_f64().to_le_bytes())?;
        w.write_all(&z.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_series_binary<T: Scalar>(path: &Path) -> Result<ComplexSeries<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SERIES_MAGIC {
        return Err(Error::Format("bad series magic".into()));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let len = u32::from_le_bytes(u32buf) as usize;
    let mut f64buf = [0u8; 8];
    r.read_exact(&mut f64buf)?;
    let sample_rate = f64::from_le_bytes(f64buf);
    let mut samples = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut f64buf)?;
        let re = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let im = f64::from_le_bytes(f64buf);
        samples.push(Complex::new(T::cast(re), T::cast(im)));
    }
    ComplexSeries::new(samples, T::cast(sample_rate), T::zero())
}

/// CSV dump `(index, re, im)`.
pub fn write_series_csv<T: Scalar>(series: &ComplexSeries<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,re,im")?;
    for (i, z) in series.samples.iter().enumerate() {
        writeln!(w, "{},{},{}", i, z.re.as_f64(), z.im.as_f64())?;
    }
    Ok(())
}

/// CSV dump of a nonuniform stream `(index, re, im)`, valid entries only.
pub fn write_stream_csv<T: Scalar>(stream: &NonuniformStream<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,re,im")?;
    for ((&idx, &ok), z) in stream
        .sample_indices
        .iter()
        .zip(&stream.valid)
        .zip(&stream.values)
    {
        if ok {
            writeln!(w, "{},{},{}", idx, z.re.as_f64(), z.im.as_f64())?;
        }
    }
    Ok(())
}

/// Run-length-encoded mask dump: magic "CTHM", u32 length, f64 gamma,
/// u64 seed, u8 first bit, then u32 run lengths alternating from the first
/// bit until the grid is covered.
pub fn write_mask_rle(mask: &SamplingMask, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MASK_MAGIC)?;
    w.write_all(&(mask.len() as u32).to_le_bytes())?;
    w.write_all(&mask.gamma.to_le_bytes())?;
    w.write_all(&mask.seed.to_le_bytes())?;
    let first = mask.bits[0];
    w.write_all(&[first as u8])?;
    let mut current = first;
    let mut run: u32 = 0;
    for &b in &mask.bits {
        if b == current {
            run += 1;
        } else {
            w.write_all(&run.to_le_bytes())?;
            current = b;
            run = 1;
        }
    }
    w.write_all(&run.to_le_bytes())?;
    Ok(())
}

pub fn read_mask_rle(path: &Path) -> Result<SamplingMask> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MASK_MAGIC {
        return Err(Error::Format("bad mask magic".into()));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let len = u32::from_le_bytes(u32buf) as usize;
    let mut f64buf = [0u8; 8];
    r.read_exact(&mut f64buf)?;
    let gamma = f64::from_le_bytes(f64buf);
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let seed = u64::from_le_bytes(u64buf);
    let mut bit = [0u8; 1];
    r.read_exact(&mut bit)?;
    let mut current = bit[0] != 0;
    let mut bits = Vec::with_capacity(len);
    while bits.len() < len {
        r.read_exact(&mut u32buf)?;
        let run = u32::from_le_bytes(u32buf) as usize;
        if run == 0 || bits.len() + run > len {
            return Err(Error::Format("corrupt mask run length".into()));
        }
        bits.extend(std::iter::repeat(current).take(run));
        current = !current;
    }
    let ones = bits.iter().filter(|&&b| b).count();
    Ok(SamplingMask {
        bits,
        gamma,
        seed,
        ones,
        resampled: 0,
        rate_warning: false,
    })
}

/// CSV dump `(freq_hz, re, im, mag)` over all bins.
pub fn write_spectrum_csv<T: Scalar>(spectrum: &Spectrum<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "freq_hz,re,im,mag")?;
    for k in 0..spectrum.len() {
        let z = spectrum.bins[k];
        writeln!(
            w,
            "{},{},{},{}",
            spectrum.frequency(k).as_f64(),
            z.re.as_f64(),
            z.im.as_f64(),
            z.norm().as_f64()
        )?;
    }
    Ok(())
}

pub fn write_peaks_csv<T: Scalar>(peaks: &PeakList<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "freq_hz,re,im,mag,statistic")?;
    for p in &peaks.peaks {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.frequency.as_f64(),
            p.value.re.as_f64(),
            p.value.im.as_f64(),
            p.magnitude.as_f64(),
            p.statistic.as_f64()
        )?;
    }
    Ok(())
}

/// CSV table of estimates:
/// `(kind, n, q, tau_samples, freq_hz, re, im, gamma, t_hat_s, mask_seed)`.
pub fn write_estimates_csv<T: Scalar>(
    estimates: &[CyclicStatEstimate<T>],
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "kind,n,q,tau_samples,freq_hz,re,im,gamma,t_hat_s,mask_seed")?;
    for e in estimates {
        let tau = e
            .delay_samples
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            e.kind,
            e.order,
            e.conjugations,
            tau,
            e.cycle_frequency.as_f64(),
            e.value.re.as_f64(),
            e.value.im.as_f64(),
            e.gamma,
            e.observation.as_f64(),
            e.mask_seed.map(|s| s.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}
