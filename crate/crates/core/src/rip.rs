//! Desk-scale restricted-isometry bound verification.
//!
//! For a selection-times-DFT measurement matrix `A = sqrt(L/P) R Phi` the
//! isometry constant of order `s+1` is computed exactly by enumerating every
//! (s+1)-column Gram submatrix and taking extreme eigenvalues. The report
//! compares each zero-padded DFT coefficient error against
//! `delta ||eta_s||_2 + delta (m-1) sqrt(s) ||eta_t||_inf`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::sampling::SamplingMask;
use crate::series::ComplexSeries;

/// Hard ceiling on the exhaustive search: C(64, 4) Gram eigensolves.
pub const MAX_RIP_GRID: usize = 64;
pub const MAX_RIP_SPARSITY: usize = 3;

/// Outcome of one bound check.
#[derive(Debug, Clone)]
pub struct RipReport<T> {
    /// Peak count `s` used to split the coefficient vector.
    pub sparsity: usize,
    /// `m = ceil(L/s)`, the chunk count of the residual split.
    pub block_count: usize,
    /// Exact isometry constant of order `s+1`.
    pub delta: T,
    /// Bins holding the `s` retained peaks, by descending magnitude.
    pub peak_bins: Vec<usize>,
    /// `|eta_hat[k] - eta[k]|` per bin.
    pub per_bin_error: Vec<T>,
    /// Bound right-hand side.
    pub rhs: T,
    /// Whether every per-bin error stays within `rhs` (with floating-point
    /// slack).
    pub holds: bool,
}

impl<T: Scalar> RipReport<T> {
    pub fn max_error(&self) -> T {
        self.per_bin_error
            .iter()
            .copied()
            .fold(T::zero(), T::max)
    }
}

/// Checks the coefficient-error bound for one record and mask.
pub fn rip_bound_check<T: Scalar>(
    y_lag: &ComplexSeries<T>,
    mask: &SamplingMask,
    sparsity: usize,
) -> Result<RipReport<T>> {
    let len = y_lag.len();
    if len != mask.len() {
        return Err(Error::shape(format!(
            "record length {len} does not match mask length {}",
            mask.len()
        )));
    }
    if len > MAX_RIP_GRID {
        return Err(Error::config(format!(
            "exhaustive check limited to L <= {MAX_RIP_GRID}, got {len}"
        )));
    }
    if sparsity == 0 || sparsity > MAX_RIP_SPARSITY {
        return Err(Error::config(format!(
            "exhaustive check limited to 1 <= s <= {MAX_RIP_SPARSITY}, got {sparsity}"
        )));
    }
    if sparsity + 1 > len {
        return Err(Error::config("s + 1 exceeds the grid length"));
    }

    // Unitary DFT coefficients of the full record and of the zero-padded
    // selection, the latter scaled by sqrt(L/P).
    let eta = unitary_dft(&y_lag.samples);
    let selected: Vec<Complex<T>> = y_lag
        .samples
        .iter()
        .zip(&mask.bits)
        .map(|(&v, &b)| if b { v } else { Complex::new(T::zero(), T::zero()) })
        .collect();
    let mut eta_hat = unitary_dft(&selected);
    let rescale = T::cast((len as f64 / mask.ones as f64).sqrt());
    for v in &mut eta_hat {
        *v = *v * rescale;
    }

    // Peak/residue split by magnitude, ties by bin order.
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| {
        eta[b]
            .norm_sqr()
            .partial_cmp(&eta[a].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    let peak_bins: Vec<usize> = order[..sparsity].to_vec();
    let norm_peaks = peak_bins
        .iter()
        .map(|&k| eta[k].norm_sqr())
        .fold(T::zero(), |a, v| a + v)
        .sqrt();
    let tail_max = order[sparsity..]
        .iter()
        .map(|&k| eta[k].norm())
        .fold(T::zero(), T::max);

    let delta = exact_isometry_constant::<T>(mask, sparsity + 1);
    let block_count = len.div_ceil(sparsity);
    let rhs = delta * norm_peaks
        + delta
            * T::cast((block_count - 1) as f64)
            * T::cast(sparsity as f64).sqrt()
            * tail_max;

    let per_bin_error: Vec<T> = eta_hat
        .iter()
        .zip(&eta)
        .map(|(a, b)| (a - b).norm())
        .collect();
    // Slack for accumulated FFT and eigensolve roundoff; the bound itself
    // is exact in exact arithmetic.
    let eta_norm = eta.iter().map(|v| v.norm_sqr()).fold(T::zero(), |a, v| a + v).sqrt();
    let slack = T::epsilon() * T::cast(512.0) * (T::one() + eta_norm);
    let holds = per_bin_error.iter().all(|&e| e <= rhs + slack);

    Ok(RipReport {
        sparsity,
        block_count,
        delta,
        peak_bins,
        per_bin_error,
        rhs,
        holds,
    })
}

fn unitary_dft<T: Scalar>(samples: &[Complex<T>]) -> Vec<Complex<T>> {
    let len = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = T::one() / T::cast(len as f64).sqrt();
    for v in &mut buf {
        *v = *v * scale;
    }
    buf
}

/// Exact order-`r` isometry constant of `sqrt(L/P) R Phi`: the largest
/// deviation of any r-column Gram spectrum from unity.
///
/// Gram entries depend only on column differences,
/// `g(d) = (1/P) sum_{p in mask} exp(j 2 pi p d / L)`.
pub fn exact_isometry_constant<T: Scalar>(mask: &SamplingMask, order: usize) -> T {
    let len = mask.len();
    let ones = mask.indices();
    let two_pi = 2.0 * std::f64::consts::PI;
    let gram_kernel: Vec<Complex<T>> = (0..len)
        .map(|d| {
            let mut acc = Complex::new(0.0f64, 0.0);
            for &p in &ones {
                acc += Complex::cis(two_pi * (p as f64) * (d as f64) / len as f64);
            }
            acc /= ones.len() as f64;
            Complex::new(T::cast(acc.re), T::cast(acc.im))
        })
        .collect();

    let mut delta = T::zero();
    let mut gram = vec![vec![Complex::new(T::zero(), T::zero()); order]; order];
    for_each_combination(len, order, &mut |subset| {
        for (i, &a) in subset.iter().enumerate() {
            for (j, &b) in subset.iter().enumerate() {
                let d = (b as i64 - a as i64).rem_euclid(len as i64) as usize;
                gram[i][j] = gram_kernel[d];
            }
        }
        let (lo, hi) = hermitian_extreme_eigenvalues(&mut gram);
        let dev = (hi - T::one()).max(T::one() - lo);
        if dev > delta {
            delta = dev;
        }
    });
    delta
}

/// Visits every k-combination of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    debug_assert!(k >= 1 && k <= n);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Extreme eigenvalues of a small Hermitian matrix by cyclic Jacobi with
/// complex rotations. The matrix is destroyed.
fn hermitian_extreme_eigenvalues<T: Scalar>(g: &mut [Vec<Complex<T>>]) -> (T, T) {
    let n = g.len();
    if n == 1 {
        let v = g[0][0].re;
        return (v, v);
    }
    let scale: T = (0..n)
        .map(|i| (0..n).map(|j| g[i][j].norm_sqr()).fold(T::zero(), |a, v| a + v))
        .fold(T::zero(), |a, v| a + v)
        .sqrt()
        .max(T::one());
    let tol = T::epsilon() * scale;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += g[p][q].norm();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = g[p][q];
                let mag = apq.norm();
                if mag <= tol / T::cast((n * n) as f64) {
                    continue;
                }
                let phase = apq / mag;
                let app = g[p][p].re;
                let aqq = g[q][q].re;
                let tau = (aqq - app) / (T::cast(2.0) * mag);
                // Smaller-magnitude root of t^2 - 2 tau t - 1 = 0.
                let t = -tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Column update G <- G U with U = [[c, -s e^{j phi}],
                // [s e^{-j phi}, c]] acting on columns (p, q).
                let se_m = phase.conj() * s;
                let se_p = phase * s;
                for r in 0..n {
                    let grp = g[r][p];
                    let grq = g[r][q];
                    g[r][p] = grp * c + grq * se_m;
                    g[r][q] = grq * c - grp * se_p;
                }
                // Row update G <- U^H G.
                for r in 0..n {
                    let gpr = g[p][r];
                    let gqr = g[q][r];
                    g[p][r] = gpr * c + gqr * se_p;
                    g[q][r] = gqr * c - gpr * se_m;
                }
                g[p][q] = Complex::new(T::zero(), T::zero());
                g[q][p] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    let mut lo = g[0][0].re;
    let mut hi = lo;
    for i in 1..n {
        lo = lo.min(g[i][i].re);
        hi = hi.max(g[i][i].re);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::make_mask;

    fn hermitian(entries: &[&[(f64, f64)]]) -> Vec<Vec<Complex<f64>>> {
        entries
            .iter()
            .map(|row| row.iter().map(|&(re, im)| Complex::new(re, im)).collect())
            .collect()
    }

    #[test]
    fn two_by_two_eigenvalues_closed_form() {
        // [[1, g], [conj(g), 1]] has eigenvalues 1 +/- |g|.
        let g = Complex::new(0.3, -0.4);
        let mut m = hermitian(&[&[(1.0, 0.0), (0.3, -0.4)], &[(0.3, 0.4), (1.0, 0.0)]]);
        let (lo, hi) = hermitian_extreme_eigenvalues(&mut m);
        assert!((lo - (1.0 - g.norm())).abs() < 1e-12);
        assert!((hi - (1.0 + g.norm())).abs() < 1e-12);
    }

    #[test]
    fn three_by_three_invariants() {
        let m0 = hermitian(&[
            &[(2.0, 0.0), (0.5, 0.2), (-0.1, 0.7)],
            &[(0.5, -0.2), (1.0, 0.0), (0.3, -0.3)],
            &[(-0.1, -0.7), (0.3, 0.3), (0.5, 0.0)],
        ]);
        // Characteristic invariants: trace and Frobenius norm are spectral
        // sums; verify against full eigenvalue extraction via repeated
        // deflation-free Jacobi (diagonal after convergence).
        let mut m = m0.clone();
        let (lo, hi) = hermitian_extreme_eigenvalues(&mut m);
        let diag: Vec<f64> = (0..3).map(|i| m[i][i].re).collect();
        let trace: f64 = diag.iter().sum();
        assert!((trace - 3.5).abs() < 1e-10);
        let frob_m0: f64 = m0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum();
        let frob_diag: f64 = diag.iter().map(|d| d * d).sum();
        assert!((frob_m0 - frob_diag).abs() < 1e-9);
        assert!((lo - diag.iter().cloned().fold(f64::INFINITY, f64::min)).abs() < 1e-12);
        assert!((hi - diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).abs() < 1e-12);
        assert!(lo <= hi);
    }

    #[test]
    fn full_sampling_has_zero_isometry_constant() {
        let mask = make_mask(16, 1.0, 1).unwrap();
        let delta: f64 = exact_isometry_constant(&mask, 2);
        assert!(delta < 1e-12, "delta {delta}");
    }

    #[test]
    fn combination_count_matches_binomial() {
        let mut count = 0usize;
        for_each_combination(10, 3, &mut |_| count += 1);
        assert_eq!(count, 120);
        let mut count4 = 0usize;
        for_each_combination(9, 4, &mut |_| count4 += 1);
        assert_eq!(count4, 126);
    }

    #[test]
    fn guards_on_size_and_sparsity() {
        let samples = vec![Complex::new(1.0f64, 0.0); 128];
        let y = ComplexSeries::new(samples, 1.0, 0.0).unwrap();
        let mask = make_mask(128, 0.5, 1).unwrap();
        assert!(rip_bound_check(&y, &mask, 1).is_err()); // L > 64

        let y16 = ComplexSeries::new(vec![Complex::new(1.0f64, 0.0); 16], 1.0, 0.0).unwrap();
        let m16 = make_mask(16, 0.5, 1).unwrap();
        assert!(rip_bound_check(&y16, &m16, 0).is_err());
        assert!(rip_bound_check(&y16, &m16, 4).is_err());
    }

    #[test]
    fn full_rate_bound_is_trivially_met() {
        // gamma = 1: A is unitary, delta = 0, zero per-bin error.
        let samples: Vec<Complex<f64>> = (0..32)
            .map(|k| Complex::cis(2.0 * std::f64::consts::PI * 3.0 * k as f64 / 32.0))
            .collect();
        let y = ComplexSeries::new(samples, 32.0, 0.0).unwrap();
        let mask = make_mask(32, 1.0, 0).unwrap();
        let report = rip_bound_check(&y, &mask, 1).unwrap();
        assert!(report.delta < 1e-12);
        assert!(report.max_error() < 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn one_sparse_bound_over_mask_sweep() {
        // Exactly 1-sparse coefficients: residue term vanishes and the
        // per-bin error must stay within delta * ||eta_s||.
        let l = 16usize;
        for seed in 0..100 {
            let bin = (seed % 16) as usize;
            let samples: Vec<Complex<f64>> = (0..l)
                .map(|k| {
                    Complex::cis(2.0 * std::f64::consts::PI * (bin * k) as f64 / l as f64)
                })
                .collect();
            let y = ComplexSeries::new(samples, l as f64, 0.0).unwrap();
            let mask = make_mask(l, 0.5, 7000 + seed).unwrap();
            let report = rip_bound_check(&y, &mask, 1).unwrap();
            assert!(report.holds, "seed {seed}: err {} rhs {}", report.max_error(), report.rhs);
        }
    }

    #[test]
    fn compressible_bound_with_residue_term() {
        let l = 32usize;
        for seed in 0..50 {
            let samples: Vec<Complex<f64>> = (0..l)
                .map(|k| {
                    let t = k as f64 / l as f64;
                    let major = Complex::cis(2.0 * std::f64::consts::PI * 3.0 * l as f64 * t / l as f64) * 2.0
                        + Complex::cis(2.0 * std::f64::consts::PI * 11.0 * l as f64 * t / l as f64) * 1.5;
                    let ripple = Complex::new((k as f64 * 0.77).sin(), (k as f64 * 0.41).cos()) * 0.05;
                    major + ripple
                })
                .collect();
            let y = ComplexSeries::new(samples, l as f64, 0.0).unwrap();
            let mask = make_mask(l, 0.4, 9000 + seed).unwrap();
            let report = rip_bound_check(&y, &mask, 2).unwrap();
            assert!(report.rhs > 0.0);
            assert!(report.holds, "seed {seed}");
        }
    }
}
