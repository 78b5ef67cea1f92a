//! Image quality metrics and k-space error maps.
//!
//! Image metrics compare magnitude images. PSNR and SSIM take their peak
//! and dynamic range from the reference, so they are not symmetric in
//! their arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{signed_frequency, ComplexImage, Spectrum};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const LOG_SIZE: usize = 15;
const LOG_SIGMA: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    /// Decibels; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssim: f64,
    pub hfen: f64,
}

pub fn evaluate(reference: &ComplexImage, recon: &ComplexImage) -> Result<MetricTriple> {
    Ok(MetricTriple {
        psnr: psnr(reference, recon)?,
        ssim: ssim(reference, recon)?,
        hfen: hfen(reference, recon)?,
    })
}

fn magnitudes(reference: &ComplexImage, recon: &ComplexImage) -> Result<(Vec<f64>, Vec<f64>)> {
    reference.ensure_same_side(recon.n())?;
    Ok((reference.magnitude(), recon.magnitude()))
}

const IDENTICAL_RMS_ULPS: f64 = 16.0;

/// Peak signal-to-noise ratio in dB; infinite when the magnitudes agree to round-off.
pub fn psnr(reference: &ComplexImage, recon: &ComplexImage) -> Result<f64> {
    let (a, b) = magnitudes(reference, recon)?;
    let mse = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    let peak = a.iter().cloned().fold(0.0, f64::max);
    // Differences at the level of FFT round-off count as identical.
    if mse.sqrt() <= IDENTICAL_RMS_ULPS * f64::EPSILON * peak || mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

fn gaussian_weights(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let w: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable filtering over the positions where the window fits entirely.
fn filter_valid(x: &[f64], n: usize, w: &[f64]) -> Vec<f64> {
    let m = n + 1 - w.len();
    let mut rows = vec![0.0; n * m];
    for r in 0..n {
        for c in 0..m {
            rows[r * m + c] = w.iter().enumerate().map(|(k, wk)| wk * x[r * n + c + k]).sum();
        }
    }
    let mut out = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            out[r * m + c] = w.iter().enumerate().map(|(k, wk)| wk * rows[(r + k) * m + c]).sum();
        }
    }
    out
}

/// Mean SSIM with an 11×11 Gaussian window (σ = 1.5).
pub fn ssim(reference: &ComplexImage, recon: &ComplexImage) -> Result<f64> {
    let n = reference.n();
    if n < SSIM_WINDOW {
        return Err(Error::invalid("n", format!("SSIM needs n >= {SSIM_WINDOW}, got {n}")));
    }
    let (a, b) = magnitudes(reference, recon)?;
    let peak = a.iter().cloned().fold(0.0, f64::max);
    let range = if peak > 0.0 { peak } else { 1.0 };
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);

    let w = gaussian_weights(SSIM_WINDOW, SSIM_SIGMA);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(&a, n, &w);
    let mu_b = filter_valid(&b, n, &w);
    let e_aa = filter_valid(&aa, n, &w);
    let e_bb = filter_valid(&bb, n, &w);
    let e_ab = filter_valid(&ab, n, &w);

    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        total += num / den;
    }
    Ok(total / mu_a.len() as f64)
}

/// 15×15 Laplacian-of-Gaussian kernel (σ = 1.5) with its mean removed.
pub fn log_kernel() -> Vec<f64> {
    let c = (LOG_SIZE / 2) as f64;
    let s2 = LOG_SIGMA * LOG_SIGMA;
    let mut g = Vec::with_capacity(LOG_SIZE * LOG_SIZE);
    for i in 0..LOG_SIZE {
        for j in 0..LOG_SIZE {
            let (u, v) = (i as f64 - c, j as f64 - c);
            g.push((-(u * u + v * v) / (2.0 * s2)).exp());
        }
    }
    let sum: f64 = g.iter().sum();
    let mut k: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(idx, gv)| {
            let (u, v) = ((idx / LOG_SIZE) as f64 - c, (idx % LOG_SIZE) as f64 - c);
            gv / sum * (u * u + v * v - 2.0 * s2) / (s2 * s2)
        })
        .collect();
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    for v in &mut k {
        *v -= mean;
    }
    k
}

fn circular_filter(x: &[f64], n: usize, kernel: &[f64], size: usize) -> Vec<f64> {
    let half = (size / 2) as isize;
    let ni = n as isize;
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for i in 0..size {
                let rr = (r as isize + i as isize - half).rem_euclid(ni) as usize;
                for j in 0..size {
                    let cc = (c as isize + j as isize - half).rem_euclid(ni) as usize;
                    acc += kernel[i * size + j] * x[rr * n + cc];
                }
            }
            out[r * n + c] = acc;
        }
    }
    out
}

/// `‖LoG(|recon|) − LoG(|reference|)‖₂` with circular boundaries.
pub fn hfen(reference: &ComplexImage, recon: &ComplexImage) -> Result<f64> {
    let (a, b) = magnitudes(reference, recon)?;
    let n = reference.n();
    let diff: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
    // The filter is linear, so filtering the difference is equivalent.
    let filtered = circular_filter(&diff, n, &log_kernel(), LOG_SIZE);
    Ok(filtered.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// A real-valued `n × n` map in natural DFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMap {
    n: usize,
    values: Vec<f64>,
}

impl ErrorMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean over frequencies with centered radius strictly above `r_min`.
    pub fn mean_outside_radius(&self, r_min: f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in 0..self.n {
            let fr = signed_frequency(r, self.n) as f64;
            for c in 0..self.n {
                let fc = signed_frequency(c, self.n) as f64;
                if (fr * fr + fc * fc).sqrt() > r_min {
                    sum += self.values[r * self.n + c];
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Element-wise `|Y_r − Y_f|`.
pub fn kare_map(full: &Spectrum, recon: &Spectrum) -> Result<ErrorMap> {
    full.ensure_same_side(recon.n())?;
    Ok(ErrorMap {
        n: full.n(),
        values: full
            .data()
            .iter()
            .zip(recon.data())
            .map(|(f, r)| (r - f).norm())
            .collect(),
    })
}

/// Element-wise `|Y_r − Y_f| / max(|Y_f|, ε)` with `ε = 1e-12·max|Y_f|`.
pub fn krre_map(full: &Spectrum, recon: &Spectrum) -> Result<ErrorMap> {
    full.ensure_same_side(recon.n())?;
    let peak = full.max_abs();
    if peak == 0.0 {
        return Err(Error::invalid("full", "reference spectrum is identically zero"));
    }
    let eps = 1e-12 * peak;
    Ok(ErrorMap {
        n: full.n(),
        values: full
            .data()
            .iter()
            .zip(recon.data())
            .map(|(f, r)| (r - f).norm() / f.norm().max(eps))
            .collect(),
    })
}
