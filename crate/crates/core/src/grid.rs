//! Square complex grids and the unitary 2-D DFT.
//!
//! Both [`ComplexImage`] and [`Spectrum`] store `n * n` samples in row-major
//! order. Spectra use natural DFT order with the DC coefficient at `[0, 0]`;
//! [`center_shift`] converts to the centered layout for display only.
//!
//! The transform pair is orthonormal: forward and inverse are each scaled by
//! `1 / n`, so the adjoint of the sampling operator is a plain zero-filled
//! inverse transform and Parseval holds without extra factors.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! square_grid {
    ($name:ident) => {
        impl $name {
            /// Wraps row-major samples; `n` must be a positive even integer.
            pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
                check_side(n)?;
                if data.len() != n * n {
                    return Err(Error::invalid(
                        "data",
                        format!("expected {} samples for n = {n}, got {}", n * n, data.len()),
                    ));
                }
                Ok(Self { n, data })
            }

            pub fn zeros(n: usize) -> Result<Self> {
                Self::new(n, vec![Complex64::new(0.0, 0.0); n * n])
            }

            pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
                check_side(n)?;
                let mut data = Vec::with_capacity(n * n);
                for row in 0..n {
                    for col in 0..n {
                        data.push(f(row, col));
                    }
                }
                Ok(Self { n, data })
            }

            #[inline]
            pub fn n(&self) -> usize {
                self.n
            }

            #[inline]
            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            #[inline]
            pub fn data_mut(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<Complex64> {
                self.data
            }

            #[inline]
            pub fn get(&self, row: usize, col: usize) -> Complex64 {
                self.data[row * self.n + col]
            }

            #[inline]
            pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
                self.data[row * self.n + col] = value;
            }

            /// Sum of squared magnitudes.
            pub fn energy(&self) -> f64 {
                self.data.iter().map(|v| v.norm_sqr()).sum()
            }

            pub fn norm(&self) -> f64 {
                self.energy().sqrt()
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }

            pub(crate) fn ensure_same_side(&self, other_n: usize) -> Result<()> {
                if self.n != other_n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        actual: other_n,
                    });
                }
                Ok(())
            }

            /// `‖self − other‖₂ / ‖other‖₂`, or the absolute error when `other` is zero.
            pub fn relative_error(&self, other: &Self) -> f64 {
                let diff: f64 = self
                    .data
                    .iter()
                    .zip(&other.data)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let reference = other.norm();
                if reference > 0.0 {
                    diff / reference
                } else {
                    diff
                }
            }

            pub fn scale(&mut self, factor: f64) {
                for v in &mut self.data {
                    *v *= factor;
                }
            }

            /// Element-wise `self + other`.
            pub fn add(&self, other: &Self) -> Result<Self> {
                self.ensure_same_side(other.n)?;
                let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
                Ok(Self { n: self.n, data })
            }

            /// Element-wise `self − other`.
            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.ensure_same_side(other.n)?;
                let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
                Ok(Self { n: self.n, data })
            }
        }
    };
}

/// An `n × n` complex image, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexImage {
    n: usize,
    data: Vec<Complex64>,
}

/// An `n × n` k-space grid in natural DFT order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    n: usize,
    data: Vec<Complex64>,
}

square_grid!(ComplexImage);
square_grid!(Spectrum);

impl ComplexImage {
    /// Real-valued image from row-major samples.
    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        Self::new(n, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }
}

impl Spectrum {
    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }
}

fn check_side(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::invalid(
            "n",
            format!("side length must be a positive even integer, got {n}"),
        ));
    }
    Ok(())
}

/// Signed frequency index of natural-order position `k` on an `n`-point axis.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> isize {
    if k < n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn transpose(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    const BLOCK: usize = 32;
    for rb in (0..n).step_by(BLOCK) {
        for cb in (0..n).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(n) {
                for c in cb..(cb + BLOCK).min(n) {
                    dst[c * n + r] = src[r * n + c];
                }
            }
        }
    }
}

fn transform(n: usize, input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    let mut buf = input.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(n, &buf, &mut t);
    for col in t.chunks_exact_mut(n) {
        plan.process_with_scratch(col, &mut scratch);
    }
    transpose(n, &t, &mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Unitary forward 2-D DFT.
pub fn fft2(img: &ComplexImage) -> Result<Spectrum> {
    if img.n < 4 {
        return Err(Error::invalid("n", format!("fft2 needs n >= 4, got {}", img.n)));
    }
    Ok(Spectrum {
        n: img.n,
        data: transform(img.n, &img.data, false),
    })
}

/// Unitary inverse 2-D DFT.
pub fn ifft2(spec: &Spectrum) -> Result<ComplexImage> {
    if spec.n < 4 {
        return Err(Error::invalid("n", format!("ifft2 needs n >= 4, got {}", spec.n)));
    }
    Ok(ComplexImage {
        n: spec.n,
        data: transform(spec.n, &spec.data, true),
    })
}

/// Circular shift by `(n/2, n/2)`: natural order to centered order and back.
pub fn center_shift(spec: &Spectrum) -> Spectrum {
    Spectrum {
        n: spec.n,
        data: center_shift_values(spec.n, &spec.data),
    }
}

/// [`center_shift`] for any row-major `n × n` buffer.
pub fn center_shift_values<T: Copy>(n: usize, values: &[T]) -> Vec<T> {
    let h = n / 2;
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        let src_row = (row + h) % n;
        for col in 0..n {
            out.push(values[src_row * n + (col + h) % n]);
        }
    }
    out
}

/// Divides every sample by the largest magnitude; an all-zero image is returned unchanged.
pub fn normalize_max(img: &ComplexImage) -> ComplexImage {
    let peak = img.max_abs();
    let mut out = img.clone();
    if peak > 0.0 {
        for v in &mut out.data {
            *v /= peak;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(n: usize, seed: u64) -> ComplexImage {
        let mut rng = crate::rng::SplitMix64::new(seed);
        ComplexImage::from_fn(n, |_, _| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).unwrap()
    }

    #[test]
    fn constant_image_is_dc_only() {
        let img = ComplexImage::from_fn(4, |_, _| c(0.7, 0.0)).unwrap();
        let spec = fft2(&img).unwrap();
        assert!((spec.get(0, 0) - c(2.8, 0.0)).norm() < 1e-14);
        for (k, v) in spec.data().iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-14, "bin {k} = {v}");
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let mut img = ComplexImage::zeros(4).unwrap();
        img.set(0, 0, c(1.0, 0.0));
        let spec = fft2(&img).unwrap();
        for v in spec.data() {
            assert!((v - c(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let img = pseudo_random(8, 3);
        let spec = fft2(&img).unwrap();
        assert!((spec.energy() - img.energy()).abs() / img.energy() < 1e-12);

        let img = pseudo_random(16, 4);
        let back = ifft2(&fft2(&img).unwrap()).unwrap();
        assert!(back.relative_error(&img) <= 1e-12);
    }

    #[test]
    fn inverse_of_dc_spectrum() {
        let mut spec = Spectrum::zeros(4).unwrap();
        spec.set(0, 0, c(4.0, 0.0));
        let img = ifft2(&spec).unwrap();
        for v in img.data() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
        let zero = ifft2(&Spectrum::zeros(8).unwrap()).unwrap();
        assert!(zero.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_sides() {
        assert!(ComplexImage::zeros(5).is_err());
        assert!(ComplexImage::new(4, vec![c(0.0, 0.0); 15]).is_err());
        assert!(fft2(&ComplexImage::zeros(2).unwrap()).is_err());
    }

    #[test]
    fn center_shift_moves_dc_and_is_involutive() {
        let mut s = Spectrum::zeros(4).unwrap();
        s.set(1, 0, c(1.0, 0.0));
        let shifted = center_shift(&s);
        assert_eq!(shifted.get(3, 2), c(1.0, 0.0));

        let mut dc = Spectrum::zeros(8).unwrap();
        dc.set(0, 0, c(1.0, 0.0));
        assert_eq!(center_shift(&dc).get(4, 4), c(1.0, 0.0));

        let img = pseudo_random(8, 9);
        let s = fft2(&img).unwrap();
        assert_eq!(center_shift(&center_shift(&s)), s);
    }

    #[test]
    fn normalize_max_cases() {
        let img = ComplexImage::from_real(
            4,
            &[
                2.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
            ],
        )
        .unwrap();
        let out = normalize_max(&img);
        assert_eq!(out.get(0, 0), c(1.0, 0.0));
        assert_eq!(out.get(0, 1), c(0.5, 0.0));
        assert_eq!(out.get(3, 3), c(-0.5, 0.0));

        let zero = ComplexImage::zeros(4).unwrap();
        assert_eq!(normalize_max(&zero), zero);

        let mut z = ComplexImage::zeros(4).unwrap();
        z.set(2, 1, c(3.0, 4.0));
        let out = normalize_max(&z);
        assert!((out.get(2, 1) - c(0.6, 0.8)).norm() < 1e-15);
        assert!((out.max_abs() - 1.0).abs() < 1e-15);
    }
}
